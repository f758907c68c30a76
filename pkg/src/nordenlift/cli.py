"""Batch front end: ``check | classify | verify <id> | dump``.

Reads a JSON run config, writes a JSON report (or CSV for ``dump``).
Exit codes: 0 pass, 1 fail, 2 inconclusive, 64 config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional

import numpy as np

from . import __version__
from .classify import (REJECT, Sampling, classify_geometries, default_tolerance, defect_norden, geometries,
                       point_defects)
from .connection import dump_f_csv, nijenhuis_residual, relative
from .errors import ConfigError, InconsistencyError, NordenError
from .families import (FamilySpec, ak_family, build_family, check_necessary, conformal_ak_family,
                       diagonal_ak, generic_norden, integrable_family, perturb, perturb_b1,
                       quasi_ak_family)
from .lift import check_family, complete_norden
from .scalarfn import T, write_csv
from .spaceform import SpaceForm

log = logging.getLogger("nordenlift")

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_CONFIG = 0, 1, 2, 64
SCHEMA = 1
NECESSARY_NAMES = {"7.1": "semi-ak", "7.2-remark": "ricci-flat", "8.1": "special-complex", "9.1": "w1+w3"}
VERIFY_IDS = ("2.2", "2.3", "2.4", "3.1", "3.2", "4.1", "5.1", "6.1", "7.1", "8.1", "9.1")
RESIDUAL_KEYS = {"AK": "F=0", "w1": "w1-identity", "w2": "w2-identities", "w3": "cyclic-F",
                 "w1+w2": "cyclic-FJ", "w1+w3": "w1+w3-identity", "w2+w3": "phi=0",
                 "w1+w2+w3": "G(JX,JY)+G(X,Y)"}


# config ----------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    n: int = 2
    c: float = 1.0
    family: FamilySpec = field(default_factory=lambda: FamilySpec(kind="trivial-flat"))
    sampling: Sampling = field(default_factory=Sampling)
    member_tol: Optional[float] = None
    reject_tol: float = REJECT
    output: Optional[str] = None

    @property
    def space_form(self) -> SpaceForm:
        return SpaceForm(self.n, self.c)

    def as_dict(self) -> dict:
        s = self.sampling
        return {"schema": SCHEMA, "base": {"n": self.n, "c": self.c}, "family": self.family.as_dict(),
                "sampling": {"num_points": s.num_points, "seed": s.seed, "x_radius": s.x_radius,
                             "y_radius": s.y_radius},
                "tolerances": {"member": self.member_tol, "reject": self.reject_tol},
                "output": self.output}


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported schema {doc.get('schema')!r}; expected {SCHEMA}")
    unknown = set(doc) - {"schema", "base", "family", "sampling", "tolerances", "output"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        base = doc.get("base", {})
        n, c = int(base.get("n", 2)), float(base.get("c", 1.0))
        if n < 2:
            raise ConfigError("base.n must be at least 2")
        fam = FamilySpec.from_dict(doc.get("family", {"kind": "trivial-flat"}))
        s = doc.get("sampling", {})
        sampling = Sampling(num_points=int(s.get("num_points", 20)), seed=int(s.get("seed", 0)),
                            x_radius=float(s.get("x_radius", 0.5)), y_radius=float(s.get("y_radius", 1.0)))
        if sampling.num_points < 1:
            raise ConfigError("sampling.num_points must be positive")
        tol = doc.get("tolerances", {})
        member = tol.get("member")
        return RunConfig(n=n, c=c, family=fam, sampling=sampling,
                         member_tol=None if member is None else float(member),
                         reject_tol=float(tol.get("reject", REJECT)), output=doc.get("output"))
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    s = cfg.sampling
    if args.points is not None:
        s = replace(s, num_points=args.points)
    if args.seed is not None:
        s = replace(s, seed=args.seed)
    cfg = replace(cfg, sampling=s)
    if args.tol is not None:
        cfg = replace(cfg, member_tol=args.tol)
    if args.output is not None:
        cfg = replace(cfg, output=args.output)
    return cfg


# helpers -----------------------------------------------------------------------

def _num(x) -> float:
    x = float(x)
    return x if math.isfinite(x) else (math.inf if x > 0 else -math.inf)


def _t_samples(fam, cfg: RunConfig) -> np.ndarray:
    hi = min(0.5 * cfg.sampling.y_radius ** 2, 0.999 * fam.t_max)
    return np.linspace(0.0, hi, cfg.sampling.num_points)


def _tol(fam, cfg: RunConfig) -> float:
    return cfg.member_tol if cfg.member_tol is not None else default_tolerance(fam)


def _three_way(small: Dict[str, float], large: Dict[str, float], tol: float, reject: float) -> str:
    """Small residuals must be <= tol; witness residuals must exceed ``reject``."""
    if any(v > reject for v in small.values()) or any(v <= tol for v in large.values()):
        return "fail"
    if any(v > tol for v in small.values()) or any(v <= reject for v in large.values()):
        return "inconclusive"
    return "pass"


# commands ------------------------------------------------------------------------

def cmd_check(cfg: RunConfig) -> dict:
    sf = cfg.space_form
    fam = build_family(cfg.family, cfg.c, cfg.n)
    tol = _tol(fam, cfg)
    rep = check_family(fam, _t_samples(fam, cfg), tol)
    pts = cfg.sampling.points(sf, fam.t_max)
    geos = geometries(fam, sf, pts)
    j2 = max(_j2(g) for g in geos)
    nord = max(defect_norden(g) for g in geos)
    residuals = {k: _num(v) for k, v in rep.residuals.items()}
    residuals.update({"J^2+I": j2, "G(JX,JY)+G(X,Y)": nord})
    failures = list(rep.failures) + [k for k in ("J^2+I", "G(JX,JY)+G(X,Y)") if residuals[k] > tol]
    nondeg_ok = all(v > 1e-12 for v in rep.nondegeneracy.values())
    if not nondeg_ok:
        failures.append("nondegeneracy")
    return {"family": fam.label, "residuals": residuals, "tolerance": tol,
            "nondegeneracy": {k: _num(v) for k, v in rep.nondegeneracy.items()},
            "failures": failures, "status": "fail" if failures else "pass"}


def _j2(g) -> float:
    I = np.eye(g.J.shape[0])
    return relative(g.J @ g.J + I, I)


def cmd_classify(cfg: RunConfig) -> dict:
    sf = cfg.space_form
    fam = build_family(cfg.family, cfg.c, cfg.n)
    tol = _tol(fam, cfg)
    pts = cfg.sampling.points(sf, fam.t_max)
    try:
        rep = classify_geometries(geometries(fam, sf, pts), tol, cfg.reject_tol, fam.label)
    except InconsistencyError as exc:
        return {"family": fam.label, "error": str(exc), "residuals": {}, "status": "fail"}
    residuals = {RESIDUAL_KEYS[k]: v.residual for k, v in rep.classes.items()}
    return {"family": fam.label, "residuals": residuals, "classes": rep.as_dict(),
            "verdict": rep.verdict, "status": "inconclusive" if rep.inconclusive else "pass"}


# verify ------------------------------------------------------------------------------

def _max_defects(fam, sf, pts) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for g in geometries(fam, sf, pts):
        for k, v in point_defects(g).items():
            key = RESIDUAL_KEYS[k]
            out[key] = max(out.get(key, 0.0), v)
    return out


def _nij(fam, sf, pts) -> float:
    return max(nijenhuis_residual(fam, sf, p) for p in pts)


def _pick(d: Dict[str, float], *keys) -> Dict[str, float]:
    return {k: d[k] for k in keys}


def _ref_integrable(c, t_max=0.5, b_curvature=None):
    jp = integrable_family(1 + T, T / 2, c if b_curvature is None else b_curvature, t_max)
    return complete_norden(jp.a1, jp.a3, jp.b1, jp.b3, 2 + T, 0.1, 0.5, 0.3 * T, c=c, t_max=t_max,
                           label="integrable")


def _verify_22(cfg, sf, pts):
    fam = generic_norden(cfg.c)
    bad = fam.replace(a2=fam.a2 + 0.1, label="a2-shifted")
    r = {"J^2+I": max(_j2(g) for g in geometries(fam, sf, pts))}
    w = {"J^2+I": max(_j2(g) for g in geometries(bad, sf, pts))}
    return fam, r, w


def _verify_23(cfg, sf, pts):
    fam = _ref_integrable(cfg.c)
    bad = _ref_integrable(cfg.c, b_curvature=0.0 if cfg.c != 0 else 1.0)
    return fam, {"nijenhuis": _nij(fam, sf, pts)}, {"nijenhuis": _nij(bad, sf, pts)}


def _verify_24(cfg, sf, pts):
    fam = generic_norden(cfg.c)
    bad = fam.replace(c2=fam.c2 + 0.1, label="c2-shifted")
    r = {"G(JX,JY)+G(X,Y)": max(defect_norden(g) for g in geometries(fam, sf, pts))}
    w = {"G(JX,JY)+G(X,Y)": max(defect_norden(g) for g in geometries(bad, sf, pts))}
    return fam, r, w


def _verify_31(cfg, sf, pts):
    fam = ak_family(1 + T, T / 2, 2.0, 0.1, cfg.c, t_max=0.5)
    bad = perturb(fam, "d1", 0.05)
    return fam, _pick(_max_defects(fam, sf, pts), "F=0"), _pick(_max_defects(bad, sf, pts), "F=0")


def _verify_32(cfg, sf, pts):
    fam = diagonal_ak(1.0, 1.0, cfg.c)
    bad = perturb(fam, "d1", 0.05)
    return fam, _pick(_max_defects(fam, sf, pts), "F=0"), _pick(_max_defects(bad, sf, pts), "F=0")


def _verify_41(cfg, sf, pts):
    fam = conformal_ak_family(1 + T, T / 2, 2 + T, 0.0, cfg.c, t_max=0.5)
    bad = perturb(fam, "d1", 0.05)
    d = _max_defects(fam, sf, pts)
    return fam, _pick(d, "w1-identity"), {"w1-identity": _max_defects(bad, sf, pts)["w1-identity"], "F=0": d["F=0"],
                                    "phi=0": d["phi=0"]}


def _verify_51(cfg, sf, pts):
    fam = _ref_integrable(cfg.c)
    bad = perturb_b1(fam, 0.1, cfg.c)
    r = dict(_pick(_max_defects(fam, sf, pts), "cyclic-FJ"), nijenhuis=_nij(fam, sf, pts))
    w = dict(_pick(_max_defects(bad, sf, pts), "cyclic-FJ"), nijenhuis=_nij(bad, sf, pts))
    return fam, r, w


def _verify_61(cfg, sf, pts):
    seed = (1.0, 0.2, 2.0, 0.1, 0.3, 0.1, 0.2 + 0 * T, 0.1 * T)
    fam, _ = quasi_ak_family(*seed, c=cfg.c, t_max=0.5, step=1e-2, n=cfg.n)
    fitted, _ = quasi_ak_family(*seed, c=cfg.c, t_max=0.5, step=1e-2, n=cfg.n, fit_a3=True)
    r = _pick(_max_defects(fam, sf, pts), "cyclic-F")
    r["cyclic-F[a3' fitted]"] = _max_defects(fitted, sf, pts)["cyclic-F"]
    return fam, r, {"F=0": _max_defects(fam, sf, pts)["F=0"]}


def _prop_residuals(prop, fam, sf, cfg, prefix=""):
    rep = check_necessary(prop, fam, sf, _t_samples(fam, cfg))
    return {f"{prefix}{NECESSARY_NAMES[prop]}:{k}": v for k, v in rep.residuals.items()}


def _verify_71(cfg, sf, pts):
    fam = ak_family(1 + T, T / 2, 2.0, 0.1, cfg.c, t_max=0.5)
    bad = conformal_ak_family(1 + T, T / 2, 2 + T, 0.0, cfg.c, t_max=0.5)
    return fam, _prop_residuals("7.1", fam, sf, cfg), _prop_residuals("7.1", bad, sf, cfg, "strict-w1:")


def _verify_81(cfg, sf, pts):
    fam = ak_family(1 + T, T / 2, 2.0, 0.1, cfg.c, t_max=0.5)
    return fam, _prop_residuals("8.1", fam, sf, cfg), {}


def _verify_91(cfg, sf, pts):
    fam = conformal_ak_family(1 + T, T / 2, 2 + T, 0.0, cfg.c, t_max=0.5)
    ak = ak_family(1 + T, T / 2, 2.0, 0.1, cfg.c, t_max=0.5)
    r = _prop_residuals("9.1", fam, sf, cfg, "w1:")
    r.update(_prop_residuals("9.1", ak, sf, cfg, "ak:"))
    return fam, r, _prop_residuals("9.1", generic_norden(cfg.c), sf, cfg, "generic:")


VERIFIERS: Dict[str, Callable] = {
    "2.2": _verify_22, "2.3": _verify_23, "2.4": _verify_24, "3.1": _verify_31, "3.2": _verify_32,
    "4.1": _verify_41, "5.1": _verify_51, "6.1": _verify_61, "7.1": _verify_71, "8.1": _verify_81,
    "9.1": _verify_91,
}


def cmd_verify(result_id: str, cfg: RunConfig) -> dict:
    if result_id not in VERIFIERS:
        raise ConfigError(f"unknown result id {result_id!r}; expected one of {', '.join(VERIFY_IDS)}")
    sf = cfg.space_form
    # sample inside the smallest domain any verifier uses
    pts = cfg.sampling.points(sf, 0.5)
    fam, small, large = VERIFIERS[result_id](cfg, sf, pts)
    tol = _tol(fam, cfg)
    status = _three_way(small, large, tol, cfg.reject_tol)
    residuals = dict(small)
    residuals.update({f"witness:{k}": v for k, v in large.items()})
    return {"id": result_id, "family": fam.label, "residuals": residuals, "tolerance": tol,
            "reject": cfg.reject_tol, "status": status}


def cmd_dump(cfg: RunConfig, what: str, out) -> dict:
    sf = cfg.space_form
    fam = build_family(cfg.family, cfg.c, cfg.n)
    if what == "table":
        write_csv(fam.functions, _t_samples(fam, cfg), out)
    else:
        dump_f_csv(fam, sf, cfg.sampling.points(sf, fam.t_max), out)
    return {"family": fam.label, "status": "pass"}


# entry point -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nordenlift", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config (schema 1)")
    common.add_argument("--output", help="report path (default: config output, else stdout)")
    common.add_argument("--points", type=int, help="number of sample points")
    common.add_argument("--seed", type=int, help="sampling seed")
    common.add_argument("--tol", type=float, help="membership tolerance")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="almost-complex and Norden constraints")
    sub.add_parser("classify", parents=[common], help="membership in the eight classes")
    v = sub.add_parser("verify", parents=[common], help="reproduce one structure result")
    v.add_argument("result_id", choices=VERIFY_IDS)
    d = sub.add_parser("dump", parents=[common], help="coefficient table or F components as CSV")
    d.add_argument("--what", choices=("table", "F"), default="table")
    return p


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def render(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = apply_overrides(load_config(args.config), args)
        if cfg.sampling.num_points < 1:
            raise ConfigError("--points must be positive")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    start = time.perf_counter()
    try:
        if args.command == "dump":
            if cfg.output is None:
                body = cmd_dump(cfg, args.what, sys.stdout)
            else:
                with open(cfg.output, "w", newline="") as fh:
                    body = cmd_dump(cfg, args.what, fh)
            log.info("dump finished in %.3fs", time.perf_counter() - start)
            return EXIT_PASS
        if args.command == "check":
            body = cmd_check(cfg)
        elif args.command == "classify":
            body = cmd_classify(cfg)
        else:
            body = cmd_verify(args.result_id, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except NordenError as exc:
        body = {"error": f"{type(exc).__name__}: {exc}", "residuals": {}, "status": "fail"}

    report = {"command": args.command, "config": cfg.as_dict(), **body,
              "timing": {"seconds": round(time.perf_counter() - start, 6)}}
    try:
        _emit(render(report), cfg.output)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return {"pass": EXIT_PASS, "inconclusive": EXIT_INCONCLUSIVE}.get(report["status"], EXIT_FAIL)


def main() -> None:
    sys.exit(run())
