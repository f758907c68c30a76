"""Coefficient families for each Norden class, plus necessary-condition checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional

import numpy as np

from . import formulas as fm
from .connection import f_tensor_at
from .errors import ConfigError, DomainError, IntegrationError, ParseError
from .lift import (CoefficientFamily, FrozenCoefficients, NAMES, TangentPoint, _scan_zero,
                   complete_norden, completion, trivial_family)
from .scalarfn import Constant, Derived, Jet, ScalarFn, T, as_fn, integrate_ode, parse_expr, sqrt
from .spaceform import SpaceForm

DEFAULT_STEP = 1e-3
DEFAULT_T_MAX = 1.0


def _fn_namespace(c: float, **fns: ScalarFn):
    """ScalarFn namespace with ``<name>p`` derivative nodes."""
    ns = {k: as_fn(v) for k, v in fns.items()}
    ns.update({k + "p": f.d for k, f in list(ns.items())})
    return fm.namespace(c=c, t=T, **ns)


def _domain(*fns, t_max=None) -> float:
    dom = min(as_fn(f).t_max for f in fns)
    return dom if t_max is None else min(dom, t_max)


def _scan_hi(dom: float) -> float:
    return dom if math.isfinite(dom) else DEFAULT_T_MAX


# integrable J -------------------------------------------------------------

@dataclass(frozen=True)
class JPart:
    a1: ScalarFn
    a2: ScalarFn
    a3: ScalarFn
    b1: ScalarFn
    b2: ScalarFn
    b3: ScalarFn


def integrable_family(a1, a3, c: float, t_max: Optional[float] = None) -> JPart:
    """J coefficients with the b's fixed by integrability over curvature ``c``."""
    a1, a3 = as_fn(a1), as_fn(a3)
    dom = _domain(a1, a3, t_max=t_max)
    _scan_zero(a1, "a1", _scan_hi(dom))
    a2 = (1 + a3 * a3) / a1
    v = _fn_namespace(c, a1=a1, a2=a2, a3=a3)
    _scan_zero(fm.integrable_denominator(v), "integrability denominator", _scan_hi(dom))
    b1, b2, b3 = fm.integrable_b(v)
    return JPart(a1=a1, a2=Derived("a2", a2, dom), a3=a3,
                 b1=Derived("b1", b1, dom), b2=Derived("b2", b2, dom), b3=Derived("b3", b3, dom))


def integrable_norden(a1, a3, c1, c3, d1, d3, c: float, t_max: Optional[float] = None,
                      label: str = "integrable") -> CoefficientFamily:
    """Integrable J with a freely chosen G part (completed to a Norden metric)."""
    jp = integrable_family(a1, a3, c, t_max)
    return complete_norden(jp.a1, jp.a3, jp.b1, jp.b3, c1, c3, d1, d3, c=c, t_max=t_max, label=label)


# anti-Kaehler -------------------------------------------------------------

def diagonal_ak(A: float, B: float, c: float) -> CoefficientFamily:
    """Closed-form diagonal anti-Kaehler family; lives on ``t < -B/(2c)`` when ``c < 0``."""
    if A == 0:
        raise ValueError("A must be nonzero")
    if not B > 0:
        raise ValueError("B must be positive")
    t_max = -B / (2 * c) if c < 0 else math.inf
    u = B + 2 * c * T
    a1 = Derived("a1", sqrt(u), t_max)
    c1 = Derived("c1", A * u, t_max)
    zero = Constant(0.0, t_max)
    fam = complete_norden(a1, zero, zero, zero, c1, zero, Constant(-c * A, t_max), zero,
                          c=c, t_max=t_max, label="diagonal-ak")
    return fam


def ak_family(a1, a3, c1_0: float, c3_0: float, c: float, t_max: float = DEFAULT_T_MAX,
              step: float = DEFAULT_STEP) -> CoefficientFamily:
    """Anti-Kaehler family from free ``a1, a3`` and initial values of ``c1, c3``.

    ``c1, c3`` are ODE tables; ``d1 = c c2`` and ``d3`` follow algebraically.
    """
    jp = integrable_family(a1, a3, c, t_max)
    a1, a3 = jp.a1, jp.a3

    def state_ns(t: float, k: int, c1: Jet, c3: Jet):
        j1, j3 = a1.jet(t, k + 1), a3.jet(t, k + 1)
        return fm.namespace(a1=j1.truncate(k), a1p=j1.diff(), a3=j3.truncate(k), a3p=j3.diff(),
                            c1=c1, c3=c3, c=c, t=Jet.variable(t, k))

    def rhs(t, state):
        v = state_ns(t, state[0].order, *state)
        return [fm.ak_c1p(v), fm.ak_c3p(v)]

    def ak_denominator(t, y):
        return fm.ak_denominator(fm.namespace(a1=a1(t), a3=a3(t), c=c, t=t))

    c1, c3 = integrate_ode(rhs, [c1_0, c3_0], t_max, step, names=["c1", "c3"], guards=[ak_denominator])
    dom = min(t_max, jp.a1.t_max, jp.a3.t_max)
    v = _fn_namespace(c, a1=a1, a3=a3, c1=c1, c3=c3)
    v.c2 = (2 * a3 * c3 - (1 + a3 * a3) / a1 * c1) / a1
    d1 = Derived("d1", fm.ak_d1(v), dom)
    d3 = Derived("d3", fm.ak_d3(v), dom)
    return complete_norden(a1, a3, jp.b1, jp.b3, c1, c3, d1, d3, c=c, t_max=t_max, label="general-ak")


# conformally anti-Kaehler -------------------------------------------------

def conformal_ak_family(a1, a3, c1, c3, c: float, t_max: Optional[float] = None) -> CoefficientFamily:
    jp = integrable_family(a1, a3, c, t_max)
    c1, c3 = as_fn(c1), as_fn(c3)
    dom = _domain(jp.a1, jp.a3, c1, c3, t_max=t_max)
    v = _fn_namespace(c, a1=jp.a1, a3=jp.a3, c1=c1, c3=c3)
    d1 = Derived("d1", fm.conformal_d1(v), dom)
    d3 = Derived("d3", fm.conformal_d3(v), dom)
    return complete_norden(jp.a1, jp.a3, jp.b1, jp.b3, c1, c3, d1, d3, c=c, t_max=t_max,
                           label="conformal-ak")


# generic and perturbed ----------------------------------------------------

def generic_norden(c: float = 1.0) -> CoefficientFamily:
    """A Norden family with no special structure (J not integrable)."""
    return complete_norden(1 + T, T / 2, 0.3 + 0.1 * T, 0.2 * T, 2 + T, 0.1, 0.5, 0.3 * T,
                           c=c, label="generic-norden")


def perturb_b1(fam: CoefficientFamily, delta: float = 0.1, c: float = 0.0) -> CoefficientFamily:
    """Shift ``b1`` and re-complete, so the result stays Norden but loses integrability."""
    f = fam.functions
    return complete_norden(f["a1"], f["a3"], f["b1"] + delta, f["b3"], f["c1"], f["c3"],
                           f["d1"], f["d3"], c=c, t_max=fam.t_max, label=fam.label + "+db1")


def perturb(fam: CoefficientFamily, name: str, delta: float) -> CoefficientFamily:
    """Shift one of the free coefficients and recomplete ``a2, b2, c2, d2``."""
    f = dict(fam.functions)
    if name in ("a2", "b2", "c2", "d2"):
        raise ValueError(f"{name} is determined by completion")
    f[name] = f[name] + delta
    return complete_norden(f["a1"], f["a3"], f["b1"], f["b3"], f["c1"], f["c3"], f["d1"], f["d3"],
                           t_max=fam.t_max, label=f"{fam.label}+d{name}")


# quasi-anti-Kaehler -------------------------------------------------------

QUASI_STATE = ("a1", "a3", "c1", "c3", "d1", "d3")
QUASI_T_FLOOR = 1e-6
RANK_FLOOR = 1e-13


def cyclic_defect(F: np.ndarray) -> np.ndarray:
    return F + np.transpose(F, (1, 2, 0)) + np.transpose(F, (2, 0, 1))


def _quasi_prime(v, a3p=None) -> Dict[str, object]:
    """Closed-form slopes; ``a3p`` overrides the closed-form a3' when given."""
    out = {"c1": fm.quasi_c1p(v), "d1": fm.quasi_d1p(v)}
    out["a3"] = fm.quasi_a3p(v) if a3p is None else a3p
    out["c3"] = fm.quasi_c3p(v)
    v.a3p, v.c3p = out["a3"], out["c3"]
    out["a1"] = fm.quasi_a1p(v)
    return out


@dataclass
class QuasiSolve:
    """Bookkeeping of the pointwise least-squares solves."""

    count: int = 0
    worst: float = 0.0


def _quasi_fit(t, vals, b1, b3, c, sf: SpaceForm, log: QuasiSolve, fit_a3: bool):
    """Slopes of the quasi state at ``t``; d3' (and a3' if ``fit_a3``) by least squares.

    The cyclic defect at ``x = 0, y = sqrt(2t) e1`` is affine in the fitted
    slopes, so it is sampled at the origin and at unit vectors.
    """
    ts = max(t, QUASI_T_FLOOR)
    y = np.zeros(sf.n)
    y[0] = math.sqrt(2.0 * ts)
    p = TangentPoint.make(sf, np.zeros(sf.n), y)
    jb1, jb3 = Jet(b1), Jet(b3)

    def slopes(x):
        v = fm.namespace(c=c, t=t, b1=b1[0], b3=b3[0], **vals)
        primes = _quasi_prime(v, x[1] if fit_a3 else None)
        primes["d3"] = x[0]
        return primes

    def defect(x):
        primes = slopes(x)
        jets = {k: Jet((vals[k], primes[k])) for k in QUASI_STATE}
        a2, b2, c2, d2 = completion(jets["a1"], jets["a3"], jb1, jb3, jets["c1"], jets["c3"],
                                    jets["d1"], jets["d3"], Jet((t, 1.0)))
        full = dict(jets, b1=jb1, b3=jb3, a2=a2, b2=b2, c2=c2, d2=d2)
        frozen = FrozenCoefficients(t, [full[k].value for k in NAMES], [full[k].deriv for k in NAMES])
        return cyclic_defect(f_tensor_at(frozen, sf, p).F).ravel()

    m = 2 if fit_a3 else 1
    r0 = defect(np.zeros(m))
    A = np.column_stack([defect(e) - r0 for e in np.eye(m)])
    scale = 1.0 + float(np.max(np.abs(r0)))
    if np.linalg.matrix_rank(A, tol=RANK_FLOOR * scale) < m:
        if float(np.max(np.abs(r0))) <= RANK_FLOOR:
            x = np.zeros(m)
        else:
            raise IntegrationError("least-squares system for the fitted slopes is rank deficient", t)
    else:
        x = np.linalg.lstsq(A, -r0, rcond=None)[0]
    log.count += 1
    log.worst = max(log.worst, float(np.max(np.abs(r0 + A @ x))) / scale)
    primes = slopes(x)
    return [primes[k] for k in QUASI_STATE]


def quasi_ak_family(a1_0: float, a3_0: float, c1_0: float, c3_0: float, d1_0: float, d3_0: float,
                    b1, b3, c: float, t_max: float = DEFAULT_T_MAX, step: float = DEFAULT_STEP,
                    n: int = 2, fit_a3: bool = False):
    """Integrate the quasi-anti-Kaehler system from initial data.

    ``b1, b3`` are free functions.  ``a1, a3, c1, c3, d1`` follow the closed-form
    derivative formulas; ``d3'`` is fitted at each right-hand-side call by
    least squares on the cyclic identity at ``x = 0``.  With ``fit_a3`` the
    slope of ``a3`` joins the fit instead of using its closed form.
    Returns the family and the :class:`QuasiSolve` log; membership must be
    measured downstream.
    """
    b1, b3 = as_fn(b1), as_fn(b3)
    sf = SpaceForm(n, c)
    log = QuasiSolve()
    w0 = a1_0
    if abs(w0) < 1e-12:
        raise DomainError("a1+2t*b1 vanishes at t=0")

    def rhs(t, state):
        vals = {k: s.value for k, s in zip(QUASI_STATE, state)}
        jb1, jb3 = b1.jet(t, 1), b3.jet(t, 1)
        out = _quasi_fit(t, vals, jb1.coeffs, jb3.coeffs, c, sf, log, fit_a3)
        return [Jet((float(x),)) for x in out]

    def a1_plus_2tb1(t, y):
        return y[0] + 2 * t * b1(t)

    def q_denominator(t, y):
        a1, a3, c1, c3 = y[:4]
        return (c1 * (1 + a3 * a3) - a1 * a3 * c3) * (a1 + 2 * b1(t) * t)

    def r_denominator(t, y):
        a1, a3, c1, c3 = y[:4]
        return ((1 + a3 * a3) * c1 * c1 - a1 * c3 * (2 * a3 * c1 + a1 * c3)) * (a1 + 2 * b1(t) * t)

    tables = integrate_ode(rhs, [a1_0, a3_0, c1_0, c3_0, d1_0, d3_0], t_max, step,
                           names=list(QUASI_STATE),
                           guards=[a1_plus_2tb1, q_denominator, r_denominator], max_order=1)
    a1, a3, c1, c3, d1, d3 = tables
    fam = complete_norden(a1, a3, b1, b3, c1, c3, d1, d3, c=c, t_max=t_max, label="quasi-ak",
                          scan=False)
    return fam, log


# necessary conditions ----------------------------------------------------

PROPOSITIONS = ("7.1", "7.2-remark", "8.1", "9.1")

_CHECKS: Dict[str, List[tuple]] = {
    "7.1": [("c3'", "c3p", fm.semi_c3p, (fm.semi_denominator,))],
    "7.2-remark": [("a1'", "a1p", fm.ricci_flat_a1p, (fm._q,))],
    "8.1": [("c1'", "c1p", fm.special_c1p, (fm.ak_denominator,))],
    "9.1": [("a1'", "a1p", fm.w13_a1p, (fm._q,)), ("a3'", "a3p", fm.w13_a3p, (fm._q, fm._r))],
}


@dataclass(frozen=True)
class NecessaryReport:
    prop: str
    residuals: Dict[str, float]
    samples: int

    @property
    def max(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0


def value_namespace(fam, c: float, t: float):
    vals, ders = fam.arrays(t)
    ns = dict(zip(NAMES, map(float, vals)))
    ns.update({k + "p": float(d) for k, d in zip(NAMES, ders)})
    return fm.namespace(c=c, t=t, **ns)


def check_necessary(prop: str, fam, sf: SpaceForm, samples: Iterable[float]) -> NecessaryReport:
    """Max ``|lhs' - closed-form rhs|`` of a condition's derivative formula over ``samples``."""
    if prop not in _CHECKS:
        raise ValueError(f"unknown condition {prop!r}; expected one of {PROPOSITIONS}")
    samples = list(samples)
    res = {label: 0.0 for label, *_ in _CHECKS[prop]}
    for t in samples:
        v = value_namespace(fam, sf.c, float(t))
        for label, attr, rhs, dens in _CHECKS[prop]:
            for den in dens:
                if abs(den(v)) < 1e-12:
                    raise DomainError(f"excluded denominator {den.__doc__ or den.__name__} vanishes at t={t:g}")
            res[label] = max(res[label], abs(getattr(v, attr) - rhs(v)))
    return NecessaryReport(prop=prop, residuals=res, samples=len(samples))


# config-level families ----------------------------------------------------

KINDS = ("trivial-flat", "integrable", "diagonal-ak", "general-ak", "conformal-ak", "quasi-ak",
         "generic", "custom")


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    functions: Mapping[str, str] = field(default_factory=dict)
    scalars: Mapping[str, float] = field(default_factory=dict)
    t_max: float = DEFAULT_T_MAX
    step: float = DEFAULT_STEP
    perturb: Mapping[str, float] = field(default_factory=dict)
    scale: Mapping[str, float] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Mapping) -> "FamilySpec":
        if not isinstance(d, Mapping) or "kind" not in d:
            raise ConfigError("family needs a 'kind'")
        kind = d["kind"]
        if kind not in KINDS:
            raise ConfigError(f"unknown family kind {kind!r}")
        unknown = set(d) - {"kind", "functions", "scalars", "t_max", "step", "perturb", "scale"}
        if unknown:
            raise ConfigError(f"unknown family keys: {sorted(unknown)}")
        try:
            return cls(kind=kind, functions=dict(d.get("functions", {})),
                       scalars={k: float(v) for k, v in d.get("scalars", {}).items()},
                       t_max=float(d.get("t_max", DEFAULT_T_MAX)), step=float(d.get("step", DEFAULT_STEP)),
                       perturb={k: float(v) for k, v in d.get("perturb", {}).items()},
                       scale={k: float(v) for k, v in d.get("scale", {}).items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad family spec: {exc}") from exc

    def as_dict(self) -> dict:
        return {"kind": self.kind, "functions": dict(self.functions), "scalars": dict(self.scalars),
                "t_max": self.t_max, "step": self.step, "perturb": dict(self.perturb),
                "scale": dict(self.scale)}

    def fn(self, name: str, default: Optional[str] = None) -> ScalarFn:
        src = self.functions.get(name, default)
        if src is None:
            raise ConfigError(f"family {self.kind!r} needs function {name!r}")
        try:
            return parse_expr(str(src))
        except ParseError as exc:
            raise ConfigError(f"function {name!r}: {exc}") from exc

    def scalar(self, name: str, default: Optional[float] = None) -> float:
        v = self.scalars.get(name, default)
        if v is None:
            raise ConfigError(f"family {self.kind!r} needs scalar {name!r}")
        return float(v)


def build_family(spec: FamilySpec, c: float, n: int = 2) -> CoefficientFamily:
    """Instantiate a :class:`FamilySpec` over a base of curvature ``c``."""
    k = spec.kind
    if k == "trivial-flat":
        fam = trivial_family()
    elif k == "diagonal-ak":
        fam = diagonal_ak(spec.scalar("A", 1.0), spec.scalar("B", 1.0), c)
    elif k == "integrable":
        fam = integrable_norden(spec.fn("a1"), spec.fn("a3"), spec.fn("c1"), spec.fn("c3"),
                                spec.fn("d1"), spec.fn("d3"), c, spec.t_max)
    elif k == "general-ak":
        fam = ak_family(spec.fn("a1"), spec.fn("a3"), spec.scalar("c1_0"), spec.scalar("c3_0"), c,
                        spec.t_max, spec.step)
    elif k == "conformal-ak":
        fam = conformal_ak_family(spec.fn("a1"), spec.fn("a3"), spec.fn("c1"), spec.fn("c3"), c, spec.t_max)
    elif k == "quasi-ak":
        fam, _ = quasi_ak_family(*(spec.scalar(f"{s}_0") for s in QUASI_STATE), spec.fn("b1"), spec.fn("b3"),
                                 c, spec.t_max, spec.step, n)
    elif k == "generic":
        fam = generic_norden(c)
    else:
        fns = {name: spec.fn(name) for name in ("a1", "a3", "b1", "b3", "c1", "c3", "d1", "d3")}
        fam = complete_norden(**fns, c=c, t_max=spec.t_max)
    for name, delta in sorted(spec.perturb.items()):
        if name not in NAMES:
            raise ConfigError(f"cannot perturb unknown coefficient {name!r}")
        if name in ("a2", "b2", "c2", "d2"):
            fam = fam.replace(**{name: fam.functions[name] + delta})
        else:
            fam = perturb(fam, name, delta)
    # scaling skips re-completion on purpose: it is how broken configs are made
    for name, factor in sorted(spec.scale.items()):
        if name not in NAMES:
            raise ConfigError(f"cannot scale unknown coefficient {name!r}")
        fam = fam.replace(**{name: fam.functions[name] * factor})
    return fam
