"""The lifted pair (J, G) on TM in the adapted frame.

Basis order is ``(delta_1..delta_n, d/dy^1..d/dy^n)`` throughout.  With
``g0 = g y`` (so ``g0_i = y^h g_hi``) the structure is

    J delta_i = (a1 delta^h_i + b1 y^h g0_i) d_h - (a3 delta^h_i + b3 y^h g0_i) delta_h
    J d_i     = (a3 delta^h_i + b3 y^h g0_i) d_h - (a2 delta^h_i + b2 y^h g0_i) delta_h

    G(delta_i, delta_j) = c1 g_ij + d1 g0_i g0_j
    G(d_i, d_j)         = c2 g_ij + d2 g0_i g0_j
    G(d_i, delta_j)     = c3 g_ij + d3 g0_i g0_j
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence

import numpy as np

from .errors import DegenerateMetricError, DomainError
from .scalarfn import Constant, Derived, ScalarFn, T, as_fn, jets_at
from .spaceform import BasePointData, SpaceForm, metric_at

NAMES = ("a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3", "d1", "d2", "d3")

ANALYTIC_TOL = 1e-9
TABULATED_TOL = 1e-6


def _uses_tables(fn: ScalarFn, seen=None) -> bool:
    seen = set() if seen is None else seen
    if id(fn) in seen:
        return False
    seen.add(id(fn))
    if fn.kind == "ode-table":
        return True
    children = [getattr(fn, a) for a in ("arg", "left", "right", "root") if hasattr(fn, a)]
    return any(_uses_tables(ch, seen) for ch in children)


@dataclass(frozen=True)
class CoefficientFamily:
    """The twelve coefficient functions of (J, G); ``a4 = -a3``, ``b4 = -b3``."""

    a1: ScalarFn
    a2: ScalarFn
    a3: ScalarFn
    b1: ScalarFn
    b2: ScalarFn
    b3: ScalarFn
    c1: ScalarFn
    c2: ScalarFn
    c3: ScalarFn
    d1: ScalarFn
    d2: ScalarFn
    d3: ScalarFn
    label: str = "custom"

    @classmethod
    def from_mapping(cls, fns: Dict[str, object], label: str = "custom") -> "CoefficientFamily":
        missing = [k for k in NAMES if k not in fns]
        if missing:
            raise KeyError(f"missing coefficients: {', '.join(missing)}")
        return cls(**{k: as_fn(fns[k]) for k in NAMES}, label=label)

    @property
    def functions(self) -> Dict[str, ScalarFn]:
        return {k: getattr(self, k) for k in NAMES}

    @property
    def t_max(self) -> float:
        return min(f.t_max for f in self.functions.values())

    @property
    def tabulated(self) -> bool:
        return any(_uses_tables(f) for f in self.functions.values())

    @property
    def tolerance(self) -> float:
        return TABULATED_TOL if self.tabulated else ANALYTIC_TOL

    def replace(self, **changes) -> "CoefficientFamily":
        changes = {k: (as_fn(v) if k in NAMES else v) for k, v in changes.items()}
        return dataclasses.replace(self, **changes)

    def arrays(self, t: float):
        """Values and t-derivatives of the twelve coefficients, in ``NAMES`` order."""
        jets = jets_at(self.functions.values(), t, 1)
        return (np.array([j.value for j in jets]), np.array([j.deriv for j in jets]))


class FrozenCoefficients:
    """Coefficient values and slopes pinned at one ``t0``.

    Evaluation at other ``t`` uses the tangent line, which is all a pointwise
    F computation (or its finite-difference oracle) can see.
    """

    tabulated = True

    def __init__(self, t0: float, values: Sequence[float], derivs: Sequence[float], label: str = "frozen"):
        self.t0 = float(t0)
        self.values = np.asarray(values, dtype=float)
        self.derivs = np.asarray(derivs, dtype=float)
        self.label = label
        self.t_max = math.inf

    def arrays(self, t: float):
        return self.values + (t - self.t0) * self.derivs, self.derivs.copy()


@dataclass(frozen=True)
class TangentPoint:
    x: np.ndarray
    y: np.ndarray
    t: float

    @classmethod
    def make(cls, sf: SpaceForm, x, y) -> "TangentPoint":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        g = metric_at(sf, x).g
        return cls(x=x, y=y, t=0.5 * float(y @ g @ y))


@dataclass(frozen=True)
class AdaptedFrameData:
    point: TangentPoint
    base: BasePointData
    values: np.ndarray
    J: np.ndarray
    G: np.ndarray
    H: np.ndarray

    @property
    def n(self) -> int:
        return self.point.x.size

    @property
    def H1(self) -> np.ndarray:
        return self.H[: self.n, : self.n]

    @property
    def H2(self) -> np.ndarray:
        return self.H[self.n :, self.n :]

    @property
    def H3(self) -> np.ndarray:
        return self.H[: self.n, self.n :]


def j_blocks(vals, y: np.ndarray, g0: np.ndarray) -> np.ndarray:
    """Adapted-frame matrix of J (columns are images of basis vectors)."""
    a1, a2, a3, b1, b2, b3 = vals[:6]
    n = y.size
    eye = np.eye(n)
    K = np.outer(y, g0)
    A1 = a1 * eye + b1 * K
    A2 = a2 * eye + b2 * K
    A3 = a3 * eye + b3 * K
    return np.block([[-A3, -A2], [A1, A3]])


def g_blocks(vals, g: np.ndarray, g0: np.ndarray) -> np.ndarray:
    """Adapted-frame matrix of G."""
    c1, c2, c3, d1, d2, d3 = vals[6:]
    P = np.outer(g0, g0)
    G1 = c1 * g + d1 * P
    G2 = c2 * g + d2 * P
    G3 = c3 * g + d3 * P
    return np.block([[G1, G3], [G3, G2]])


def frame_at(fam, sf: SpaceForm, p: TangentPoint) -> AdaptedFrameData:
    base = metric_at(sf, p.x)
    vals, _ = fam.arrays(p.t)
    g0 = base.g @ p.y
    J = j_blocks(vals, p.y, g0)
    G = g_blocks(vals, base.g, g0)
    scale = np.max(np.abs(G))
    det = np.linalg.det(G)
    if not abs(det) > 1e-12 * scale ** G.shape[0]:
        raise DegenerateMetricError(f"G is degenerate at t={p.t:.6g} (det={det:.3g})")
    H = np.linalg.inv(G)
    return AdaptedFrameData(point=p, base=base, values=vals, J=J, G=G, H=H)


# frame conversion -------------------------------------------------------

def frame_matrix(base: BasePointData, y: np.ndarray) -> np.ndarray:
    """Matrix E whose columns are the adapted basis vectors in coordinates.

    ``delta_i = d/dx^i - Gamma^h_0i d/dy^h`` with ``Gamma^h_0i = y^k Gamma^h_ki``.
    """
    n = y.size
    N = np.einsum("k,hki->hi", y, base.gamma)
    E = np.eye(2 * n)
    E[n:, :n] = -N
    return E


def _convert(tensor: np.ndarray, signature: str, up: np.ndarray, down: np.ndarray) -> np.ndarray:
    if tensor.ndim != len(signature):
        raise ValueError(f"signature {signature!r} does not match a rank-{tensor.ndim} tensor")
    out = tensor
    for axis, kind in enumerate(signature):
        M = up if kind == "u" else down
        out = np.moveaxis(np.tensordot(M, out, axes=([1], [axis])), 0, axis)
    return out


def adapted_to_coordinate(sf: SpaceForm, p: TangentPoint, tensor: np.ndarray, signature: str) -> np.ndarray:
    """Convert adapted-frame components to coordinate components.

    ``signature`` has one letter per index: ``u`` (vector slot) or ``d``
    (covector slot), e.g. ``"ud"`` for J and ``"dd"`` for G.
    """
    E = frame_matrix(metric_at(sf, p.x), p.y)
    Einv = np.linalg.inv(E)
    return _convert(tensor, signature, E, Einv.T)


def coordinate_to_adapted(sf: SpaceForm, p: TangentPoint, tensor: np.ndarray, signature: str) -> np.ndarray:
    E = frame_matrix(metric_at(sf, p.x), p.y)
    Einv = np.linalg.inv(E)
    return _convert(tensor, signature, Einv, E.T)


# algebraic constraints -------------------------------------------------

@dataclass
class ConstraintReport:
    residuals: Dict[str, float]
    nondegeneracy: Dict[str, float]
    tolerance: float
    samples: int

    @property
    def failures(self) -> list:
        bad = [k for k, v in self.residuals.items() if not v < self.tolerance]
        bad += [k for k, v in self.nondegeneracy.items() if not v > 1e-12]
        return bad

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {"residuals": dict(self.residuals), "nondegeneracy": dict(self.nondegeneracy),
                "tolerance": self.tolerance, "samples": self.samples,
                "passed": self.passed, "failures": self.failures}


def constraint_values(vals: np.ndarray, t: float) -> Dict[str, float]:
    a1, a2, a3, b1, b2, b3, c1, c2, c3, d1, d2, d3 = vals
    return {
        "almost-complex": a1 * a2 - 1.0 - a3 * a3,
        "almost-complex-radial": (a1 + 2 * t * b1) * (a2 + 2 * t * b2) - 1.0 - (a3 + 2 * t * b3) ** 2,
        "norden": a2 * c1 + a1 * c2 - 2 * a3 * c3,
        "norden-radial": ((a2 + 2 * t * b2) * (c1 + 2 * t * d1) + (a1 + 2 * t * b1) * (c2 + 2 * t * d2)
                  - 2 * (a3 + 2 * t * b3) * (c3 + 2 * t * d3)),
    }


def nondegeneracy_values(vals: np.ndarray, t: float) -> Dict[str, float]:
    c1, c2, c3, d1, d2, d3 = vals[6:]
    return {
        "c1c2-c3^2": c1 * c2 - c3 * c3,
        "radial": (c1 + 2 * t * d1) * (c2 + 2 * t * d2) - (c3 + 2 * t * d3) ** 2,
    }


def check_family(fam: CoefficientFamily, samples: Iterable[float], tol: Optional[float] = None) -> ConstraintReport:
    """Max residual of the almost-complex and Norden constraints over ``samples``.

    Nondegeneracy entries report the smallest absolute value seen.
    """
    samples = list(samples)
    res = {k: 0.0 for k in ("almost-complex", "almost-complex-radial", "norden", "norden-radial")}
    nd = {"c1c2-c3^2": math.inf, "radial": math.inf}
    for t in samples:
        vals, _ = fam.arrays(t)
        for k, v in constraint_values(vals, t).items():
            res[k] = max(res[k], abs(v)) if math.isfinite(v) else math.inf
        for k, v in nondegeneracy_values(vals, t).items():
            nd[k] = min(nd[k], abs(v))
    tol = fam.tolerance if tol is None else tol
    return ConstraintReport(residuals=res, nondegeneracy=nd, tolerance=tol, samples=len(samples))


# completion ------------------------------------------------------------

def _scan_zero(fn: ScalarFn, name: str, t_hi: float, points: int = 2001) -> None:
    ts = np.linspace(0.0, t_hi, points, endpoint=False)
    prev = None
    for t in ts:
        v = fn(float(t))
        if abs(v) < 1e-12:
            raise DomainError(f"{name} vanishes at t={t:.6g}")
        s = math.copysign(1.0, v)
        if prev is not None and s != prev[1]:
            raise DomainError(f"{name} changes sign between t={prev[0]:.6g} and t={t:.6g}")
        prev = (t, s)


def completion(a1, a3, b1, b3, c1, c3, d1, d3, t):
    """``(a2, b2, c2, d2)`` from the almost-complex and Norden relations.

    Duck typed: works on floats, jets and ScalarFn graphs alike.  The
    divisions by ``2t`` cancel symbolically; these expanded forms are regular
    at ``t = 0``.
    """
    w = a1 * (a1 + 2 * t * b1)
    a2 = (1 + a3 * a3) / a1
    b2 = (2 * a1 * a3 * b3 + 2 * t * a1 * b3 * b3 - b1 * (1 + a3 * a3)) / w
    c2 = (2 * a3 * c3 - a2 * c1) / a1
    d2 = (2 * a1 * (a3 * d3 + b3 * c3) + 4 * t * a1 * b3 * d3 - a1 * (a2 * d1 + b2 * c1)
          - 2 * t * a1 * b2 * d1 - b1 * (2 * a3 * c3 - a2 * c1)) / w
    return a2, b2, c2, d2


def complete_norden(a1, a3, b1, b3, c1, c3, d1, d3, c: float = 0.0,
                    t_max: Optional[float] = None, label: str = "custom",
                    scan: bool = True) -> CoefficientFamily:
    """Family whose ``a2, b2, c2, d2`` come from :func:`completion`."""
    a1, a3, b1, b3, c1, c3, d1, d3 = map(as_fn, (a1, a3, b1, b3, c1, c3, d1, d3))
    dom = min(f.t_max for f in (a1, a3, b1, b3, c1, c3, d1, d3))
    if t_max is not None:
        dom = min(dom, t_max)
    if scan:
        hi = dom if math.isfinite(dom) else 1.0
        _scan_zero(a1, "a1", hi)
        _scan_zero(a1 + 2 * T * b1, "a1+2t*b1", hi)
    a2, b2, c2, d2 = (Derived(name, fn, dom) for name, fn in
                      zip(("a2", "b2", "c2", "d2"), completion(a1, a3, b1, b3, c1, c3, d1, d3, T)))
    fam = CoefficientFamily(a1=a1, a2=a2, a3=a3, b1=b1, b2=b2, b3=b3,
                            c1=c1, c2=c2, c3=c3, d1=d1, d2=d2, d3=d3, label=label)
    return fam


def trivial_family() -> CoefficientFamily:
    one, zero = Constant(1.0), Constant(0.0)
    return CoefficientFamily(a1=one, a2=one, a3=zero, b1=zero, b2=zero, b3=zero,
                             c1=one, c2=Constant(-1.0), c3=zero, d1=zero, d2=zero, d3=zero,
                             label="trivial-flat")
