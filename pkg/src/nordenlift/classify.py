"""Membership in the eight almost-Norden classes by residual testing.

Every identity is multilinear, so evaluating it on the adapted basis is
complete; the arrays below hold all ``(2n)^3`` triples at once.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .connection import PointGeometry, geometry_at, relative, sample_points
from .errors import InconsistencyError
from .lift import TangentPoint
from .spaceform import SpaceForm

CLASSES = ("AK", "w1", "w2", "w3", "w1+w2", "w1+w3", "w2+w3", "w1+w2+w3")
DISPLAY = {"AK": "anti-Kähler", "w1": "ω₁", "w2": "ω₂", "w3": "ω₃", "w1+w2": "ω₁⊕ω₂",
           "w1+w3": "ω₁⊕ω₃", "w2+w3": "ω₂⊕ω₃", "w1+w2+w3": "ω₁⊕ω₂⊕ω₃"}
# direct superclasses
INCLUSIONS = {
    "AK": ("w1", "w2", "w3"),
    "w1": ("w1+w2", "w1+w3"),
    "w2": ("w1+w2", "w2+w3"),
    "w3": ("w1+w3", "w2+w3"),
    "w1+w2": ("w1+w2+w3",),
    "w1+w3": ("w1+w2+w3",),
    "w2+w3": ("w1+w2+w3",),
    "w1+w2+w3": (),
}

MEMBER_ANALYTIC = 1e-6
MEMBER_TABULATED = 1e-4
REJECT = 1e-3
THREADS_ENV = "NORDENLIFT_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _cyc(A: np.ndarray) -> tuple:
    """``A[x,y,z]``, ``A[y,z,x]``, ``A[z,x,y]`` as arrays indexed by ``(x,y,z)``."""
    return A, np.transpose(A, (2, 0, 1)), np.transpose(A, (1, 2, 0))


def _pieces(geo: PointGeometry):
    F = geo.F.F
    G, J = geo.G, geo.J
    phi = geo.phi.array
    GJ = G @ J  # G(X, JY)
    phiJ = phi @ J  # Phi(JZ)
    return F, G, J, GJ, phi, phiJ


def defect_ak(geo: PointGeometry) -> float:
    return relative(geo.F.F)


def defect_w1(geo: PointGeometry) -> float:
    F, G, J, GJ, phi, phiJ = _pieces(geo)
    n = geo.frame.n
    lhs = 2 * n * F
    t1 = np.einsum("xy,z->xyz", GJ, phiJ)
    t2 = np.einsum("xz,y->xyz", GJ, phiJ)
    t3 = np.einsum("xy,z->xyz", G, phi)
    t4 = np.einsum("xz,y->xyz", G, phi)
    return relative(lhs - t1 - t2 - t3 - t4, lhs, t1, t2, t3, t4)


def defect_w1w2(geo: PointGeometry) -> float:
    F, _, J, *_ = _pieces(geo)
    FJ = np.einsum("xya,az->xyz", F, J)  # F(X, Y, JZ)
    a, b, c = _cyc(FJ)
    return relative(a + b + c, a)


def defect_w3(geo: PointGeometry) -> float:
    a, b, c = _cyc(geo.F.F)
    return relative(a + b + c, a)


def defect_w2w3(geo: PointGeometry) -> float:
    return relative(geo.phi.array, geo.F.F)


def defect_w1w3(geo: PointGeometry) -> float:
    F, G, J, GJ, phi, phiJ = _pieces(geo)
    n = geo.frame.n
    a, b, c = _cyc(F)
    lhs = n * (a + b + c)
    terms = (np.einsum("xy,z->xyz", G, phi), np.einsum("zx,y->xyz", G, phi), np.einsum("yz,x->xyz", G, phi),
             np.einsum("xy,z->xyz", GJ, phiJ), np.einsum("yz,x->xyz", GJ, phiJ),
             np.einsum("zx,y->xyz", GJ, phiJ))
    return relative(lhs - sum(terms), n * a, *terms)


def defect_norden(geo: PointGeometry) -> float:
    J, G = geo.J, geo.G
    I = np.eye(J.shape[0])
    return max(relative(J @ J + I, I), relative(J.T @ G @ J + G, G))


def point_defects(geo: PointGeometry) -> Dict[str, float]:
    d = {
        "AK": defect_ak(geo),
        "w1": defect_w1(geo),
        "w3": defect_w3(geo),
        "w1+w2": defect_w1w2(geo),
        "w1+w3": defect_w1w3(geo),
        "w2+w3": defect_w2w3(geo),
        "w1+w2+w3": defect_norden(geo),
    }
    d["w2"] = max(d["w1+w2"], d["w2+w3"])
    return d


def phi_projection(geo: PointGeometry):
    """Fit ``Phi(delta_k) = f g0_k``; returns ``(f, relative off-component residual)``."""
    pd, g0 = geo.phi.delta, geo.g0
    nrm = float(g0 @ g0)
    f = float(pd @ g0) / nrm if nrm > 0 else 0.0
    return f, relative(pd - f * g0, pd)


def geometries(fam, sf: SpaceForm, points: Sequence[TangentPoint]) -> List[PointGeometry]:
    workers = thread_count()
    if workers == 1 or len(points) < 2:
        return [geometry_at(fam, sf, p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda p: geometry_at(fam, sf, p), points))


def _max_over(fn, fam, sf, points) -> float:
    return max((fn(g) for g in geometries(fam, sf, points)), default=0.0)


def residual_AK(fam, sf, points) -> float:
    return _max_over(defect_ak, fam, sf, points)


def residual_w1(fam, sf, points) -> float:
    return _max_over(defect_w1, fam, sf, points)


def residual_w1w2(fam, sf, points) -> float:
    return _max_over(defect_w1w2, fam, sf, points)


def residual_w3(fam, sf, points) -> float:
    return _max_over(defect_w3, fam, sf, points)


def residual_w2w3(fam, sf, points) -> float:
    return _max_over(defect_w2w3, fam, sf, points)


def residual_w2(fam, sf, points) -> float:
    return _max_over(lambda g: max(defect_w1w2(g), defect_w2w3(g)), fam, sf, points)


def residual_w1w3(fam, sf, points) -> float:
    return _max_over(defect_w1w3, fam, sf, points)


def residual_norden(fam, sf, points) -> float:
    return _max_over(defect_norden, fam, sf, points)


# sampling and report --------------------------------------------------------

@dataclass(frozen=True)
class Sampling:
    num_points: int = 20
    seed: int = 0
    x_radius: float = 0.5
    y_radius: float = 1.0

    def points(self, sf: SpaceForm, t_max: float = np.inf) -> List[TangentPoint]:
        """Points with ``|x| <= x_radius`` and ``t`` kept inside ``[0, t_max)``."""
        t_hi = min(0.5 * self.y_radius ** 2, 0.999 * t_max)
        rng = np.random.default_rng(self.seed)
        return sample_points(sf, self.num_points, rng, self.x_radius, (0.0, t_hi))


@dataclass(frozen=True)
class ClassResult:
    residual: float
    member: Optional[bool]  # None: inconclusive
    samples: int

    def as_dict(self) -> dict:
        return {"residual": self.residual, "member": self.member, "samples": self.samples}


@dataclass(frozen=True)
class ClassReport:
    classes: Dict[str, ClassResult]
    tolerance: float
    reject: float
    family: str = ""

    @property
    def members(self) -> List[str]:
        return [k for k in CLASSES if self.classes[k].member]

    @property
    def inconclusive(self) -> List[str]:
        return [k for k in CLASSES if self.classes[k].member is None]

    @property
    def minimal(self) -> List[str]:
        mem = set(self.members)
        return [k for k in CLASSES if k in mem and not any(s in mem for s in _subclasses(k))]

    @property
    def verdict(self) -> str:
        if self.classes["w1+w2+w3"].member is not True:
            return "not Norden" if self.classes["w1+w2+w3"].member is False else "inconclusive"
        low = self.minimal
        if low == ["AK"]:
            return "anti-Kähler"
        if low == ["w1+w2+w3"]:
            return "generic Norden (ω₁⊕ω₂⊕ω₃ only)"
        return " and ".join(f"strictly {DISPLAY[k]}" for k in low)

    def as_dict(self) -> dict:
        return {"classes": {k: self.classes[k].as_dict() for k in CLASSES},
                "tolerance": self.tolerance, "reject": self.reject, "family": self.family,
                "verdict": self.verdict, "inconclusive": self.inconclusive}


def _subclasses(k: str) -> List[str]:
    out = []
    for sub, sups in INCLUSIONS.items():
        if k in sups:
            out += [sub] + _subclasses(sub)
    return out


def _verdict(r: float, tol: float, reject: float) -> Optional[bool]:
    if r <= tol:
        return True
    if r > reject:
        return False
    return None


def check_lattice(classes: Dict[str, ClassResult]) -> None:
    """Raise if a member class has a definitely-not-member superclass."""
    for sub, sups in INCLUSIONS.items():
        if classes[sub].member is not True:
            continue
        for sup in sups:
            if classes[sup].member is False:
                raise InconsistencyError(
                    f"{DISPLAY[sub]} holds (residual {classes[sub].residual:.3g}) but "
                    f"{DISPLAY[sup]} fails (residual {classes[sup].residual:.3g})")


def default_tolerance(fam) -> float:
    return MEMBER_TABULATED if getattr(fam, "tabulated", False) else MEMBER_ANALYTIC


def classify_geometries(geos: Iterable[PointGeometry], tol: float, reject: float = REJECT,
                        family: str = "") -> ClassReport:
    worst = {k: 0.0 for k in CLASSES}
    count = 0
    for g in geos:
        count += 1
        for k, v in point_defects(g).items():
            worst[k] = max(worst[k], v)
    classes = {k: ClassResult(worst[k], _verdict(worst[k], tol, reject), count) for k in CLASSES}
    if classes["w1+w2+w3"].member is False:
        # every class is a subclass of Norden structures; the identities alone say nothing here
        classes = {k: ClassResult(r.residual, False, count) for k, r in classes.items()}
    check_lattice(classes)
    return ClassReport(classes=classes, tolerance=tol, reject=reject, family=family)


def classify(fam, sf: SpaceForm, sampling: Sampling = Sampling(), tol: Optional[float] = None,
             reject: float = REJECT) -> ClassReport:
    tol = default_tolerance(fam) if tol is None else tol
    pts = sampling.points(sf, fam.t_max)
    return classify_geometries(geometries(fam, sf, pts), tol, reject, getattr(fam, "label", ""))
