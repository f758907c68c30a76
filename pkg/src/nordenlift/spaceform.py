"""Constant-curvature base manifolds in the conformal chart.

The metric is ``g_ij = delta_ij / phi(x)^2`` with ``phi = 1 + (c/4)|x|^2``,
which has constant sectional curvature ``c`` for either sign of ``c``.  With
``sigma = -log(phi)`` the Christoffel symbols and their derivatives have the
closed forms

    Gamma^h_ki   = delta^h_k s_i + delta^h_i s_k - delta_ki s_h
    d_j Gamma^h_ki = delta^h_k s_ij + delta^h_i s_kj - delta_ki s_hj

where ``s_i = d_i sigma`` and ``s_ij = d_i d_j sigma``.

Index layout: ``dg[i, j, k] = d_k g_ij``, ``gamma[h, k, i] = Gamma^h_ki``,
``dgamma[h, k, i, j] = d_j Gamma^h_ki``, ``riemann[h, k, i, j] = R^h_kij``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class SpaceForm:
    n: int
    c: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "c", float(self.c))

    def conformal_factor(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 1.0 + 0.25 * self.c * float(x @ x)

    def in_domain(self, x) -> bool:
        return self.conformal_factor(x) > 0.0

    def metric_at(self, x) -> "BasePointData":
        return metric_at(self, x)


@dataclass(frozen=True)
class BasePointData:
    x: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    dg: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray


def _check_point(sf: SpaceForm, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (sf.n,):
        raise ValueError(f"expected {sf.n} coordinates, got shape {x.shape}")
    if not sf.in_domain(x):
        raise DomainError(f"x={x.tolist()} outside the chart (1 + c|x|^2/4 <= 0)")
    return x


def metric_at(sf: SpaceForm, x) -> BasePointData:
    x = _check_point(sf, x)
    n, c = sf.n, sf.c
    phi = sf.conformal_factor(x)
    eye = np.eye(n)
    g = eye / phi**2
    g_inv = eye * phi**2
    # d_k g_ij = -c x_k / phi^3 delta_ij
    dg = np.einsum("ij,k->ijk", eye, -c * x / phi**3)
    s1 = -0.5 * c * x / phi
    s2 = -0.5 * c * eye / phi + 0.25 * c * c * np.outer(x, x) / phi**2
    gamma = (np.einsum("hk,i->hki", eye, s1) + np.einsum("hi,k->hki", eye, s1)
             - np.einsum("ki,h->hki", eye, s1))
    dgamma = (np.einsum("hk,ij->hkij", eye, s2) + np.einsum("hi,kj->hkij", eye, s2)
              - np.einsum("ki,hj->hkij", eye, s2))
    return BasePointData(x=x, g=g, g_inv=g_inv, dg=dg, gamma=gamma, dgamma=dgamma)


def riemann_from(data: BasePointData) -> np.ndarray:
    """``R^h_kij = d_i Gamma^h_jk - d_j Gamma^h_ik + Gamma^h_il Gamma^l_jk - Gamma^h_jl Gamma^l_ik``."""
    G, dG = data.gamma, data.dgamma
    # dG[h, j, k, i] = d_i Gamma^h_jk
    term1 = np.einsum("hjki->hkij", dG)
    term2 = np.einsum("hikj->hkij", dG)
    term3 = np.einsum("hil,ljk->hkij", G, G)
    term4 = np.einsum("hjl,lik->hkij", G, G)
    return term1 - term2 + term3 - term4


def curvature_formula(sf: SpaceForm, g: np.ndarray) -> np.ndarray:
    """Right-hand side ``c (delta^h_i g_kj - delta^h_j g_ki)``."""
    eye = np.eye(sf.n)
    return sf.c * (np.einsum("hi,kj->hkij", eye, g) - np.einsum("hj,ki->hkij", eye, g))


def curvature_at(sf: SpaceForm, x) -> np.ndarray:
    return riemann_from(metric_at(sf, x))


def curvature_residual(sf: SpaceForm, x) -> float:
    data = metric_at(sf, x)
    return float(np.max(np.abs(riemann_from(data) - curvature_formula(sf, data.g))))


def ricci_at(sf: SpaceForm, x) -> np.ndarray:
    """``Ric_kj = R^h_khj``; equals ``c (n-1) g`` on a space form."""
    return np.einsum("hkhj->kj", curvature_at(sf, x))


def metricity_residual(data: BasePointData) -> float:
    """max |d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il|."""
    res = (np.einsum("ijk->kij", data.dg)
           - np.einsum("lki,lj->kij", data.gamma, data.g)
           - np.einsum("lkj,il->kij", data.gamma, data.g))
    return float(np.max(np.abs(res)))


def sample_chart_points(sf: SpaceForm, count: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform points in the ball of the given Euclidean radius, kept inside the chart."""
    pts = []
    while len(pts) < count:
        v = rng.normal(size=sf.n)
        v *= radius * rng.uniform() ** (1.0 / sf.n) / np.linalg.norm(v)
        if sf.in_domain(v) and sf.conformal_factor(v) > 1e-3:
            pts.append(v)
    return np.array(pts)
