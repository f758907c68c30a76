"""Levi-Civita connection of G, the fundamental tensor F, its trace form and N_J.

Everything is computed in the induced coordinates ``z = (x, y)`` of TM.  The
coordinate components of G and J and their first derivatives are assembled
analytically: coefficient slopes enter through ``dt/dz`` and the base chart
supplies ``g, dg, Gamma, dGamma`` in closed form.  Finite differences appear
only in the ``*_fd`` oracles.

Tensor layouts (all 2n-dimensional indices):

* ``dG[a, b, k] = d_k G_ab``; ``dJ[a, b, k] = d_k J^a_b``
* ``christoffel[a, b, c] = Gamma^a_bc``
* ``F[a, b, c] = F(e_a, e_b, e_c) = G((nabla_{e_a} J) e_b, e_c)``
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, TextIO, Union

import numpy as np

from .lift import AdaptedFrameData, TangentPoint, frame_at, frame_matrix
from .spaceform import SpaceForm, metric_at, sample_chart_points

SLOT = {"X": 0, "Y": 1}  # X horizontal (delta_i), Y vertical (d/dy^i)


def relative(defect: np.ndarray, *terms: np.ndarray) -> float:
    """max|defect| / (1 + largest entry among ``terms``); ``terms`` default to ``defect``."""
    scale = max((float(np.max(np.abs(t))) for t in terms), default=None)
    if scale is None:
        scale = float(np.max(np.abs(defect)))
    return float(np.max(np.abs(defect))) / (1.0 + scale)


@dataclass(frozen=True)
class ConnectionData:
    G: np.ndarray
    dG: np.ndarray
    J: np.ndarray
    dJ: np.ndarray
    christoffel: np.ndarray
    E: np.ndarray

    def metricity_residual(self) -> float:
        nabla_G = (np.einsum("bck->kbc", self.dG)
                   - np.einsum("dkb,dc->kbc", self.christoffel, self.G)
                   - np.einsum("dkc,bd->kbc", self.christoffel, self.G))
        return relative(nabla_G, self.dG)

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.christoffel - self.christoffel.transpose(0, 2, 1))))


class FTensor:
    """F in the adapted frame, with named blocks such as ``F.block("XYX")``."""

    def __init__(self, F: np.ndarray):
        self.F = F

    @property
    def n(self) -> int:
        return self.F.shape[0] // 2

    def block(self, name: str) -> np.ndarray:
        n = self.n
        sl = [slice(SLOT[s] * n, (SLOT[s] + 1) * n) for s in name.upper()]
        return self.F[tuple(sl)]

    def blocks(self) -> dict:
        names = [a + b + c for a in "XY" for b in "XY" for c in "XY"]
        return {k: self.block(k) for k in names}

    def symmetry_residuals(self, J: np.ndarray) -> dict:
        F = self.F
        swap = F - F.transpose(0, 2, 1)
        jj = F - np.einsum("abc,bd,ce->ade", F, J, J)
        return {"F(X,Y,Z)-F(X,Z,Y)": relative(swap, F), "F(X,Y,Z)-F(X,JY,JZ)": relative(jj, F)}


@dataclass(frozen=True)
class PhiForm:
    delta: np.ndarray
    partial: np.ndarray

    @property
    def array(self) -> np.ndarray:
        return np.concatenate([self.delta, self.partial])


def _coordinate_fields(fam, sf: SpaceForm, x: np.ndarray, y: np.ndarray):
    """Coordinate components of G and J at ``(x, y)`` plus their z-derivatives."""
    n = x.size
    D = 2 * n
    base = metric_at(sf, x)
    g = base.g
    dy = np.zeros((n, D))
    dy[:, n:] = np.eye(n)
    dg = np.zeros((n, n, D))
    dg[:, :, :n] = base.dg
    dgam = np.zeros((n, n, n, D))
    dgam[..., :n] = base.dgamma

    g0 = g @ y
    dg0 = np.einsum("ijk,j->ik", dg, y) + g @ dy
    t = 0.5 * float(y @ g0)
    dt = 0.5 * np.einsum("ijk,i,j->k", dg, y, y) + g0 @ dy

    vals, ders = fam.arrays(t)
    dvals = np.outer(ders, dt)

    eye = np.eye(n)
    K = np.outer(y, g0)
    dK = np.einsum("ik,j->ijk", dy, g0) + np.einsum("i,jk->ijk", y, dg0)
    P = np.outer(g0, g0)
    dP = np.einsum("ik,j->ijk", dg0, g0) + np.einsum("i,jk->ijk", g0, dg0)

    def jblock(i_a, i_b):
        val = vals[i_a] * eye + vals[i_b] * K
        der = (np.einsum("ij,k->ijk", eye, dvals[i_a]) + np.einsum("ij,k->ijk", K, dvals[i_b])
               + vals[i_b] * dK)
        return val, der

    def gblock(i_c, i_d):
        val = vals[i_c] * g + vals[i_d] * P
        der = (np.einsum("ij,k->ijk", g, dvals[i_c]) + vals[i_c] * dg
               + np.einsum("ij,k->ijk", P, dvals[i_d]) + vals[i_d] * dP)
        return val, der

    A1, dA1 = jblock(0, 3)
    A2, dA2 = jblock(1, 4)
    A3, dA3 = jblock(2, 5)
    Ja = np.block([[-A3, -A2], [A1, A3]])
    dJa = np.zeros((D, D, D))
    dJa[:n, :n], dJa[:n, n:], dJa[n:, :n], dJa[n:, n:] = -dA3, -dA2, dA1, dA3

    G1, dG1 = gblock(6, 9)
    G2, dG2 = gblock(7, 10)
    G3, dG3 = gblock(8, 11)
    Ga = np.block([[G1, G3], [G3, G2]])
    dGa = np.zeros((D, D, D))
    dGa[:n, :n], dGa[:n, n:], dGa[n:, :n], dGa[n:, n:] = dG1, dG3, dG3, dG2

    E = frame_matrix(base, y)
    N = -E[n:, :n]
    dN = np.einsum("kd,hki->hid", dy, base.gamma) + np.einsum("k,hkid->hid", y, dgam)
    Einv = np.eye(D)
    Einv[n:, :n] = N
    dE = np.zeros((D, D, D))
    dE[n:, :n] = -dN
    dEinv = -dE

    Gc = Einv.T @ Ga @ Einv
    dGc = (np.einsum("pak,pq,qb->abk", dEinv, Ga, Einv)
           + np.einsum("pa,pqk,qb->abk", Einv, dGa, Einv)
           + np.einsum("pa,pq,qbk->abk", Einv, Ga, dEinv))
    Jc = E @ Ja @ Einv
    dJc = (np.einsum("apk,pq,qb->abk", dE, Ja, Einv)
           + np.einsum("ap,pqk,qb->abk", E, dJa, Einv)
           + np.einsum("ap,pq,qbk->abk", E, Ja, dEinv))
    return Gc, dGc, Jc, dJc, E


def _christoffel(G: np.ndarray, dG: np.ndarray) -> np.ndarray:
    H = np.linalg.inv(G)
    # lowered[d, b, c] = (d_b G_dc + d_c G_db - d_d G_bc) / 2
    lowered = 0.5 * (np.einsum("dcb->dbc", dG) + dG - np.einsum("bcd->dbc", dG))
    return np.einsum("ad,dbc->abc", H, lowered)


def christoffels_of_G(fam, sf: SpaceForm, p: TangentPoint) -> ConnectionData:
    Gc, dGc, Jc, dJc, E = _coordinate_fields(fam, sf, p.x, p.y)
    return ConnectionData(G=Gc, dG=dGc, J=Jc, dJ=dJc, christoffel=_christoffel(Gc, dGc), E=E)


def coordinate_fields_fd(fam, sf: SpaceForm, p: TangentPoint, h: float = 1e-5):
    """Central-difference derivatives of the coordinate G and J (oracle)."""
    z0 = np.concatenate([p.x, p.y])
    n = p.x.size

    def fields(z):
        Gc, _, Jc, _, _ = _coordinate_fields(fam, sf, z[:n], z[n:])
        return Gc, Jc

    Gc, Jc = fields(z0)
    dG = np.zeros(Gc.shape + (2 * n,))
    dJ = np.zeros(Jc.shape + (2 * n,))
    for k in range(2 * n):
        e = np.zeros(2 * n)
        e[k] = h
        Gp, Jp = fields(z0 + e)
        Gm, Jm = fields(z0 - e)
        dG[..., k] = (Gp - Gm) / (2 * h)
        dJ[..., k] = (Jp - Jm) / (2 * h)
    return Gc, dG, Jc, dJ


def christoffels_fd(fam, sf: SpaceForm, p: TangentPoint, h: float = 1e-5) -> ConnectionData:
    Gc, dG, Jc, dJ = coordinate_fields_fd(fam, sf, p, h)
    E = frame_matrix(metric_at(sf, p.x), p.y)
    return ConnectionData(G=Gc, dG=dG, J=Jc, dJ=dJ, christoffel=_christoffel(Gc, dG), E=E)


def _f_from_connection(conn: ConnectionData) -> np.ndarray:
    Gam, J = conn.christoffel, conn.J
    # (nabla_a J)^b_c = d_a J^b_c + Gamma^b_ad J^d_c - Gamma^d_ac J^b_d
    nablaJ = (np.einsum("bca->abc", conn.dJ)
              + np.einsum("bad,dc->abc", Gam, J)
              - np.einsum("dac,bd->abc", Gam, J))
    Fc = np.einsum("abc,be->ace", nablaJ, conn.G)
    E = conn.E
    return np.einsum("pqr,pa,qb,rc->abc", Fc, E, E, E)


def f_tensor_at(fam, sf: SpaceForm, p: TangentPoint) -> FTensor:
    return FTensor(_f_from_connection(christoffels_of_G(fam, sf, p)))


def f_tensor_fd(fam, sf: SpaceForm, p: TangentPoint, h: float = 1e-5) -> FTensor:
    return FTensor(_f_from_connection(christoffels_fd(fam, sf, p, h)))


def phi_from(F: FTensor, frame: AdaptedFrameData) -> PhiForm:
    """Trace of F over its first two slots against the inverse blocks of G."""
    n = F.n
    H1, H2, H3 = frame.H1, frame.H2, frame.H3
    full = (np.einsum("ij,ijc->c", H1, F.F[:n, :n, :])
            + np.einsum("ij,ijc->c", H3, F.F[:n, n:, :])
            + np.einsum("ij,ijc->c", H3.T, F.F[n:, :n, :])
            + np.einsum("ij,ijc->c", H2, F.F[n:, n:, :]))
    return PhiForm(delta=full[:n], partial=full[n:])


def phi_at(fam, sf: SpaceForm, p: TangentPoint) -> PhiForm:
    return phi_from(f_tensor_at(fam, sf, p), frame_at(fam, sf, p))


def _nijenhuis(J: np.ndarray, dJ: np.ndarray):
    # dJ[i, k, h] = d_h J^i_k
    t1 = np.einsum("hj,ikh->ijk", J, dJ)
    t2 = np.einsum("hk,ijh->ijk", J, dJ)
    t3 = np.einsum("ih,hkj->ijk", J, dJ)
    t4 = np.einsum("ih,hjk->ijk", J, dJ)
    return t1 - t2 - t3 + t4, (t1, t2, t3, t4)


def nijenhuis_at(fam, sf: SpaceForm, p: TangentPoint) -> np.ndarray:
    """Coordinate components ``N^i_jk`` of the Nijenhuis tensor of J."""
    _, _, Jc, dJc, _ = _coordinate_fields(fam, sf, p.x, p.y)
    return _nijenhuis(Jc, dJc)[0]


def nijenhuis_residual(fam, sf: SpaceForm, p: TangentPoint) -> float:
    _, _, Jc, dJc, _ = _coordinate_fields(fam, sf, p.x, p.y)
    N, terms = _nijenhuis(Jc, dJc)
    return relative(N, *terms)


@dataclass
class PointGeometry:
    """Everything the class identities need at one tangent point."""

    point: TangentPoint
    frame: AdaptedFrameData
    connection: ConnectionData
    F: FTensor

    @cached_property
    def phi(self) -> PhiForm:
        return phi_from(self.F, self.frame)

    @property
    def J(self) -> np.ndarray:
        return self.frame.J

    @property
    def G(self) -> np.ndarray:
        return self.frame.G

    @property
    def g0(self) -> np.ndarray:
        return self.frame.base.g @ self.point.y

    def nijenhuis(self):
        return _nijenhuis(self.connection.J, self.connection.dJ)


def geometry_at(fam, sf: SpaceForm, p: TangentPoint) -> PointGeometry:
    frame = frame_at(fam, sf, p)
    conn = christoffels_of_G(fam, sf, p)
    return PointGeometry(point=p, frame=frame, connection=conn, F=FTensor(_f_from_connection(conn)))


def sample_points(sf: SpaceForm, count: int, rng: np.random.Generator, x_radius: float = 0.5,
                  t_range=(0.0, 1.0)) -> list:
    """Random tangent points: base point in a ball, energy density uniform in ``t_range``."""
    xs = sample_chart_points(sf, count, x_radius, rng)
    out = []
    for x in xs:
        g = metric_at(sf, x).g
        u = rng.normal(size=sf.n)
        u /= np.sqrt(u @ g @ u)
        t = rng.uniform(*t_range)
        out.append(TangentPoint.make(sf, x, np.sqrt(2.0 * t) * u))
    return out


def dump_f_csv(fam, sf: SpaceForm, points: Iterable[TangentPoint], out: Union[str, TextIO]) -> None:
    """One row per point and component: coordinates, t, slot types, indices, value."""
    if isinstance(out, str):
        with open(out, "w", newline="") as fh:
            return dump_f_csv(fam, sf, points, fh)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["point", "x", "y", "t", "block", "i", "j", "k", "value"])
    for idx, p in enumerate(points):
        F = f_tensor_at(fam, sf, p)
        xs = " ".join(repr(float(v)) for v in p.x)
        ys = " ".join(repr(float(v)) for v in p.y)
        for name, blk in F.blocks().items():
            for (i, j, k), v in np.ndenumerate(blk):
                w.writerow([idx, xs, ys, repr(p.t), name, i + 1, j + 1, k + 1, repr(float(v))])
