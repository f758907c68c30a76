"""Fixed-step RK4 with cubic Hermite dense output.

The right-hand side works on jets: ``rhs(t, state)`` receives one jet per
state component, all of the same order ``k``, and returns the derivative jets
at order ``k``.  RK4 calls it with order-0 jets.  Evaluating a table at an
arbitrary order then runs the Taylor recursion on the interpolated state, so
the first derivative channel is exactly ``rhs`` at the interpolated state.
"""

from __future__ import annotations

import csv
import math
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Union

import numpy as np

from ..errors import IntegrationError, JetDivisionError, DomainError
from .core import ScalarFn
from .jet import Jet

Rhs = Callable[[float, Sequence[Jet]], Sequence[Jet]]
Guard = Callable[[float, np.ndarray], float]

GUARD_FLOOR = 1e-12


class OdeSolution:
    """Node values and slopes of one integration run (shared by its tables)."""

    def __init__(self, rhs: Rhs, ts: np.ndarray, ys: np.ndarray, fs: np.ndarray,
                 t_max: float, names: Sequence[str], max_order: Optional[int]):
        self.rhs = rhs
        self.ts = ts
        self.ys = ys
        self.fs = fs
        self.t_max = t_max
        self.names = tuple(names)
        self.max_order = max_order
        self.step = float(ts[1] - ts[0]) if len(ts) > 1 else 0.0

    def interpolate(self, t: float) -> np.ndarray:
        """Cubic Hermite interpolation of the state."""
        if not 0.0 <= t <= self.ts[-1]:
            raise DomainError(f"t={t!r} outside integrated range [0, {self.ts[-1]:g}]")
        if len(self.ts) == 1:
            return self.ys[0].copy()
        k = min(int(t / self.step), len(self.ts) - 2)
        h = self.step
        s = (t - self.ts[k]) / h
        if s == 0.0:
            return self.ys[k].copy()
        s2, s3 = s * s, s * s * s
        h00 = 2 * s3 - 3 * s2 + 1
        h10 = s3 - 2 * s2 + s
        h01 = -2 * s3 + 3 * s2
        h11 = s3 - s2
        return (h00 * self.ys[k] + h10 * h * self.fs[k]
                + h01 * self.ys[k + 1] + h11 * h * self.fs[k + 1])

    def state_jets(self, t: float, order: int) -> List[Jet]:
        y = [Jet((v,)) for v in self.interpolate(t)]
        for k in range(order):
            f = self.rhs(t, y)
            y = [fi.truncate(k).integrate(yi.value) for fi, yi in zip(f, y)]
        return y


class OdeTable(ScalarFn):
    """One component of an :class:`OdeSolution`."""

    kind = "ode-table"

    def __init__(self, solution: OdeSolution, index: int):
        super().__init__(solution.t_max)
        self.solution = solution
        self.index = index
        self.name = solution.names[index]
        self.max_order = solution.max_order

    def check_domain(self, t: float) -> None:
        # the last node is integrated, so the closed interval is available
        if t != self.t_max:
            super().check_domain(t)

    def _compute(self, t, order, cache):
        key = (id(self.solution), order)
        jets = cache.get(key)
        if jets is None:
            jets = self.solution.state_jets(t, order)
            cache[key] = jets
        return jets[self.index]

    def __repr__(self):
        return f"OdeTable({self.name!r})"


def _float_rhs(rhs: Rhs) -> Callable[[float, np.ndarray], np.ndarray]:
    def f(t: float, y: np.ndarray) -> np.ndarray:
        try:
            out = rhs(t, [Jet((v,)) for v in y])
        except (JetDivisionError, DomainError) as exc:
            raise IntegrationError(f"right-hand side failed: {exc}", t) from exc
        vals = np.array([j.value for j in out], dtype=float)
        if not np.all(np.isfinite(vals)):
            raise IntegrationError("non-finite right-hand side", t)
        return vals

    return f


def integrate_ode(rhs: Rhs, state0: Sequence[float], t_max: float, step: float,
                  names: Optional[Sequence[str]] = None, guards: Sequence[Guard] = (),
                  max_order: Optional[int] = None) -> List[OdeTable]:
    """Integrate ``y' = rhs(t, y)`` from ``t = 0`` to ``t_max`` with classical RK4.

    The grid is uniform; if ``t_max`` is not a multiple of ``step`` the step
    is shrunk slightly so the last node lands on ``t_max``.  Each guard is a
    scalar function of ``(t, y)`` (typically a denominator) that must keep its
    sign and stay away from zero; a violation raises :class:`IntegrationError`.
    """
    if not step > 0.0:
        raise ValueError("step must be positive")
    if not t_max > 0.0:
        raise ValueError("t_max must be positive")
    y = np.asarray(state0, dtype=float).copy()
    m = y.size
    names = list(names) if names is not None else [f"y{i}" for i in range(m)]
    if len(names) != m:
        raise ValueError("one name per state component")
    nsteps = max(1, int(math.ceil(t_max / step - 1e-9)))
    h = t_max / nsteps
    f = _float_rhs(rhs)

    ts = np.linspace(0.0, t_max, nsteps + 1)
    ys = np.empty((nsteps + 1, m))
    fs = np.empty((nsteps + 1, m))
    ys[0] = y
    fs[0] = f(0.0, y)
    signs = [_check_guard(g, 0.0, y, None) for g in guards]
    for k in range(nsteps):
        t = ts[k]
        k1 = fs[k]
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[k + 1] = y
        fs[k + 1] = f(ts[k + 1], y)
        signs = [_check_guard(g, ts[k + 1], y, s) for g, s in zip(guards, signs)]
    sol = OdeSolution(rhs, ts, ys, fs, t_max, names, max_order)
    return [OdeTable(sol, i) for i in range(m)]


def _check_guard(guard: Guard, t: float, y: np.ndarray, sign: Optional[float]) -> float:
    g = guard(t, y)
    name = getattr(guard, "__name__", "guard")
    if not math.isfinite(g) or abs(g) < GUARD_FLOOR:
        raise IntegrationError(f"{name} vanishes", t)
    s = math.copysign(1.0, g)
    if sign is not None and s != sign:
        raise IntegrationError(f"{name} changes sign", t)
    return s


def write_csv(fns: Dict[str, ScalarFn], ts: Sequence[float], out: Union[str, TextIO]) -> None:
    """Tabulate value and first derivative of each function on ``ts``.

    Columns: ``t``, then ``<name>`` and ``<name>_deriv`` for every function.
    """
    header = ["t"]
    for name in fns:
        header += [name, f"{name}_deriv"]
    rows = []
    for t in ts:
        row = [repr(float(t))]
        for fn in fns.values():
            j = fn.jet(float(t), 1)
            row += [repr(j.value), repr(j.deriv)]
        rows.append(row)
    if isinstance(out, str):
        with open(out, "w", newline="") as fh:
            _emit(fh, header, rows)
    else:
        _emit(out, header, rows)


def _emit(fh: TextIO, header, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def read_csv(src: Union[str, TextIO]) -> Dict[str, np.ndarray]:
    """Inverse of :func:`write_csv`: column name to float array."""
    if isinstance(src, str):
        with open(src, newline="") as fh:
            return read_csv(fh)
    reader = csv.reader(src)
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    data = data.reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def table_nodes(table: OdeTable) -> np.ndarray:
    return table.solution.ts
