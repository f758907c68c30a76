"""Truncated Taylor jets in one variable.

A jet of order ``k`` stores the normalized Taylor coefficients
``f(t0), f'(t0), f''(t0)/2!, ..., f^(k)(t0)/k!`` of a smooth function at a
point.  Arithmetic propagates them exactly (up to rounding), so an order-1 jet
is a dual number and higher orders come for free where a derived coefficient
needs the derivative of a derivative.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence, Union

from ..errors import DomainError, JetDivisionError

#: Divisors with |value| below this are refused.
DIVISION_FLOOR = 1e-12

Number = Union[int, float]


class Jet:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[float]):
        self.coeffs = tuple(float(c) for c in coeffs)
        if not self.coeffs:
            raise ValueError("a jet needs at least one coefficient")

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, value: float, order: int = 1) -> "Jet":
        return cls((value,) + (0.0,) * order)

    @classmethod
    def variable(cls, value: float, order: int = 1) -> "Jet":
        """Jet of the identity function ``t`` at ``t = value``."""
        if order == 0:
            return cls((value,))
        return cls((value, 1.0) + (0.0,) * (order - 1))

    @classmethod
    def from_derivatives(cls, derivs: Sequence[float]) -> "Jet":
        return cls(d / math.factorial(k) for k, d in enumerate(derivs))

    # accessors --------------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self) -> float:
        return self.coeffs[0]

    @property
    def deriv(self) -> float:
        """First derivative (0 for an order-0 jet)."""
        return self.coeffs[1] if len(self.coeffs) > 1 else 0.0

    def derivative(self, k: int) -> float:
        """k-th derivative at the expansion point."""
        if k > self.order:
            raise ValueError(f"jet of order {self.order} has no derivative {k}")
        return self.coeffs[k] * math.factorial(k)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.coeffs[: order + 1])

    def diff(self) -> "Jet":
        """Jet of the derivative; the order drops by one."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet((k + 1) * c for k, c in enumerate(self.coeffs[1:]))

    def integrate(self, value: float) -> "Jet":
        """Antiderivative jet with the given constant term; order rises by one."""
        return Jet((value,) + tuple(c / (k + 1) for k, c in enumerate(self.coeffs)))

    # helpers ----------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        if isinstance(other, (int, float)):
            return Jet.constant(float(other), self.order)
        return NotImplemented

    @staticmethod
    def _align(a: "Jet", b: "Jet"):
        n = min(len(a.coeffs), len(b.coeffs))
        return a.coeffs[:n], b.coeffs[:n]

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._align(self, other)
        return Jet(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return Jet(-c for c in self.coeffs)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._align(self, other)
        return Jet(x - y for x, y in zip(a, b))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Jet(c * other for c in self.coeffs)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._align(self, other)
        return Jet(sum(a[j] * b[k - j] for j in range(k + 1)) for k in range(len(a)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._align(self, other)
        b0 = b[0]
        if not abs(b0) >= DIVISION_FLOOR:
            raise JetDivisionError(f"division by jet with value {b0!r}")
        h: list[float] = []
        for k in range(len(a)):
            h.append((a[k] - sum(b[j] * h[k - j] for j in range(1, k + 1))) / b0)
        return Jet(h)

    def __rtruediv__(self, other):
        return Jet.constant(float(other), self.order) / self

    def __pow__(self, p):
        if isinstance(p, Jet):
            if p.order == 0 or all(c == 0.0 for c in p.coeffs[1:]):
                return self ** p.value
            return exp(p * log(self))
        if isinstance(p, int) or (isinstance(p, float) and p.is_integer() and abs(p) < 64):
            return _int_power(self, int(p))
        return _real_power(self, float(p))

    def __rpow__(self, base):
        if not isinstance(base, (int, float)) or base <= 0:
            raise DomainError(f"power base must be positive, got {base!r}")
        return exp(self * math.log(base))

    # comparison helpers used by tests ---------------------------------
    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Jet({', '.join(f'{c:.12g}' for c in self.coeffs)})"


def _int_power(f: Jet, p: int) -> Jet:
    if p < 0:
        return 1.0 / _int_power(f, -p)
    result = Jet.constant(1.0, f.order)
    base = f
    while p:
        if p & 1:
            result = result * base
        p >>= 1
        if p:
            base = base * base
    return result


def _real_power(f: Jet, p: float) -> Jet:
    f0 = f.value
    if f0 <= 0.0:
        raise DomainError(f"non-integer power {p} of non-positive value {f0!r}")
    a = f.coeffs
    h = [f0**p]
    for k in range(1, len(a)):
        s = sum(((p + 1.0) * j - k) * a[j] * h[k - j] for j in range(1, k + 1))
        h.append(s / (k * f0))
    return Jet(h)


def sqrt(f) -> Jet:
    if not isinstance(f, Jet):
        f = Jet.constant(float(f), 0)
    if f.value <= 0.0 and f.order > 0:
        raise DomainError(f"sqrt is not differentiable at {f.value!r}")
    if f.value < 0.0:
        raise DomainError(f"sqrt of negative value {f.value!r}")
    if f.order == 0:
        return Jet((math.sqrt(f.value),))
    return _real_power(f, 0.5)


def exp(f) -> Jet:
    if not isinstance(f, Jet):
        f = Jet.constant(float(f), 0)
    a = f.coeffs
    h = [math.exp(a[0])]
    for k in range(1, len(a)):
        h.append(sum(j * a[j] * h[k - j] for j in range(1, k + 1)) / k)
    return Jet(h)


def log(f) -> Jet:
    if not isinstance(f, Jet):
        f = Jet.constant(float(f), 0)
    a = f.coeffs
    if a[0] <= 0.0:
        raise DomainError(f"log of non-positive value {a[0]!r}")
    h = [math.log(a[0])]
    for k in range(1, len(a)):
        s = sum(j * h[j] * a[k - j] for j in range(1, k))
        h.append((a[k] - s / k) / a[0])
    return Jet(h)
