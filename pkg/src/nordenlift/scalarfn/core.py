"""Smooth functions of the energy density, evaluated as Taylor jets.

Every :class:`ScalarFn` is an immutable node in a small expression graph.
Arithmetic on ScalarFn objects builds new nodes, ``f.d`` is the derivative
node, and ``f.jet(t, order)`` walks the graph once with a per-call memo so
shared sub-expressions are evaluated a single time.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, Optional, Tuple

from ..errors import DomainError, JetDivisionError
from . import jet as _jet
from .jet import Jet

_Cache = Dict[Tuple[int, int], Jet]

KINDS = ("expression", "constant", "ode-table", "derived-composite")


class ScalarFn:
    """A smooth real function of ``t`` on ``[0, t_max)``."""

    kind = "derived-composite"
    #: Highest jet order this node can produce (None means unbounded).
    max_order: Optional[int] = None

    def __init__(self, t_max: float = math.inf):
        self.t_max = float(t_max)

    # evaluation -------------------------------------------------------
    def check_domain(self, t: float) -> None:
        if not 0.0 <= t < self.t_max:
            raise DomainError(f"t={t!r} outside domain [0, {self.t_max:g})")

    def jet(self, t: float, order: int = 1) -> Jet:
        t = float(t)
        self.check_domain(t)
        if self.max_order is not None and order > self.max_order:
            raise ValueError(f"{self!r} supports jets up to order {self.max_order}")
        return self._eval(t, order, {})

    def __call__(self, t: float) -> float:
        return self.jet(t, 0).value

    def _eval(self, t: float, order: int, cache: _Cache) -> Jet:
        key = (id(self), order)
        hit = cache.get(key)
        if hit is None:
            hit = self._compute(t, order, cache)
            cache[key] = hit
        return hit

    def _compute(self, t: float, order: int, cache: _Cache) -> Jet:
        raise NotImplementedError

    # graph building ---------------------------------------------------
    @property
    def d(self) -> "ScalarFn":
        """Derivative with respect to t."""
        return Derivative(self)

    def __add__(self, other):
        return Binary("+", self, as_fn(other))

    def __radd__(self, other):
        return Binary("+", as_fn(other), self)

    def __sub__(self, other):
        return Binary("-", self, as_fn(other))

    def __rsub__(self, other):
        return Binary("-", as_fn(other), self)

    def __mul__(self, other):
        return Binary("*", self, as_fn(other))

    def __rmul__(self, other):
        return Binary("*", as_fn(other), self)

    def __truediv__(self, other):
        return Binary("/", self, as_fn(other))

    def __rtruediv__(self, other):
        return Binary("/", as_fn(other), self)

    def __pow__(self, other):
        return Binary("^", self, as_fn(other))

    def __neg__(self):
        return Unary("neg", self)


def as_fn(value) -> ScalarFn:
    if isinstance(value, ScalarFn):
        return value
    if isinstance(value, (int, float)):
        return Constant(value)
    raise TypeError(f"cannot use {type(value).__name__} as a ScalarFn")


class Constant(ScalarFn):
    kind = "constant"

    def __init__(self, value: float, t_max: float = math.inf):
        super().__init__(t_max)
        self.value = float(value)

    def _compute(self, t, order, cache):
        return Jet.constant(self.value, order)

    def __repr__(self):
        return f"Constant({self.value!r})"


class Variable(ScalarFn):
    """The energy density itself."""

    def _compute(self, t, order, cache):
        return Jet.variable(t, order)

    def __repr__(self):
        return "t"


T = Variable()

_UNARY: Dict[str, Callable[[Jet], Jet]] = {
    "neg": lambda j: -j,
    "sqrt": _jet.sqrt,
    "exp": _jet.exp,
    "log": _jet.log,
}


class Unary(ScalarFn):
    def __init__(self, op: str, arg: ScalarFn):
        super().__init__(arg.t_max)
        self.op = op
        self.arg = arg
        self.max_order = arg.max_order
        self._fn = _UNARY[op]

    def _compute(self, t, order, cache):
        return self._fn(self.arg._eval(t, order, cache))

    def __repr__(self):
        return f"{self.op}({self.arg!r})"


class Binary(ScalarFn):
    def __init__(self, op: str, left: ScalarFn, right: ScalarFn):
        super().__init__(min(left.t_max, right.t_max))
        self.op = op
        self.left = left
        self.right = right
        orders = [o for o in (left.max_order, right.max_order) if o is not None]
        self.max_order = min(orders) if orders else None

    def _compute(self, t, order, cache):
        if self.op == "^" and isinstance(self.right, Constant):
            return self.left._eval(t, order, cache) ** self.right.value
        a = self.left._eval(t, order, cache)
        b = self.right._eval(t, order, cache)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        return a**b

    def __repr__(self):
        return f"({self.left!r} {self.op} {self.right!r})"


class Derivative(ScalarFn):
    def __init__(self, arg: ScalarFn):
        super().__init__(arg.t_max)
        self.arg = arg
        self.max_order = None if arg.max_order is None else arg.max_order - 1

    def _compute(self, t, order, cache):
        return self.arg._eval(t, order + 1, cache).diff()

    def __repr__(self):
        return f"d({self.arg!r})"


class Expression(ScalarFn):
    """A parsed expression; see :func:`nordenlift.scalarfn.parse_expr`."""

    kind = "expression"

    def __init__(self, src: str, root: ScalarFn, t_max: float = math.inf):
        super().__init__(min(t_max, root.t_max))
        self.src = src
        self.root = root
        self.max_order = root.max_order

    def _compute(self, t, order, cache):
        return self.root._eval(t, order, cache)

    def __repr__(self):
        return f"Expression({self.src!r})"


class Derived(ScalarFn):
    """A named composite built from other ScalarFn objects.

    Division failures inside the recipe are re-raised with the name and the
    offending ``t`` so a vanishing denominator is easy to locate.
    """

    kind = "derived-composite"

    def __init__(self, name: str, root: ScalarFn, t_max: float = math.inf):
        super().__init__(min(t_max, root.t_max))
        self.name = name
        self.root = root
        self.max_order = root.max_order

    def _compute(self, t, order, cache):
        try:
            return self.root._eval(t, order, cache)
        except JetDivisionError as exc:
            if getattr(exc, "located", False):
                raise
            err = JetDivisionError(f"{self.name}: vanishing denominator at t={t:.6g} ({exc})")
            err.located = True
            err.t = t
            raise err from exc

    def __repr__(self):
        return f"Derived({self.name!r})"


def eval_jet(f: ScalarFn, t: float) -> Jet:
    """Value and first derivative of ``f`` at ``t`` as an order-1 jet."""
    return f.jet(t, 1)


def restrict(f: ScalarFn, t_max: float) -> ScalarFn:
    """Same function with its domain cut to ``[0, t_max)``."""
    return Derived(getattr(f, "name", repr(f)), f, t_max=t_max)


def constant(value: float) -> Constant:
    return Constant(value)


def jets_at(fns, t: float, order: int = 1):
    """Jets of several functions at one ``t`` sharing a single evaluation memo."""
    t = float(t)
    cache: _Cache = {}
    out = []
    for f in fns:
        f.check_domain(t)
        out.append(f._eval(t, order, cache))
    return out


def sqrt(f) -> ScalarFn:
    return Unary("sqrt", as_fn(f))


def exp(f) -> ScalarFn:
    return Unary("exp", as_fn(f))


def log(f) -> ScalarFn:
    return Unary("log", as_fn(f))
