"""Scalar functions of the energy density and their jets."""

from .core import (
    Constant,
    Derived,
    Expression,
    ScalarFn,
    T,
    as_fn,
    constant,
    eval_jet,
    exp,
    log,
    sqrt,
    jets_at,
    restrict,
)
from .jet import Jet
from .ode import OdeSolution, OdeTable, integrate_ode, read_csv, write_csv
from .parser import parse_expr

__all__ = [
    "Constant",
    "Derived",
    "Expression",
    "Jet",
    "OdeSolution",
    "OdeTable",
    "ScalarFn",
    "T",
    "as_fn",
    "constant",
    "eval_jet",
    "exp",
    "integrate_ode",
    "jets_at",
    "log",
    "parse_expr",
    "read_csv",
    "restrict",
    "sqrt",
    "write_csv",
]
