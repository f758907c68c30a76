"""Exception hierarchy shared across the package."""


class NordenError(Exception):
    """Base class for all errors raised by nordenlift."""


class DomainError(NordenError, ValueError):
    """Evaluation requested outside a function's or chart's domain."""


class JetDivisionError(NordenError, ZeroDivisionError):
    """Division by a jet whose value is (numerically) zero."""


class ParseError(NordenError, ValueError):
    """Malformed expression source.

    ``offset`` is the byte offset into the source where the problem was found.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DegenerateMetricError(NordenError, ArithmeticError):
    """The lifted metric is (numerically) singular."""


class IntegrationError(NordenError, ArithmeticError):
    """An ODE right-hand side became non-finite or a guard changed sign."""

    def __init__(self, message, t):
        super().__init__(f"{message} near t={t:.6g}")
        self.t = t


class InconsistencyError(NordenError, RuntimeError):
    """Residuals contradict the inclusion lattice of the Norden classes."""


class ConfigError(NordenError, ValueError):
    """Invalid run configuration."""
