"""Exception hierarchy shared by the numerical modules."""


class FlightfallError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FlightfallError, ValueError):
    """Argument outside the mathematical domain of a function."""


class PoleError(DomainError):
    """A gamma-type factor was evaluated at a non-positive integer."""


class SpecFunOverflowError(FlightfallError, OverflowError):
    """Result is not representable as a finite double."""


class ConvergenceError(FlightfallError, ArithmeticError):
    """A series or quadrature did not reach the requested tolerance."""
