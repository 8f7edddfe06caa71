"""Exception types raised by the simulation modules."""


class MatterSimError(Exception):
    """Base class for all package errors."""


class DomainError(MatterSimError, ValueError):
    """An input lies outside the domain of a physical formula."""


class ResolutionError(MatterSimError, ValueError):
    """A sampling grid is too coarse for the requested computation."""


class QuadratureError(MatterSimError, ArithmeticError):
    """A numerical integral did not converge to the requested tolerance."""


class FitError(MatterSimError, ArithmeticError):
    """A fit is degenerate or its parameters are not identifiable from the data."""
