"""Exception types raised across the package."""


class PdError(Exception):
    """Base class for errors raised by this package."""


class DomainError(PdError, ValueError):
    """An argument lies outside the domain on which a function is defined."""


class StructuralError(PdError, ValueError):
    """A matrix or object violates a structural precondition (e.g. Hermitian)."""


class ConvergenceError(PdError, RuntimeError):
    """A truncated series or ladder did not reach the requested tolerance."""


class ResolutionError(PdError, RuntimeError):
    """A quadrature grid is too coarse for the requested oscillation."""


class ConstructionError(PdError, ValueError):
    """An extension or derived object cannot be built from the given data."""
