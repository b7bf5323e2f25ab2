"""Exception hierarchy shared across the package."""


class FerrojetError(Exception):
    """Base class for all package errors."""


class DomainError(FerrojetError, ValueError):
    """Argument outside the mathematical domain of a special function."""


class ParameterError(FerrojetError, ValueError):
    """Physical or numerical parameter outside its admissible range."""


class RegimeError(FerrojetError, ValueError):
    """Operation requested in the wrong surface-tension regime."""


class ExistenceError(FerrojetError, ValueError):
    """Coefficient signs rule out the requested solitary-wave solution."""


class GeometryError(FerrojetError, ValueError):
    """Free surface touches the rod: 1 + eta <= 0 somewhere."""


class GridError(FerrojetError, ValueError):
    """Mismatched or incommensurate spectral grids."""


class ConvergenceError(FerrojetError, RuntimeError):
    """An iterative scheme failed to converge (or diverged)."""
