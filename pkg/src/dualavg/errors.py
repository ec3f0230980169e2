"""Exception types shared across the package."""


class GridMismatchError(ValueError):
    """Two grid functions live on different grids."""


class DomainError(ValueError):
    """A point lies outside the box domain, or a scalar argument is out of range."""


class ResolutionError(ValueError):
    """A requested construction falls below the grid resolution (e.g. empty ball patch)."""


class NumericalError(RuntimeError):
    """A numerical routine (bisection, slope fit) failed; message carries diagnostics."""


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the offending key/line."""
