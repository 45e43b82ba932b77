"""Exception types shared across the package."""


class SolabError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SolabError, ValueError):
    """Invalid user-supplied configuration (bad sizes, ranges, flags)."""


class DimensionMismatchError(SolabError, ValueError):
    """Operands whose shapes do not describe the same network."""


class FitError(SolabError, ValueError):
    """A statistical fit could not be performed on the given sample."""
