"""Exception hierarchy for the gasket energy toolkit."""


class GasketError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GasketError, ValueError):
    """Input outside the mathematical domain of an operation.

    Examples: a level below 2, a word symbol out of range, a zero vector
    passed to the angular distance.
    """


class PreconditionError(GasketError, ValueError):
    """An operation's precondition does not hold (e.g. D is not a valid boundary Laplacian)."""


class StructureError(GasketError):
    """The level-1 network does not produce a uniform harmonic structure."""


class UnsupportedStructureError(GasketError):
    """A check that only applies to a specific structure was run on another one."""


class DepthCapError(GasketError):
    """Enumeration depth exceeds the configured cap and no override was given."""


class ConfigError(GasketError, ValueError):
    """Invalid run configuration (flags, config file or environment)."""
