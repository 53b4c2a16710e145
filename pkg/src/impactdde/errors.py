"""Exception types shared across the package.

ConfigurationError maps to CLI exit code 2, NumericalError (and subclasses)
to exit code 3.
"""

__all__ = [
    "ConfigurationError",
    "NumericalError",
    "DiscretizationError",
    "SingularModelError",
    "ChatterOverflowError",
]


class ConfigurationError(ValueError):
    """Invalid user-facing configuration or parameters."""


class NumericalError(RuntimeError):
    """A numerical procedure failed or its preconditions do not hold."""


class DiscretizationError(NumericalError):
    """A discretization is too poor to continue (bad spectrum, bracketing failure)."""


class SingularModelError(NumericalError):
    """Contact force is undefined: the short-time kernel level vanishes."""


class ChatterOverflowError(NumericalError):
    """Event-driven run exceeded the impact-event budget."""
