"""Exception hierarchy shared by the library and the CLI."""


class PhSumsError(Exception):
    """Base class for every error raised on purpose by this package."""


class InputError(PhSumsError, ValueError):
    """Invalid input to an operation (bad shapes, violated preconditions)."""


class DegenerateInputError(InputError):
    """Geometrically degenerate input: collinear points, zero-volume simplices, too few points."""


class SizeLimitError(InputError):
    """Input larger than the documented guard for an exhaustive algorithm."""


class ConfigError(PhSumsError):
    """Experiment configuration is invalid or infeasible."""


class InsufficientDataError(PhSumsError):
    """Not enough distinct sample sizes survive to fit a regression."""


class UndefinedDimensionError(PhSumsError):
    """Fitted slope >= 1, so alpha / (1 - slope) is not a dimension."""
