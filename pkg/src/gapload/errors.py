"""Exception hierarchy shared by all gapload modules."""


class GaploadError(Exception):
    """Base class for every error raised by gapload."""


class ConfigError(GaploadError, ValueError):
    """Invalid or unknown configuration value."""


class DomainError(GaploadError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConvergenceError(GaploadError, ArithmeticError):
    """An iterative solver hit its iteration cap without converging."""


class InfeasibleRateError(GaploadError, ValueError):
    """Requested rate cannot be carried under the constellation cap."""


class ConstellationCapError(GaploadError, ValueError):
    """A bit load exceeds the largest order covered by the gap table."""
