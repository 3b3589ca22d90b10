"""Exception types shared across the package."""


class PunnError(Exception):
    """Base class for all package errors."""


class ShapeError(PunnError):
    """Input dimensions do not match what the model or operation expects."""


class NumericError(PunnError):
    """A non-finite value appeared where finite arithmetic was required."""


class ParseError(PunnError):
    """A file (CSV, IDX, model file) could not be parsed."""


class ConfigError(PunnError):
    """An experiment configuration is invalid."""


class DomainError(PunnError):
    """An input lies outside the mathematical domain of an operation."""


class SplitError(PunnError):
    """A dataset cannot be split as requested."""
