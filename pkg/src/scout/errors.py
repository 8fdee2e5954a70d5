"""Exception types shared across the package."""


class ScoutError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(ScoutError):
    """Operands have incompatible shapes."""


class NumericError(ScoutError):
    """An operation produced (or was fed) NaN/Inf."""


class UsageError(ScoutError):
    """An API was called in a way its contract forbids."""


class ConfigError(ScoutError):
    """A configuration value or file is invalid."""


class InputError(ScoutError):
    """User-supplied data (token ids, prompt text) is out of range."""


class InternalError(ScoutError):
    """An internal consistency check failed; indicates a bug, not bad input."""
