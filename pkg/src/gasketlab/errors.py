"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad arguments or malformed input data."""


class CapacityError(RuntimeError):
    """Requested problem size exceeds a configured guardrail."""


class InsufficientDataError(RuntimeError):
    """Not enough usable data points for a fit."""
