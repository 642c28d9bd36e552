"""Exception hierarchy shared by every cvlab module."""


class CVLabError(Exception):
    """Base class for all cvlab errors."""


class InputError(CVLabError, ValueError):
    """Arguments violate a documented precondition."""


class NumericError(CVLabError, ArithmeticError):
    """A numerical procedure failed to reach its stated accuracy."""


class TruncationError(NumericError):
    """An infinite sum could not be truncated within the requested bound."""


class ResourceError(CVLabError, RuntimeError):
    """A problem size exceeds a configured cap."""
