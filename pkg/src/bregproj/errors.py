"""Exception hierarchy shared by all modules."""


class BregprojError(Exception):
    """Base class for library errors."""


class ValidationError(BregprojError, ValueError):
    """Malformed input: wrong shape, non-finite data, invalid parameters."""


class PreconditionError(BregprojError, ValueError):
    """Input is well formed but violates an operation's precondition."""


class InfeasibleError(PreconditionError):
    """A constraint set is empty or misses the interior of a domain."""


class UnsupportedOperation(BregprojError, NotImplementedError):
    """The requested operation is not available for this object."""
