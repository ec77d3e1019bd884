"""Exception types shared across the package."""


class RcmError(Exception):
    """Base class for all errors raised by rcmsim."""


class RejectedInputError(RcmError, ValueError):
    """An argument is outside the accepted domain (wrong dimension, NaN, ...)."""


class ModelDefinitionError(RcmError):
    """A connection kernel produced a value outside [0, 1]."""


class StructuralError(RcmError):
    """A complex violates a structural invariant (e.g. not downward closed)."""


class CapabilityError(RcmError):
    """The request is well formed but outside what this toolkit supports."""


class ConfigError(RcmError, ValueError):
    """A configuration file or override is malformed."""


class ReplicationError(RcmError):
    """A Monte-Carlo replication failed; ``replication`` identifies it for reproduction."""

    def __init__(self, replication: int, cause: BaseException):
        super().__init__(f"replication {replication} failed: {type(cause).__name__}: {cause}")
        self.replication = replication
        self.cause = cause
