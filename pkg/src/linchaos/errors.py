"""Exception hierarchy shared by all modules."""


class LinChaosError(Exception):
    """Base class."""


class SchemaError(LinChaosError, ValueError):
    """Malformed JSON / config input."""


class PreconditionViolation(LinChaosError, ValueError):
    """Inputs do not satisfy a construction's hypotheses."""

    def __init__(self, message: str, **details: object) -> None:
        super().__init__(message)
        self.details = details


class SelectionFailure(LinChaosError):
    """A greedy index selection ran out of horizon."""

    def __init__(self, message: str, deepest: int, **details: object) -> None:
        super().__init__(message)
        self.deepest = deepest
        self.details = details


class ResourceLimitError(LinChaosError):
    """Work would exceed the configured budget."""


class UnsupportedKind(LinChaosError, TypeError):
    """Operation not available for this operator kind."""
