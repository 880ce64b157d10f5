"""Exception types shared across the package."""


class RigidCountError(Exception):
    """Base class for all errors raised by rigidcount."""


class GraphParseError(RigidCountError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotRigidError(RigidCountError):
    """Raised when an operation needs a generically rigid graph."""


class RuleInapplicable(RigidCountError):
    """A reduction rule was asked to act on a graph that violates its hypotheses."""


class UnsupportedInput(RigidCountError):
    pass


class IsotropicEdgeError(RigidCountError):
    """d(q(v1) - q(v2)) vanishes, so the realization has no canonical position."""


class ConsistencyError(RigidCountError):
    """A numeric solve produced output that contradicts a structural guarantee."""


class ClusteringUnstableError(RigidCountError):
    pass
