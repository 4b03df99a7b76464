"""Exception types shared across the package."""


class McaError(Exception):
    """Base class for all package errors."""


class ParseError(McaError):
    """Malformed instance or set-cover file; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidInstanceError(McaError):
    """Operation requires a valid instance but the input violates an invariant."""


class SolutionError(McaError):
    """A claimed solution violates one of the output contract properties."""


class GuardExceededError(McaError):
    """A solver refused an instance because a practical size guard was exceeded."""


class SolverTimeout(McaError):
    """A solver gave up because its cooperative deadline passed."""
