"""
errors.py - exception hierarchy shared by the library and the CLI.
"""

from typing import Optional


class BesynthError(Exception):
    """Root of every error raised on purpose by besynth."""


class FormulaSyntaxError(BesynthError, ValueError):
    """Formula text does not conform to the grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UndeclaredAtomError(BesynthError, ValueError):
    """A formula mentions a proposition missing from the partition."""

    def __init__(self, atom: str):
        super().__init__(f"atom '{atom}' is not declared in the partition")
        self.atom = atom


class PartitionError(BesynthError, ValueError):
    """Malformed partition: overlapping, duplicate or invalid names."""


class TraceError(BesynthError, ValueError):
    """Empty trace or instant out of range."""


class ResourceLimitError(BesynthError):
    """A configured cap (DFA states, BDD nodes, alphabet size) was exceeded."""

    def __init__(self, resource: str, limit: int, detail: Optional[str] = None):
        message = f"{resource} limit of {limit} exceeded"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
        self.resource = resource
        self.limit = limit


class ManagerMismatchError(BesynthError, ValueError):
    """Two decision-diagram nodes belong to different managers."""


class UnsatisfiableError(BesynthError, ValueError):
    """No witness exists for an unsatisfiable function."""


class BoundsExceededError(BesynthError):
    """Explicit validation arena is larger than the configured bounds."""


class InvariantViolation(BesynthError):
    """An internal consistency check failed."""


class UsageError(BesynthError):
    """Bad command-line usage."""


class UnknownVariableError(BesynthError, KeyError):
    """A variable name was not declared in the decision-diagram manager."""

    def __init__(self, name: str):
        super().__init__(f"variable '{name}' is not declared in the manager")
        self.name = name
