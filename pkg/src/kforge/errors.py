"""
Exception hierarchy shared by the library and the command line front door.

The CLI maps FixtureError to exit code 2 and every other KforgeError to 1.
"""

from typing import Optional


class KforgeError(Exception):
    """Base class for all kforge errors."""


class FixtureError(KforgeError):
    """Unreadable, malformed or schema-invalid input file."""

    def __init__(self, message: str, path: Optional[str] = None,
                 position: Optional[str] = None) -> None:
        self.message = message
        self.path = path
        self.position = position
        where = ""
        if path:
            where = f"{path}"
            if position:
                where += f" at {position}"
            where += ": "
        super().__init__(f"{where}{message}")


class DomainError(KforgeError, ValueError):
    """A precondition or domain rule of an operation does not hold."""


class InvariantViolation(KforgeError, AssertionError):
    """A state the construction proves impossible was reached."""
