"""Exception types raised by the copositivity package."""

from typing import Any, Dict, Optional


class CopositivityError(Exception):
    """Base class for all errors raised by this package."""

    pass


class InputError(CopositivityError):
    """Malformed polynomial, bad point set, or violated precondition on user input."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class ContractViolation(CopositivityError):
    """An operation was called on input outside its contract."""

    def __init__(self, message: str, hint: Optional[str] = None):
        self.hint = hint
        super().__init__(message)


class NotCopositiveError(CopositivityError):
    """A certificate was requested for a polynomial that is not copositive."""

    pass


class InternalError(CopositivityError):
    """A computed result contradicts a theorem; always a bug in this package."""

    def __init__(self, message: str, instance: Optional[Dict[str, Any]] = None):
        self.instance = instance or {}
        super().__init__(f"{message} (please report this instance: {self.instance})")
