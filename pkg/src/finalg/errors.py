"""Shared exception types; the CLI maps them to stable exit codes."""


class FinalgError(Exception):
    """Base class for all package errors."""


class InvalidInput(FinalgError):
    """A precondition on user-supplied data was violated (exit code 2)."""


class BudgetExceeded(FinalgError):
    """A search or size guard was exhausted before an answer (exit code 3)."""


class TheoremViolation(FinalgError):
    """A verified theorem failed on valid input: an implementation bug (exit code 4)."""
