# exceptions.py - Custom exception classes for standardized error handling

"""Custom exceptions for the p-Laplace measure toolkit.

These exceptions separate bad input (validation), numerical failure (solver)
and file trouble (storage), so the command line can map each family to its
own exit code and callers can react without parsing messages.
"""


class ValidationError(Exception):
    """Raised when input validation fails.

    Attributes:
        field: Name of the field that failed validation
        message: Human-readable error message
    """

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class BudgetExceededError(ValidationError):
    """Raised when a measure construction would exceed its atom budget.

    Attributes:
        field: The depth-like field that is too large ("depth" or "level")
        message: Human-readable error message
        max_admissible: Largest value of the field that fits the budget
    """

    def __init__(self, field: str, message: str, max_admissible: int):
        self.max_admissible = max_admissible
        super().__init__(field, f"{message} (maximal admissible {field}: {max_admissible})")


class SolverError(Exception):
    """Base exception for numerical failures.

    Attributes:
        message: Human-readable error message
        operation: The operation that failed (e.g., "solve_poisson")
        details: Additional diagnostics
    """

    def __init__(self, message: str, operation: str = None, details: str = None):
        self.message = message
        self.operation = operation
        self.details = details
        super().__init__(self.message)


class ConvergenceError(SolverError):
    """Raised when an iteration stops without meeting its tolerances."""

    pass


class BreakdownError(SolverError):
    """Raised when an iteration produces NaN or its normalization collapses."""

    pass


class StorageError(Exception):
    """Raised when reading inputs or writing artifacts fails.

    Attributes:
        message: Human-readable error message
        path: The file or directory involved
    """

    def __init__(self, message: str, path: str = None):
        self.message = message
        self.path = path
        if path:
            super().__init__(f"{message} ({path})")
        else:
            super().__init__(message)
