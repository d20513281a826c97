# error_handling.py - Error handling utilities for command handlers

"""Error handling utilities for converting exceptions to exit codes."""

import json
import logging
import sys
from typing import Optional, TextIO

from core.config import EXIT_CODES, RUN_STATUS_EXIT
from core.exceptions import (
    BudgetExceededError,
    SolverError,
    StorageError,
    ValidationError,
)

logger = logging.getLogger(__name__)


def _emit(payload: dict, stream: Optional[TextIO]) -> None:
    stream = stream if stream is not None else sys.stderr
    stream.write(json.dumps(payload, sort_keys=True) + "\n")
    stream.flush()


def handle_command_error(error: Exception, stream: Optional[TextIO] = None) -> int:
    """Convert an exception raised by a command into an exit code.

    A one-line JSON error object is written to ``stream`` (standard error by
    default) so that callers can parse failures.

    Args:
        error: The exception that was raised
        stream: Text stream for the JSON error object

    Returns:
        int: Process exit code
    """
    if isinstance(error, BudgetExceededError):
        logger.warning(f"Budget exceeded: {error}")
        _emit(
            {
                "error": "budget_exceeded",
                "field": error.field,
                "message": error.message,
                "max_admissible": error.max_admissible,
            },
            stream,
        )
        return EXIT_CODES["validation"]

    if isinstance(error, ValidationError):
        logger.warning(f"Validation error: {error.field}: {error.message}")
        _emit(
            {"error": "validation", "field": error.field, "message": error.message},
            stream,
        )
        return EXIT_CODES["validation"]

    if isinstance(error, SolverError):
        logger.warning(f"Solver error in {error.operation}: {error.message} - {error.details}")
        _emit(
            {
                "error": "non_convergence",
                "operation": error.operation,
                "message": error.message,
                "details": error.details,
            },
            stream,
        )
        return EXIT_CODES["non_convergence"]

    if isinstance(error, StorageError):
        logger.error(f"Storage error: {error}")
        _emit({"error": "io", "message": error.message, "path": error.path}, stream)
        return EXIT_CODES["io"]

    # Unknown exception - log with traceback
    logger.error(f"Unexpected error in command: {error}", exc_info=True)
    _emit({"error": "internal", "message": str(error)}, stream)
    return EXIT_CODES["internal"]


def handle_command_result(status: str, operation: str) -> int:
    """Map the run status of a finished command to an exit code.

    Args:
        status: "success", "non_convergence" (a solve missed its tolerances)
            or "check_failed" (a solve converged but a required check did not pass)
        operation: Command name (for logging)

    Returns:
        int: 0 on success, the non-convergence code otherwise
    """
    if status == "success":
        logger.info(f"{operation}: finished")
    elif status == "check_failed":
        logger.warning(f"{operation}: finished with a failed check, manifest marked {status}")
    else:
        logger.warning(f"{operation}: finished without convergence, artifacts flagged partial")
    return EXIT_CODES[RUN_STATUS_EXIT[status]]
