# error_handling.py - Standardized error handling for file operations

"""Context managers and decorators for artifact output.

Every artifact is written through ``atomic_write`` so that a reader never
sees a half-written file, and a run holds ``output_lock`` on its output
directory so that two runs cannot interleave their artifacts.
"""

import logging
import os
import tempfile
from contextlib import contextmanager
from functools import wraps
from pathlib import Path
from typing import Callable, TypeVar, Union

from filelock import FileLock, Timeout

from core.exceptions import StorageError

logger = logging.getLogger(__name__)

T = TypeVar("T")

LOCK_NAME = ".run.lock"


@contextmanager
def atomic_write(path: Union[str, Path], operation: str, mode: str = "w"):
    """Write to a temporary file next to path and rename it into place.

    Args:
        path: Final file path
        operation: Name of the operation being performed (for logging)
        mode: "w" for text, "wb" for bytes

    Yields:
        File object opened on the temporary file

    Raises:
        StorageError: If the file cannot be written

    Example:
        with atomic_write(out / "eigen.json", "write_json") as handle:
            handle.write(text)
    """
    path = Path(path)
    try:
        fd, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    except OSError as e:
        logger.error(f"{operation}: cannot create a temporary file in {path.parent} - {e}")
        raise StorageError(f"Cannot write in {operation}: {e}", str(path))

    try:
        with os.fdopen(fd, mode) as handle:
            yield handle
        os.replace(temp_name, path)
    except OSError as e:
        logger.error(f"{operation}: write failed - {e}", exc_info=True)
        raise StorageError(f"Write failed in {operation}: {e}", str(path))
    finally:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
    logger.debug(f"{operation}: wrote {path}")


@contextmanager
def output_lock(directory: Union[str, Path], timeout: float = 0.0):
    """Hold an exclusive lock on an output directory for the duration of a run.

    Raises:
        StorageError: If another run holds the lock
    """
    directory = Path(directory)
    lock_file = directory / LOCK_NAME
    lock = FileLock(str(lock_file), timeout=timeout)
    try:
        lock.acquire()
    except Timeout:
        raise StorageError("Output directory is locked by another run", str(directory))
    try:
        yield directory
    finally:
        lock.release()
        try:
            lock_file.unlink()
        except OSError:
            pass


def storage_operation(operation: str):
    """Decorator turning OSError and malformed content into StorageError.

    Example:
        @storage_operation("read_mesh")
        def read_mesh(path): ...
    """

    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except StorageError:
                raise
            except OSError as e:
                logger.warning(f"{operation}: {e}")
                raise StorageError(f"I/O error in {operation}: {e.strerror or e}", getattr(e, "filename", None))
            except (ValueError, KeyError, TypeError) as e:
                logger.warning(f"{operation}: malformed content - {e}")
                raise StorageError(f"Malformed content in {operation}: {e}")

        return wrapper

    return decorator
