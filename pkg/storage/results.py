# results.py - Result CSV/JSON files and the run manifest

import io
import json
import logging
import math
import platform
import sys
from importlib import metadata
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from core.config import TOOL_NAME, TOOL_VERSION
from core.exceptions import StorageError
from logic.mesh import FeFunction
from storage.error_handling import atomic_write, storage_operation

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
RECORDED_LIBRARIES = ["numpy", "scipy", "filelock"]


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def _finite(value):
    """Replace non-finite floats by strings so the output stays strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, np.ndarray):
        return _finite(value.tolist())
    if isinstance(value, dict):
        return {str(k): _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def write_json(path: Union[str, Path], payload) -> Path:
    """Write payload as indented, key-sorted JSON."""
    path = Path(path)
    text = json.dumps(_finite(payload), indent=2, sort_keys=True, default=_json_default, allow_nan=False)
    with atomic_write(path, "write_json") as handle:
        handle.write(text + "\n")
    return path


@storage_operation("read_json")
def read_json(path: Union[str, Path]):
    return json.loads(Path(path).read_text())


def write_csv(path: Union[str, Path], header: Sequence[str], rows: np.ndarray) -> Path:
    """Write a numeric table with a comma-separated header line."""
    path = Path(path)
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size and rows.shape[1] != len(header):
        raise StorageError(f"Expected {len(header)} columns, got {rows.shape[1]}", str(path))
    buffer = io.StringIO()
    np.savetxt(buffer, rows.reshape(-1, len(header)), delimiter=",", fmt="%.17g", header=",".join(header), comments="")
    with atomic_write(path, "write_csv") as handle:
        handle.write(buffer.getvalue())
    return path


def write_function_csv(u: FeFunction, path: Union[str, Path], name: str = "u") -> Path:
    """Per-vertex table x, y, <name>."""
    return write_csv(path, ["x", "y", name], np.column_stack([u.mesh.vertices, u.coeffs]))


def library_versions() -> dict:
    versions = {}
    for name in RECORDED_LIBRARIES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def write_manifest(
    directory: Union[str, Path],
    config: dict,
    seeds: Sequence[int],
    wall_time: float,
    status: str,
    artifacts: Sequence[str],
) -> Path:
    """Record everything needed to reproduce a run.

    Args:
        directory: Output directory
        config: Fully resolved run configuration
        seeds: Seeds used by the run
        wall_time: Seconds spent in the command
        status: "success", "non_convergence", "check_failed" or "failed"
        artifacts: File names written by the run (the manifest is appended)
    """
    payload = {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "config": config,
        "seeds": [int(s) for s in seeds],
        "wall_time": wall_time,
        "status": status,
        "artifacts": sorted(set(artifacts) | {MANIFEST_NAME}),
        "platform": {
            "python": sys.version.split()[0],
            "system": platform.platform(),
            "libraries": library_versions(),
        },
    }
    path = write_json(Path(directory) / MANIFEST_NAME, payload)
    logger.info(f"Wrote manifest {path} ({status})")
    return path
