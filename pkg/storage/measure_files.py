# measure_files.py - IFS descriptions and atom files

"""IFS files are plain text, one similarity per line::

    # r  theta  tx  ty  reflect  p
    0.5  0.0    0.0 0.0 0        0.3333333333333333
    ...

theta is in radians, reflect is 0 or 1. Blank lines and text after ``#``
are ignored. The probability column may be left out on every line, in
which case the natural probabilities r_i^s are used.

Measures are written as ``measure.csv`` (columns x, y, w) plus
``measure.json`` holding the provenance header and total mass.
"""

import io
import logging
from pathlib import Path
from typing import Union

import numpy as np

from core.config import TOOL_NAME
from core.exceptions import StorageError
from logic.measure import DiscreteMeasure, IfsSpec, SimilarityMap, natural_probabilities
from storage.error_handling import atomic_write, storage_operation
from storage.results import write_csv, write_json

logger = logging.getLogger(__name__)

IFS_COLUMNS = ["r", "theta", "tx", "ty", "reflect", "p"]


def ifs_from_rows(rows: np.ndarray) -> IfsSpec:
    """Build an IfsSpec from rows of r theta tx ty reflect [p].

    Raises:
        StorageError: If the column count or a reflect flag is wrong
        ValidationError: If the maps or probabilities are invalid
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] not in (len(IFS_COLUMNS) - 1, len(IFS_COLUMNS)):
        raise StorageError(f"IFS rows need 5 or 6 columns ({' '.join(IFS_COLUMNS)}), got {rows.shape[1]}")
    flags = rows[:, 4]
    if not np.all((flags == 0.0) | (flags == 1.0)):
        raise StorageError("reflect must be 0 or 1")

    maps = tuple(
        SimilarityMap(ratio=r, angle=theta, translation=(tx, ty), reflect=bool(reflect))
        for r, theta, tx, ty, reflect in rows[:, :5].tolist()
    )
    if rows.shape[1] == len(IFS_COLUMNS):
        probabilities = rows[:, 5]
    else:
        probabilities = natural_probabilities(IfsSpec(maps, [1.0 / len(maps)] * len(maps)))
    return IfsSpec(maps, tuple(float(p) for p in probabilities))


@storage_operation("read_ifs")
def read_ifs(path: Union[str, Path]) -> IfsSpec:
    """Read an IFS description file.

    Raises:
        StorageError: If the file is missing, empty or malformed
        ValidationError: If the maps or probabilities are invalid
    """
    path = Path(path)
    rows = np.loadtxt(path, comments="#", ndmin=2)
    if rows.size == 0:
        raise StorageError("IFS file lists no maps", str(path))
    ifs = ifs_from_rows(rows)
    logger.info(f"Read IFS with {len(ifs.maps)} maps from {path}")
    return ifs


def write_ifs(ifs: IfsSpec, path: Union[str, Path]) -> Path:
    """Write an IFS in the plain-text format, probabilities included."""
    path = Path(path)
    rows = np.array(
        [
            [m.ratio, m.angle, m.translation[0], m.translation[1], float(m.reflect), p]
            for m, p in zip(ifs.maps, ifs.probabilities)
        ]
    )
    buffer = io.StringIO()
    buffer.write(f"# {TOOL_NAME} IFS\n")
    buffer.write(f"# {' '.join(IFS_COLUMNS)}\n")
    np.savetxt(buffer, rows, fmt=["%.17g", "%.17g", "%.17g", "%.17g", "%d", "%.17g"])
    with atomic_write(path, "write_ifs") as handle:
        handle.write(buffer.getvalue())
    return path


def write_measure(mu: DiscreteMeasure, directory: Union[str, Path]) -> list[Path]:
    """Write measure.csv and measure.json into directory."""
    directory = Path(directory)
    csv_path = write_csv(
        directory / "measure.csv",
        ["x", "y", "w"],
        np.column_stack([mu.points, mu.weights]),
    )
    json_path = write_json(directory / "measure.json", mu.header())
    return [csv_path, json_path]
