# mesh_files.py - Plain-text mesh format

"""Read and write meshes as plain text.

Format::

    # comment lines anywhere
    vertices <N> triangles <M>
    <x> <y> <b>                 (N lines, b = 1 on the boundary, else 0)
    <i> <j> <k>                 (M lines, 0-based vertex indices)
"""

import io
import logging
from pathlib import Path
from typing import Union

import numpy as np

from core.config import TOOL_NAME
from core.exceptions import StorageError
from logic.mesh import Mesh
from storage.error_handling import atomic_write, storage_operation

logger = logging.getLogger(__name__)


def write_mesh(mesh: Mesh, path: Union[str, Path]) -> Path:
    """Write a mesh in the plain-text format."""
    path = Path(path)
    buffer = io.StringIO()
    buffer.write(f"# {TOOL_NAME} mesh\n")
    buffer.write(f"vertices {mesh.num_vertices} triangles {mesh.num_triangles}\n")
    np.savetxt(
        buffer,
        np.column_stack([mesh.vertices, mesh.boundary_mask.astype(float)]),
        fmt=["%.17g", "%.17g", "%d"],
    )
    np.savetxt(buffer, mesh.triangles, fmt="%d")
    with atomic_write(path, "write_mesh") as handle:
        handle.write(buffer.getvalue())
    return path


def _header(line: str) -> tuple[int, int]:
    words = line.split()
    if len(words) != 4 or words[0] != "vertices" or words[2] != "triangles":
        raise StorageError(f"Expected 'vertices <N> triangles <M>', got {line!r}")
    return int(words[1]), int(words[3])


@storage_operation("read_mesh")
def read_mesh(path: Union[str, Path]) -> Mesh:
    """Read a mesh written by write_mesh.

    Raises:
        StorageError: If the file is missing or malformed
        ValidationError: If the triangles are degenerate
    """
    path = Path(path)
    lines = [line.split("#", 1)[0] for line in path.read_text().splitlines()]
    lines = [line for line in lines if line.strip()]
    if not lines:
        raise StorageError("Mesh file is empty", str(path))

    n, m = _header(lines[0])
    if len(lines) != 1 + n + m:
        raise StorageError(f"Expected {n} vertex and {m} triangle lines, got {len(lines) - 1}", str(path))
    vertex_rows = np.loadtxt(lines[1 : 1 + n], ndmin=2)
    if vertex_rows.shape != (n, 3):
        raise StorageError(f"Expected {n} rows of 'x y b'", str(path))
    triangles = np.loadtxt(lines[1 + n :], dtype=int, ndmin=2)
    if triangles.shape != (m, 3):
        raise StorageError(f"Expected {m} rows of 'i j k'", str(path))
    if triangles.min() < 0 or triangles.max() >= n:
        raise StorageError("Triangle references a missing vertex", str(path))
    if not np.all((vertex_rows[:, 2] == 0.0) | (vertex_rows[:, 2] == 1.0)):
        raise StorageError("Boundary flags must be 0 or 1", str(path))

    mesh = Mesh.from_arrays(vertex_rows[:, :2], triangles, vertex_rows[:, 2] != 0.0)
    logger.info(f"Read mesh from {path}: {mesh.num_vertices} vertices, {mesh.num_triangles} triangles")
    return mesh
