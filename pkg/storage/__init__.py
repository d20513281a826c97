# storage/__init__.py - File formats and atomic artifact output

from storage.error_handling import atomic_write, output_lock, storage_operation
from storage.measure_files import ifs_from_rows, read_ifs, write_ifs, write_measure
from storage.mesh_files import read_mesh, write_mesh
from storage.results import (
    read_json,
    write_csv,
    write_function_csv,
    write_json,
    write_manifest,
)

__all__ = [
    # Atomic output
    "atomic_write",
    "output_lock",
    "storage_operation",
    # Meshes
    "write_mesh",
    "read_mesh",
    # Measures
    "ifs_from_rows",
    "read_ifs",
    "write_ifs",
    "write_measure",
    # Results
    "read_json",
    "write_json",
    "write_csv",
    "write_function_csv",
    "write_manifest",
]
