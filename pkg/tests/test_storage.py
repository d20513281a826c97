# tests/test_storage.py - Tests for artifact files, locking and input formats

import json

import numpy as np
import pytest

from core.config import TOOL_NAME
from core.exceptions import StorageError, ValidationError
from logic.measure import lebesgue_measure, sierpinski_ifs
from logic.mesh import FeFunction, build_uniform_mesh
from storage import (
    atomic_write,
    ifs_from_rows,
    output_lock,
    read_ifs,
    read_json,
    read_mesh,
    storage_operation,
    write_csv,
    write_function_csv,
    write_ifs,
    write_json,
    write_manifest,
    write_measure,
    write_mesh,
)
from storage.error_handling import LOCK_NAME
from storage.results import MANIFEST_NAME


class TestAtomicWrite:
    """Tests for atomic_write"""

    def test_writes_file(self, tmp_path):
        """Test that content lands at the final path"""
        path = tmp_path / "a.txt"
        with atomic_write(path, "test") as handle:
            handle.write("hello")
        assert path.read_text() == "hello"
        assert list(tmp_path.iterdir()) == [path]

    def test_failure_leaves_no_file(self, tmp_path):
        """Test that an exception inside the block leaves nothing behind"""
        path = tmp_path / "a.txt"
        with pytest.raises(RuntimeError):
            with atomic_write(path, "test") as handle:
                handle.write("partial")
                raise RuntimeError("boom")
        assert list(tmp_path.iterdir()) == []

    def test_missing_directory(self, tmp_path):
        """Test that an unwritable location raises StorageError"""
        with pytest.raises(StorageError):
            with atomic_write(tmp_path / "missing" / "a.txt", "test") as handle:
                handle.write("x")


class TestOutputLock:
    """Tests for output_lock"""

    def test_second_run_rejected(self, tmp_path):
        """Test that a locked directory refuses a second run"""
        with output_lock(tmp_path):
            with pytest.raises(StorageError) as excinfo:
                with output_lock(tmp_path):
                    pass
            assert "locked" in excinfo.value.message
            assert (tmp_path / LOCK_NAME).exists()

    def test_lock_file_removed(self, tmp_path):
        """Test that the lock file is gone after the run"""
        with output_lock(tmp_path) as directory:
            assert directory == tmp_path
        assert not (tmp_path / LOCK_NAME).exists()


class TestStorageOperation:
    """Tests for the storage_operation decorator"""

    def test_os_error_wrapped(self, tmp_path):
        """Test that OSError becomes StorageError"""

        @storage_operation("read_missing")
        def read_missing():
            return (tmp_path / "missing.txt").read_text()

        with pytest.raises(StorageError) as excinfo:
            read_missing()
        assert "read_missing" in excinfo.value.message

    def test_value_error_wrapped(self):
        """Test that malformed content becomes StorageError"""

        @storage_operation("parse")
        def parse():
            return int("not a number")

        with pytest.raises(StorageError):
            parse()

    def test_result_passed_through(self):
        """Test that return values are unchanged"""

        @storage_operation("ok")
        def ok():
            return 42

        assert ok() == 42


class TestMeshFiles:
    """Tests for write_mesh and read_mesh"""

    def test_round_trip(self, tmp_path):
        """Test that a written mesh reads back unchanged"""
        mesh = build_uniform_mesh("unit_triangle", 4)
        path = write_mesh(mesh, tmp_path / "mesh.txt")
        lines = path.read_text().splitlines()
        assert lines[0] == f"# {TOOL_NAME} mesh"
        assert lines[1] == f"vertices {mesh.num_vertices} triangles {mesh.num_triangles}"
        assert len(lines) == 2 + mesh.num_vertices + mesh.num_triangles
        again = read_mesh(path)
        np.testing.assert_array_equal(again.vertices, mesh.vertices)
        np.testing.assert_array_equal(again.triangles, mesh.triangles)
        np.testing.assert_array_equal(again.boundary_mask, mesh.boundary_mask)

    def test_hand_written_file(self, tmp_path):
        """Test a file typed in the documented layout: square split around its center"""
        path = tmp_path / "square.txt"
        path.write_text(
            "# unit square, one interior vertex\n"
            "vertices 5 triangles 4\n"
            "0 0 1\n"
            "1 0 1\n"
            "1 1 1\n"
            "0 1 1\n"
            "0.5 0.5 0\n"
            "0 1 4\n"
            "1 2 4\n"
            "2 3 4\n"
            "3 0 4\n"
        )
        mesh = read_mesh(path)
        assert mesh.num_vertices == 5
        assert mesh.num_triangles == 4
        assert list(mesh.interior) == [4]
        assert mesh.area == pytest.approx(1.0)

    def test_missing_file(self, tmp_path):
        """Test that a missing mesh file raises StorageError"""
        with pytest.raises(StorageError):
            read_mesh(tmp_path / "nope.txt")

    def test_bad_header(self, tmp_path):
        """Test that a malformed header raises StorageError"""
        path = tmp_path / "mesh.txt"
        path.write_text("vertices 3\n0 0 1\n1 0 1\n0 1 1\ntriangles 1\n0 1 2\n")
        with pytest.raises(StorageError):
            read_mesh(path)

    def test_row_count_mismatch(self, tmp_path):
        """Test that a header disagreeing with the rows raises StorageError"""
        path = tmp_path / "mesh.txt"
        path.write_text("vertices 3 triangles 2\n0 0 1\n1 0 1\n0 1 1\n0 1 2\n")
        with pytest.raises(StorageError):
            read_mesh(path)

    def test_missing_vertex_reference(self, tmp_path):
        """Test that out-of-range triangle indices raise StorageError"""
        path = tmp_path / "mesh.txt"
        path.write_text("vertices 3 triangles 1\n0 0 1\n1 0 1\n0 1 1\n0 1 5\n")
        with pytest.raises(StorageError):
            read_mesh(path)


SIERPINSKI_TEXT = """\
# Sierpinski gasket
# r  theta  tx   ty      reflect  p
0.5  0      0    0       0        0.3333333333333333
0.5  0      0.5  0       0        0.3333333333333333
0.5  0      0.25 0.4330127018922193  0  0.3333333333333334
"""


class TestMeasureFiles:
    """Tests for IFS and measure files"""

    def test_read_hand_written_ifs(self, tmp_path):
        """Test that a typed IFS file matches the built-in Sierpinski system"""
        path = tmp_path / "sierpinski.ifs"
        path.write_text(SIERPINSKI_TEXT)
        ifs = read_ifs(path)
        builtin = sierpinski_ifs()
        assert len(ifs.maps) == 3
        assert ifs.probabilities == pytest.approx(builtin.probabilities)
        for read, expected in zip(ifs.maps, builtin.maps):
            assert read.ratio == expected.ratio
            assert read.reflect is False
            np.testing.assert_allclose(read.translation, expected.translation, atol=1e-15)

    def test_hand_written_ifs_round_trip(self, tmp_path):
        """Test that reading, writing and reading again keeps every map"""
        path = tmp_path / "sierpinski.ifs"
        path.write_text(SIERPINSKI_TEXT)
        first = read_ifs(path)
        copy = write_ifs(first, tmp_path / "copy.ifs")
        assert copy.read_text().startswith(f"# {TOOL_NAME} IFS")
        assert first == read_ifs(copy)

    def test_reflection_and_rotation(self, tmp_path):
        """Test the angle and reflect columns"""
        path = tmp_path / "rotated.ifs"
        path.write_text("0.5 1.5707963267948966 1 0 1 0.5\n0.5 0 0 0 0 0.5  # identity part\n")
        ifs = read_ifs(path)
        assert ifs.maps[0].reflect is True
        assert ifs.maps[0].angle == pytest.approx(np.pi / 2)
        assert ifs.maps[1].reflect is False

    def test_natural_probabilities_when_column_missing(self, tmp_path):
        """Test that five columns give the natural probabilities"""
        path = tmp_path / "pair.ifs"
        path.write_text("0.5 0 0 0 0\n0.5 0 0.5 0 0\n")
        ifs = read_ifs(path)
        assert ifs.probabilities == pytest.approx((0.5, 0.5))
        assert ifs.maps[1].translation == (0.5, 0.0)

    def test_ifs_from_rows_checks(self):
        """Test column count, reflect flags and probability sums"""
        with pytest.raises(StorageError):
            ifs_from_rows(np.array([[0.5, 0.0, 0.0, 0.0]]))
        with pytest.raises(StorageError):
            ifs_from_rows(np.array([[0.5, 0.0, 0.0, 0.0, 2.0, 1.0]]))
        with pytest.raises(ValidationError):
            ifs_from_rows(np.array([[0.5, 0.0, 0.0, 0.0, 0.0, 0.5], [0.5, 0.0, 0.5, 0.5, 0.0, 0.6]]))

    def test_read_ifs_only_comments(self, tmp_path):
        """Test that a file without maps raises StorageError"""
        path = tmp_path / "empty.ifs"
        path.write_text("# nothing here\n")
        with pytest.raises(StorageError):
            read_ifs(path)

    def test_read_ifs_not_numeric(self, tmp_path):
        """Test that a JSON description is rejected"""
        path = tmp_path / "ifs.json"
        path.write_text('{"maps": []}\n')
        with pytest.raises(StorageError):
            read_ifs(path)

    def test_write_measure(self, tmp_path):
        """Test the atom table and its header"""
        mu = lebesgue_measure(build_uniform_mesh("unit_square", 4))
        csv_path, json_path = write_measure(mu, tmp_path)
        table = np.loadtxt(csv_path, delimiter=",", skiprows=1)
        assert table.shape == (mu.size, 3)
        assert table[:, 2].sum() == pytest.approx(1.0)
        header = json.loads(json_path.read_text())
        assert header["atoms"] == mu.size
        assert header["total_mass"] == pytest.approx(1.0)


class TestResults:
    """Tests for JSON, CSV and manifest output"""

    def test_json_non_finite_values(self, tmp_path):
        """Test that inf and nan are written as strings"""
        path = write_json(tmp_path / "r.json", {"a": float("inf"), "b": [float("nan"), 1.0], "c": np.float64(2.5)})
        data = read_json(path)
        assert data == {"a": "inf", "b": ["nan", 1.0], "c": 2.5}

    def test_json_numpy_values(self, tmp_path):
        """Test numpy arrays and integers"""
        data = read_json(write_json(tmp_path / "r.json", {"v": np.arange(3), "n": np.int64(4)}))
        assert data == {"v": [0, 1, 2], "n": 4}

    def test_csv_header_and_rows(self, tmp_path):
        """Test the header line and full precision values"""
        path = write_csv(tmp_path / "t.csv", ["r", "m"], np.array([[0.1, 1.0 / 3.0], [0.2, 2.0]]))
        lines = path.read_text().splitlines()
        assert lines[0] == "r,m"
        assert float(lines[1].split(",")[1]) == 1.0 / 3.0

    def test_csv_column_mismatch(self, tmp_path):
        """Test that a wrong column count raises StorageError"""
        with pytest.raises(StorageError):
            write_csv(tmp_path / "t.csv", ["a", "b"], np.zeros((2, 3)))

    def test_function_csv(self, tmp_path):
        """Test the per-vertex x, y, u table"""
        mesh = build_uniform_mesh("unit_square", 4)
        u = FeFunction.interpolate(mesh, lambda x, y: x * y)
        path = write_function_csv(u, tmp_path / "u.csv", name="phi")
        assert path.read_text().splitlines()[0] == "x,y,phi"
        table = np.loadtxt(path, delimiter=",", skiprows=1)
        np.testing.assert_allclose(table[:, 2], table[:, 0] * table[:, 1])

    def test_manifest(self, tmp_path):
        """Test the manifest fields"""
        path = write_manifest(tmp_path, {"command": "eigen"}, [3, 4], 1.5, "success", ["eigen.json"])
        assert path.name == MANIFEST_NAME
        data = read_json(path)
        assert data["tool"] == TOOL_NAME
        assert data["seeds"] == [3, 4]
        assert data["status"] == "success"
        assert data["artifacts"] == ["eigen.json", MANIFEST_NAME]
        assert set(data["platform"]["libraries"]) == {"numpy", "scipy", "filelock"}
