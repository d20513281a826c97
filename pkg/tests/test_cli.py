# tests/test_cli.py - Tests for run configuration and the command-line entry point

import json
import math

import pytest

from cli import main
from cli import commands
from cli.commands import simplicity_seeds
from cli.parser import build_parser
from cli.run_config import (
    MeasureSpec,
    build_run_config,
    load_run_config,
    merge_layers,
    parse_forcing,
    parse_measure,
    read_config_file,
)
from core.config import EXIT_CODES, GROWTH_RATIO_BOUND
from core.exceptions import StorageError, ValidationError
from logic.eigen import SimplicityReport
from storage.error_handling import output_lock
from storage.results import MANIFEST_NAME


def last_error(capsys) -> dict:
    lines = capsys.readouterr().err.strip().splitlines()
    return json.loads(lines[-1])


def read(path) -> dict:
    return json.loads(path.read_text())


class TestParseMeasure:
    """Tests for parse_measure and parse_forcing"""

    def test_lebesgue(self):
        """Test the plain Lebesgue form"""
        assert parse_measure("lebesgue") == {"kind": "lebesgue"}

    def test_ifs_name_and_path(self):
        """Test that the depth is split off the last colon"""
        assert parse_measure("ifs:sierpinski:7") == {"kind": "ifs", "ifs": "sierpinski", "depth": "7"}
        assert parse_measure("ifs:C:/maps/gasket.ifs:5")["ifs"] == "C:/maps/gasket.ifs"

    def test_log_cantor(self):
        """Test the q and level fields"""
        assert parse_measure("log-cantor:3:6") == {"kind": "log-cantor", "q": "3", "level": "6"}

    def test_malformed(self):
        """Test that unknown forms are rejected"""
        for text in ("uniform", "ifs:7", "log-cantor:3"):
            with pytest.raises(ValidationError):
                parse_measure(text)

    def test_forcing(self):
        """Test constant and manufactured forcing"""
        assert parse_forcing("constant:2.5") == ("constant", 2.5)
        assert parse_forcing("constant") == ("constant", 1.0)
        assert parse_forcing("manufactured") == ("manufactured", 1.0)
        with pytest.raises(ValidationError):
            parse_forcing("gaussian")


class TestRunConfig:
    """Tests for layer merging and RunConfig validation"""

    def test_defaults(self):
        """Test that only a command is needed"""
        config = build_run_config(merge_layers({"run": {"command": "eigen"}}))
        assert config.params.p == 2.0
        assert config.measure.kind == "lebesgue"
        assert config.num_seeds == 3

    def test_missing_command(self):
        """Test that a run without a command is rejected"""
        with pytest.raises(ValidationError) as excinfo:
            build_run_config(merge_layers())
        assert excinfo.value.field == "command"

    def test_none_does_not_override(self):
        """Test that unset values keep the earlier layer"""
        merged = merge_layers({"params": {"p": "1.5"}}, {"params": {"p": None}})
        assert merged["params"]["p"] == "1.5"

    def test_counterexample_needs_log_cantor(self):
        """Test the measure requirement of the counterexample command"""
        with pytest.raises(ValidationError) as excinfo:
            build_run_config(merge_layers({"run": {"command": "counterexample"}}))
        assert excinfo.value.field == "measure"

    def test_measure_q_fallback(self):
        """Test that the log-Cantor q defaults to params.q"""
        layer = {"run": {"command": "counterexample"}, "measure": {"kind": "log-cantor", "level": "6"}}
        assert build_run_config(merge_layers(layer)).measure_q == 3.0

    def test_ifs_spec_needs_source(self):
        """Test that an unknown IFS name is rejected"""
        with pytest.raises(ValidationError):
            MeasureSpec(kind="ifs", ifs="koch", depth=4)

    def test_simplicity_seeds_padded(self):
        """Test padding of a single seed up to num_seeds"""
        config = build_run_config(merge_layers({"run": {"command": "eigen", "seeds": [5]}}))
        assert simplicity_seeds(config) == [5, 6, 7]


class TestConfigFiles:
    """Tests for INI and manifest config files"""

    def test_ini_layers(self, tmp_path):
        """Test file values with a flag override"""
        path = tmp_path / "run.ini"
        path.write_text("[run]\nresolution = 12\nseeds = 3, 4\n\n[params]\np = 1.5\nq = 2.5\n")
        args = build_parser().parse_args(["eigen", "--config", str(path), "--resolution", "6"])
        config = load_run_config(args)
        assert config.resolution == 6
        assert config.seeds == (3, 4)
        assert config.params.p == 1.5
        assert config.params.q == 2.5

    def test_measure_flag_replaces_section(self, tmp_path):
        """Test that --measure drops the file's other measure keys"""
        path = tmp_path / "run.ini"
        path.write_text("[measure]\nkind = ifs\nifs = sierpinski\ndepth = 5\n")
        args = build_parser().parse_args(["eigen", "--config", str(path), "--measure", "lebesgue"])
        config = load_run_config(args)
        assert config.measure.kind == "lebesgue"
        assert config.measure.ifs is None

    def test_unknown_key(self, tmp_path):
        """Test that a typo in a key is rejected"""
        path = tmp_path / "run.ini"
        path.write_text("[params]\npp = 1.5\n")
        with pytest.raises(ValidationError) as excinfo:
            read_config_file(str(path))
        assert "pp" in excinfo.value.message

    def test_unknown_section(self, tmp_path):
        """Test that an unknown section is rejected"""
        path = tmp_path / "run.ini"
        path.write_text("[solver]\np = 1.5\n")
        with pytest.raises(ValidationError):
            read_config_file(str(path))

    def test_missing_file(self, tmp_path):
        """Test that a missing config file raises StorageError"""
        with pytest.raises(StorageError):
            read_config_file(str(tmp_path / "none.ini"))

    def test_json_without_config(self, tmp_path):
        """Test that a JSON file must be a manifest"""
        path = tmp_path / "other.json"
        path.write_text('{"status": "success"}')
        with pytest.raises(StorageError):
            read_config_file(str(path))


class TestMainErrors:
    """Tests for exit codes of failing runs"""

    def test_validation_before_output(self, out_dir, capsys):
        """Test that bad input exits 2 without creating the output directory"""
        code = main(["poisson", "--p", "2.5", "--out", str(out_dir)])
        assert code == EXIT_CODES["validation"]
        assert not out_dir.exists()
        error = last_error(capsys)
        assert error["error"] == "validation"
        assert error["field"] == "p"

    def test_budget_exceeded(self, out_dir, capsys):
        """Test the admissible depth in the budget error"""
        code = main(["measure-report", "--measure", "ifs:sierpinski:20", "--out", str(out_dir)])
        assert code == EXIT_CODES["validation"]
        error = last_error(capsys)
        assert error["error"] == "budget_exceeded"
        assert error["max_admissible"] == 14
        assert not out_dir.exists()

    def test_locked_output(self, out_dir, capsys):
        """Test that a locked output directory exits with the I/O code"""
        out_dir.mkdir()
        with output_lock(out_dir):
            code = main(["poisson", "--resolution", "4", "--out", str(out_dir)])
        assert code == EXIT_CODES["io"]
        assert last_error(capsys)["error"] == "io"

    def test_version(self, capsys):
        """Test the version flag"""
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert "plaplace-measures" in capsys.readouterr().out


class TestMainRuns:
    """Tests for complete command runs"""

    def test_poisson(self, out_dir):
        """Test artifacts and the manifest of a Poisson run"""
        assert main(["poisson", "--resolution", "8", "--out", str(out_dir)]) == EXIT_CODES["success"]
        for name in ("mesh.txt", "measure.csv", "measure.json", "solution.csv", "poisson.json", MANIFEST_NAME):
            assert (out_dir / name).exists()
        manifest = read(out_dir / MANIFEST_NAME)
        assert manifest["status"] == "success"
        assert "poisson.json" in manifest["artifacts"]
        assert manifest["config"]["run"]["resolution"] == 8
        report = read(out_dir / "poisson.json")
        assert report["converged"] is True
        assert report["max_u"] > 0.0
        assert report["mesh"]["vertices"] == 81
        assert report["mesh"]["interior_vertices"] == 49

    def test_rerun_from_manifest(self, out_dir, tmp_path):
        """Test that a manifest reproduces the run"""
        main(["poisson", "--resolution", "6", "--forcing", "constant:2", "--out", str(out_dir)])
        again = tmp_path / "again"
        code = main(["poisson", "--config", str(out_dir / MANIFEST_NAME), "--out", str(again)])
        assert code == EXIT_CODES["success"]
        first, second = read(out_dir / "poisson.json"), read(again / "poisson.json")
        assert second["max_u"] == pytest.approx(first["max_u"])
        assert read(again / MANIFEST_NAME)["config"]["run"]["forcing"] == "constant:2"

    def test_eigen(self, out_dir):
        """Test the eigen report with its simplicity check"""
        assert main(["eigen", "--resolution", "8", "--seed", "3", "--out", str(out_dir)]) == EXIT_CODES["success"]
        report = read(out_dir / "eigen.json")
        assert report["lambda"] > 0.0
        assert report["seeds"] == [3, 4, 5]
        assert report["sign_report"]["passed"] is True
        assert 0.0 < report["lower_bound"] <= report["lambda"] * (1 + 1e-9)
        assert (out_dir / "eigenfunction.csv").exists()
        assert report["mesh"]["triangles"] == 128
        assert read(out_dir / MANIFEST_NAME)["status"] == "success"

    def test_eigen_failed_simplicity_check(self, out_dir, monkeypatch):
        """Test exit code 3 and a check_failed manifest when a simplicity seed is excluded"""
        failing = SimplicityReport(
            seeds=(3, 4, 5),
            eigenvalues=(19.6, 19.6),
            excluded=(5,),
            lambda_spread=0.0,
            max_aligned_distance=0.0,
            distance_threshold=1e-6,
            passed=False,
        )
        monkeypatch.setattr(commands, "check_simplicity", lambda *args, **kwargs: failing)
        code = main(["eigen", "--resolution", "8", "--seed", "3", "--out", str(out_dir)])
        assert code == EXIT_CODES["non_convergence"]
        assert read(out_dir / MANIFEST_NAME)["status"] == "check_failed"
        report = read(out_dir / "eigen.json")
        assert report["converged"] is True
        assert report["simplicity"]["excluded"] == [5]

    def test_eigen_excluded_seed_alone_fails(self, out_dir, monkeypatch):
        """Test that an excluded seed fails the run even when the remaining seeds agree"""
        agreeing = SimplicityReport(
            seeds=(3, 4, 5),
            eigenvalues=(19.6, 19.6),
            excluded=(4,),
            lambda_spread=0.0,
            max_aligned_distance=0.0,
            distance_threshold=1e-6,
            passed=True,
        )
        monkeypatch.setattr(commands, "check_simplicity", lambda *args, **kwargs: agreeing)
        code = main(["eigen", "--resolution", "8", "--seed", "3", "--out", str(out_dir)])
        assert code == EXIT_CODES["non_convergence"]
        assert read(out_dir / MANIFEST_NAME)["status"] == "check_failed"

    def test_measure_report_ifs(self, out_dir):
        """Test the similarity dimension and open set data of a built-in IFS"""
        code = main(["measure-report", "--measure", "ifs:sierpinski:7", "--out", str(out_dir)])
        assert code == EXIT_CODES["success"]
        report = read(out_dir / "growth.json")
        assert report["similarity_dimension"] == pytest.approx(math.log(3) / math.log(2))
        assert report["growth"]["fitted_exponent"] == pytest.approx(math.log(3) / math.log(2), abs=0.05)
        assert 0.0 < report["similarity_max_ratio"] <= GROWTH_RATIO_BOUND
        assert report["open_set_condition"]["candidate"] == "unit_triangle"
        assert report["open_set_condition"]["holds"] is True
        assert report["measure"]["atoms"] == 3**7
        assert not (out_dir / "mesh.txt").exists()
        assert (out_dir / "growth.csv").exists()

    @pytest.mark.slow
    def test_poisson_non_convergence(self, out_dir):
        """Test exit code 3 and a flagged manifest when max_iter is hit"""
        code = main(["poisson", "--p", "1.5", "--max-iter", "1", "--resolution", "8", "--out", str(out_dir)])
        assert code == EXIT_CODES["non_convergence"]
        assert read(out_dir / MANIFEST_NAME)["status"] == "non_convergence"
        assert read(out_dir / "poisson.json")["regularization_check"] is not None

    def test_analyze(self, out_dir):
        """Test the regularity report of a linear run"""
        code = main(["analyze", "--resolution", "16", "--seed", "2", "--out", str(out_dir)])
        assert code == EXIT_CODES["success"]
        report = read(out_dir / "analysis.json")
        assert report["bound_alpha"] is None
        assert report["holder_fit"]["alpha_hat"] > 0.0
        assert "dimension_check" not in report
        assert report["mesh"]["vertices"] == 289
        assert (out_dir / "holder_pairs.csv").exists()

    @pytest.mark.slow
    def test_counterexample(self, out_dir):
        """Test the log-Cantor counterexample through the command line"""
        code = main(
            ["counterexample", "--measure", "log-cantor:3:6", "--resolutions", "32", "--seed", "4", "--out", str(out_dir)]
        )
        assert code in (EXIT_CODES["success"], EXIT_CODES["non_convergence"])
        report = read(out_dir / "counterexample.json")
        assert report["growth_increasing"] is True
        assert report["mass_bound_ok"] is True
        assert report["resolvable_level"] == 5
        assert read(out_dir / MANIFEST_NAME)["config"]["measure"]["level"] == 6
