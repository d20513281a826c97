# run_config.py - Run configuration: INI files, manifests and flag overrides

"""Resolve the configuration of one command-line run.

Precedence is built-in defaults < config file < command-line flags. The
config file is either an INI file::

    [run]
    command = eigen
    domain = unit_square
    resolution = 64
    seeds = 20240607, 20240608
    output_dir = out/eigen

    [params]
    p = 2.0
    q = 3.0

    [measure]
    kind = ifs
    ifs = sierpinski
    depth = 7

    [analysis]
    resolutions = 32, 64, 128
    pair_budget = 4000

or the ``manifest.json`` of a previous run, whose ``config`` entry is the
fully resolved configuration.
"""

import configparser
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from core.config import (
    BUILTIN_DOMAINS,
    BUILTIN_IFS,
    COMMANDS,
    DEFAULT_DESCENT,
    DEFAULT_GRAD_REG,
    DEFAULT_LOG_CANTOR_R0,
    DEFAULT_MAX_ITER,
    DEFAULT_RESOLUTIONS,
    DEFAULT_SEED,
    DEFAULT_TOL_ENERGY,
    DEFAULT_TOL_RESIDUAL,
    HOLDER_MIN_PAIRS,
    MEASURE_KINDS,
    MIN_RESOLUTION,
    SIMPLICITY_MIN_SEEDS,
)
from core.exceptions import StorageError, ValidationError
from core.validation import (
    ensure_valid,
    parse_float,
    parse_int,
    parse_int_list,
    validate_in_list,
    validate_int_range,
)
from logic.pde import SolverParams
from storage.results import read_json

logger = logging.getLogger(__name__)

FORCING_KINDS = ["constant", "manufactured"]

DEFAULTS = {
    "run": {
        "command": None,
        "domain": "unit_square",
        "mesh": None,
        "resolution": 32,
        "seeds": [DEFAULT_SEED],
        "output_dir": "out",
        "forcing": "constant:1",
    },
    "params": {
        "p": 2.0,
        "q": 3.0,
        "grad_reg": DEFAULT_GRAD_REG,
        "tol_energy": DEFAULT_TOL_ENERGY,
        "tol_residual": DEFAULT_TOL_RESIDUAL,
        "max_iter": DEFAULT_MAX_ITER,
        "descent": DEFAULT_DESCENT,
    },
    "measure": {
        "kind": "lebesgue",
        "ifs": None,
        "depth": None,
        "q": None,
        "level": None,
        "r0": DEFAULT_LOG_CANTOR_R0,
    },
    "analysis": {
        "resolutions": list(DEFAULT_RESOLUTIONS),
        "pair_budget": HOLDER_MIN_PAIRS,
        "num_seeds": SIMPLICITY_MIN_SEEDS,
    },
}


@dataclass(frozen=True)
class MeasureSpec:
    """Which measure a run builds.

    Attributes:
        kind: "lebesgue", "ifs" or "log-cantor"
        ifs: Built-in IFS name or path of a plain-text IFS file (kind "ifs")
        depth: Word length of the natural measure (kind "ifs")
        q: Gauge exponent of the log-Cantor measure (defaults to params.q)
        level: Tree depth of the log-Cantor measure
        r0: Base ball diameter of the log-Cantor measure
    """

    kind: str = "lebesgue"
    ifs: Optional[str] = None
    depth: Optional[int] = None
    q: Optional[float] = None
    level: Optional[int] = None
    r0: float = DEFAULT_LOG_CANTOR_R0

    def __post_init__(self):
        ensure_valid(validate_in_list(self.kind, MEASURE_KINDS, "measure kind"), "measure")
        if self.kind == "ifs":
            if not self.ifs:
                raise ValidationError("measure", "kind 'ifs' needs an IFS name or file")
            ensure_valid(validate_int_range(self.depth, 1, None, "depth"), "depth")
            if self.ifs not in BUILTIN_IFS and not Path(self.ifs).exists():
                raise ValidationError(
                    "measure", f"'{self.ifs}' is neither a built-in IFS ({', '.join(BUILTIN_IFS)}) nor a file"
                )
        if self.kind == "log-cantor":
            ensure_valid(validate_int_range(self.level, 0, None, "level"), "level")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "ifs": self.ifs,
            "depth": self.depth,
            "q": self.q,
            "level": self.level,
            "r0": self.r0,
        }


def parse_measure(text: str) -> dict:
    """Parse lebesgue | ifs:PATH_OR_NAME:DEPTH | log-cantor:Q:LEVEL into [measure] keys."""
    text = text.strip()
    if text == "lebesgue":
        return {"kind": "lebesgue"}
    if text.startswith("ifs:"):
        source, _, depth = text[len("ifs:") :].rpartition(":")
        if not source:
            raise ValidationError("measure", "expected ifs:PATH_OR_NAME:DEPTH")
        return {"kind": "ifs", "ifs": source, "depth": depth}
    if text.startswith("log-cantor:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError("measure", "expected log-cantor:Q:LEVEL")
        return {"kind": "log-cantor", "q": parts[1], "level": parts[2]}
    raise ValidationError("measure", "expected lebesgue, ifs:PATH_OR_NAME:DEPTH or log-cantor:Q:LEVEL")


def parse_forcing(text: str) -> tuple[str, float]:
    """Parse constant:C or manufactured into (kind, constant)."""
    kind, _, value = str(text).partition(":")
    ensure_valid(validate_in_list(kind, FORCING_KINDS, "forcing"), "forcing")
    if kind == "manufactured":
        return kind, 1.0
    constant, error_msg = parse_float(value or "1", "forcing")
    if error_msg:
        raise ValidationError("forcing", error_msg)
    return kind, constant


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved and validated configuration of one run."""

    command: str
    params: SolverParams
    measure: MeasureSpec
    domain: str = "unit_square"
    mesh: Optional[str] = None
    resolution: int = 32
    seeds: tuple[int, ...] = (DEFAULT_SEED,)
    output_dir: Path = Path("out")
    forcing: str = "constant:1"
    resolutions: tuple[int, ...] = tuple(DEFAULT_RESOLUTIONS)
    pair_budget: int = HOLDER_MIN_PAIRS
    num_seeds: int = SIMPLICITY_MIN_SEEDS

    def __post_init__(self):
        ensure_valid(validate_in_list(self.command, COMMANDS, "command"), "command")
        if self.mesh is None:
            ensure_valid(validate_in_list(self.domain, list(BUILTIN_DOMAINS), "domain"), "domain")
        elif not Path(self.mesh).exists():
            raise ValidationError("mesh", f"mesh file {self.mesh} does not exist")
        ensure_valid(validate_int_range(self.resolution, MIN_RESOLUTION, None, "resolution"), "resolution")
        if not self.seeds:
            raise ValidationError("seeds", "at least one seed is required")
        for resolution in self.resolutions:
            ensure_valid(validate_int_range(resolution, MIN_RESOLUTION, None, "resolutions"), "resolutions")
        ensure_valid(validate_int_range(self.pair_budget, HOLDER_MIN_PAIRS, None, "pair_budget"), "pair_budget")
        ensure_valid(validate_int_range(self.num_seeds, SIMPLICITY_MIN_SEEDS, None, "num_seeds"), "num_seeds")
        parse_forcing(self.forcing)
        if self.command == "counterexample":
            if self.params.p != 2.0:
                raise ValidationError("p", "counterexample runs at p = 2")
            if self.measure.kind != "log-cantor":
                raise ValidationError("measure", "counterexample needs a log-cantor measure")

    @property
    def measure_q(self) -> float:
        return self.measure.q if self.measure.q is not None else self.params.q

    def to_dict(self) -> dict:
        return {
            "run": {
                "command": self.command,
                "domain": self.domain,
                "mesh": self.mesh,
                "resolution": self.resolution,
                "seeds": list(self.seeds),
                "output_dir": str(self.output_dir),
                "forcing": self.forcing,
            },
            "params": self.params.to_dict(),
            "measure": self.measure.to_dict(),
            "analysis": {
                "resolutions": list(self.resolutions),
                "pair_budget": self.pair_budget,
                "num_seeds": self.num_seeds,
            },
        }


# --- Layer loading ---


def read_config_file(path: str) -> dict:
    """Read an INI config file or a manifest.json into section dicts.

    Raises:
        StorageError: If the file cannot be read or parsed
    """
    path = Path(path)
    if not path.exists():
        raise StorageError("Config file not found", str(path))
    if path.suffix == ".json":
        manifest = read_json(path)
        if not isinstance(manifest, dict) or "config" not in manifest:
            raise StorageError("JSON config must be a manifest with a 'config' entry", str(path))
        logger.info(f"Loaded configuration from manifest {path}")
        return manifest["config"]

    parser = configparser.ConfigParser()
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except (OSError, configparser.Error) as e:
        raise StorageError(f"Cannot read config file: {e}", str(path))
    unknown = set(parser.sections()) - set(DEFAULTS)
    if unknown:
        raise ValidationError("config", f"unknown section(s): {', '.join(sorted(unknown))}")
    layer = {}
    for section in parser.sections():
        known = DEFAULTS[section]
        for key, value in parser.items(section):
            if key not in known:
                raise ValidationError("config", f"unknown key '{key}' in [{section}]")
            layer.setdefault(section, {})[key] = value
    logger.info(f"Loaded configuration from {path}")
    return layer


def merge_layers(*layers: dict) -> dict:
    """Later layers win; None values do not override."""
    merged = {section: dict(values) for section, values in DEFAULTS.items()}
    for layer in layers:
        for section, values in (layer or {}).items():
            if section not in merged:
                raise ValidationError("config", f"unknown section '{section}'")
            for key, value in values.items():
                if value is not None:
                    merged[section][key] = value
    return merged


def _float(value, name: str, optional: bool = False) -> Optional[float]:
    if value is None and optional:
        return None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    parsed, error_msg = parse_float(value, name)
    if error_msg or parsed is None:
        raise ValidationError(name, error_msg or "a value is required")
    return parsed


def _int(value, name: str, optional: bool = False) -> Optional[int]:
    if value is None and optional:
        return None
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    parsed, error_msg = parse_int(value, name)
    if error_msg or parsed is None:
        raise ValidationError(name, error_msg or "a value is required")
    return parsed


def _int_list(value, name: str) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [_int(v, name) for v in value]
    parsed, error_msg = parse_int_list(value, name)
    if error_msg or not parsed:
        raise ValidationError(name, error_msg or "at least one value is required")
    return parsed


def build_run_config(merged: dict) -> RunConfig:
    """Type-convert merged sections and validate them into a RunConfig."""
    run, params, measure, analysis = (merged[s] for s in ("run", "params", "measure", "analysis"))
    if not run.get("command"):
        raise ValidationError("command", "no command given")

    solver_params = SolverParams(
        p=_float(params["p"], "p"),
        q=_float(params["q"], "q"),
        grad_reg=_float(params["grad_reg"], "grad_reg"),
        tol_energy=_float(params["tol_energy"], "tol_energy"),
        tol_residual=_float(params["tol_residual"], "tol_residual"),
        max_iter=_int(params["max_iter"], "max_iter"),
        descent=str(params["descent"]),
    )
    measure_spec = MeasureSpec(
        kind=str(measure["kind"]),
        ifs=measure.get("ifs"),
        depth=_int(measure.get("depth"), "depth", optional=True),
        q=_float(measure.get("q"), "q", optional=True),
        level=_int(measure.get("level"), "level", optional=True),
        r0=_float(measure.get("r0"), "r0"),
    )
    return RunConfig(
        command=str(run["command"]),
        params=solver_params,
        measure=measure_spec,
        domain=str(run["domain"]),
        mesh=run.get("mesh"),
        resolution=_int(run["resolution"], "resolution"),
        seeds=tuple(_int_list(run["seeds"], "seeds")),
        output_dir=Path(run["output_dir"]),
        forcing=str(run["forcing"]),
        resolutions=tuple(_int_list(analysis["resolutions"], "resolutions")),
        pair_budget=_int(analysis["pair_budget"], "pair_budget"),
        num_seeds=_int(analysis["num_seeds"], "num_seeds"),
    )


def flag_layer(args) -> dict:
    """Map parsed command-line flags onto config sections (unset flags are None)."""
    layer = {
        "run": {
            "command": args.command,
            "domain": args.domain,
            "mesh": args.mesh,
            "resolution": args.resolution,
            "seeds": args.seed,
            "output_dir": args.out,
            "forcing": args.forcing,
        },
        "params": {
            "p": args.p,
            "q": args.q,
            "grad_reg": args.grad_reg,
            "tol_energy": args.tol_energy,
            "tol_residual": args.tol_residual,
            "max_iter": args.max_iter,
            "descent": args.descent,
        },
        "measure": {"r0": args.r0},
        "analysis": {
            "resolutions": args.resolutions,
            "pair_budget": args.pair_budget,
            "num_seeds": args.num_seeds,
        },
    }
    if args.measure:
        layer["measure"].update(parse_measure(args.measure))
    return layer


def load_run_config(args, file_layer: Optional[dict] = None) -> RunConfig:
    """Resolve defaults < config file < flags into a validated RunConfig."""
    if file_layer is None and getattr(args, "config", None):
        file_layer = read_config_file(args.config)
    layers: Sequence[dict] = [file_layer or {}, flag_layer(args)]
    if file_layer and "measure" in file_layer and args.measure:
        # A measure flag replaces the whole [measure] section of the file
        file_layer = dict(file_layer)
        file_layer["measure"] = {"r0": file_layer["measure"].get("r0")}
        layers = [file_layer, flag_layer(args)]
    return build_run_config(merge_layers(*layers))
