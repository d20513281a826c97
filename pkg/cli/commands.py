# commands.py - Command handlers and the run driver

"""Each handler receives the resolved RunConfig and the prepared inputs and
writes its artifacts through an ArtifactWriter. ``run`` validates inputs
before the output directory is touched, holds the directory lock for the
whole command and always finishes with a manifest.
"""

import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from cli.run_config import RunConfig, parse_forcing
from core.config import (
    BUILTIN_IFS,
    GROWTH_RATIO_BOUND,
    LOG_CANTOR_CENTER,
    REGULARIZATION_CHECK_FACTOR,
    REGULARIZATION_CHECK_FLOOR,
)
from core.error_handling import handle_command_result
from core.exceptions import StorageError
from logic.analysis import (
    analyze_eigenfunction,
    counterexample_probe,
    dimension_consistency_check,
)
from logic.eigen import check_sign, check_simplicity, lambda_lower_bound, minimize_rayleigh
from logic.measure import (
    BUILTIN_IFS_FACTORIES,
    DiscreteMeasure,
    IfsSpec,
    check_open_set_condition,
    fit_growth_exponent,
    growth_sample,
    lebesgue_measure,
    log_cantor_measure,
    log_cantor_tree,
    max_growth_ratio,
    natural_measure,
    similarity_dimension,
    with_natural_probabilities,
)
from logic.mesh import Mesh, build_uniform_mesh
from logic.pde import solve_poisson
from render.common import to_payload
from render.reports import (
    growth_rows,
    holder_rows,
    render_counterexample_report,
    render_dimension_report,
    render_eigen_report,
    render_measure_report,
    render_poisson_report,
    render_regularity_report,
)
from storage.error_handling import output_lock
from storage.measure_files import read_ifs, write_measure
from storage.mesh_files import read_mesh, write_mesh
from storage.results import write_csv, write_function_csv, write_json, write_manifest

logger = logging.getLogger(__name__)

# Candidate open sets of the built-in IFS
OPEN_SET_CANDIDATES = {
    "sierpinski": "unit_triangle",
    "quadrants": "unit_square",
    "cantor-dust": "unit_square",
}


@dataclass
class Inputs:
    """Mesh, measure and IFS built from a RunConfig before any file is written."""

    mesh: Optional[Mesh]
    mu: Optional[DiscreteMeasure]
    ifs: Optional[IfsSpec] = None


class ArtifactWriter:
    """Write result files into the output directory and remember their names."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.names: list[str] = []

    def _path(self, name: str) -> Path:
        self.names.append(name)
        return self.directory / name

    def json(self, name: str, payload: dict) -> None:
        write_json(self._path(name), payload)

    def csv(self, name: str, header: list[str], rows: np.ndarray) -> None:
        write_csv(self._path(name), header, rows)

    def function(self, name: str, u, column: str = "u") -> None:
        write_function_csv(u, self._path(name), column)

    def mesh(self, mesh: Mesh) -> None:
        write_mesh(mesh, self._path("mesh.txt"))

    def measure(self, mu: DiscreteMeasure) -> None:
        write_measure(mu, self.directory)
        self.names.extend(["measure.csv", "measure.json"])


# --- Inputs ---


def build_mesh(config: RunConfig) -> Mesh:
    if config.mesh:
        return read_mesh(config.mesh)
    return build_uniform_mesh(config.domain, config.resolution)


def load_ifs(source: str) -> IfsSpec:
    """Built-in IFS (with natural probabilities) or an IFS file."""
    if source in BUILTIN_IFS:
        return with_natural_probabilities(BUILTIN_IFS_FACTORIES[source]())
    return read_ifs(source)


def build_measure(config: RunConfig, mesh: Optional[Mesh]) -> tuple[DiscreteMeasure, Optional[IfsSpec]]:
    spec = config.measure
    if spec.kind == "lebesgue":
        return lebesgue_measure(mesh), None
    if spec.kind == "ifs":
        ifs = load_ifs(spec.ifs)
        return natural_measure(ifs, spec.depth), ifs
    return log_cantor_measure(config.measure_q, spec.level, (LOG_CANTOR_CENTER, spec.r0)), None


def prepare_inputs(config: RunConfig) -> Inputs:
    """Build everything a command needs; raises before any output exists."""
    if config.command == "counterexample":
        # The counterexample builds its own meshes and measures; check the tree now
        log_cantor_tree(config.measure_q, config.measure.level, LOG_CANTOR_CENTER, config.measure.r0)
        return Inputs(mesh=None, mu=None)
    needs_mesh = config.command != "measure-report" or config.measure.kind == "lebesgue"
    mesh = build_mesh(config) if needs_mesh else None
    mu, ifs = build_measure(config, mesh)
    return Inputs(mesh=mesh, mu=mu, ifs=ifs)


def forcing_values(config: RunConfig, mu: DiscreteMeasure) -> np.ndarray:
    """Right-hand side at the atoms: a constant, or 2 pi^2 sin(pi x) sin(pi y)."""
    kind, constant = parse_forcing(config.forcing)
    if kind == "manufactured":
        x, y = mu.points[:, 0], mu.points[:, 1]
        return 2.0 * math.pi**2 * np.sin(math.pi * x) * np.sin(math.pi * y)
    return np.full(mu.size, constant)


def _write_inputs(writer: ArtifactWriter, inputs: Inputs) -> None:
    if inputs.mesh is not None:
        writer.mesh(inputs.mesh)
    if inputs.mu is not None:
        writer.measure(inputs.mu)


# --- Handlers ---


def status_of(converged: bool) -> str:
    return "success" if converged else "non_convergence"


def run_poisson(config: RunConfig, inputs: Inputs, writer: ArtifactWriter) -> str:
    mesh, mu, params = inputs.mesh, inputs.mu, config.params
    f = forcing_values(config, mu)
    solution = solve_poisson(f, mu, mesh, params)

    regularization_check = None
    if params.p < 2.0:
        other_reg = max(params.grad_reg * REGULARIZATION_CHECK_FACTOR, REGULARIZATION_CHECK_FLOOR)
        other = solve_poisson(f, mu, mesh, params.replace(grad_reg=other_reg), initial=solution.u)
        regularization_check = {
            "grad_reg": other_reg,
            "final_energy": other.final_energy,
            "converged": other.converged,
            "max_difference": float(np.max(np.abs(other.u.coeffs - solution.u.coeffs))),
        }
        logger.info(f"Regularization check at grad_reg={other_reg:g}: "
                    f"max difference {regularization_check['max_difference']:.3e}")

    writer.function("solution.csv", solution.u)
    writer.json("poisson.json", render_poisson_report(solution, params, regularization_check))
    return status_of(solution.converged)


def simplicity_seeds(config: RunConfig) -> list[int]:
    """Configured seeds, padded with seeds[0] + i up to num_seeds."""
    seeds = list(config.seeds)
    offset = 1
    while len(seeds) < config.num_seeds:
        if config.seeds[0] + offset not in seeds:
            seeds.append(config.seeds[0] + offset)
        offset += 1
    return seeds


def run_eigen(config: RunConfig, inputs: Inputs, writer: ArtifactWriter) -> str:
    mesh, mu, params = inputs.mesh, inputs.mu, config.params
    seed = config.seeds[0]
    pair = minimize_rayleigh(mu, mesh, params, seed=seed)
    sign_report = check_sign(pair)

    simplicity = check_simplicity(mu, mesh, params, num_seeds=config.num_seeds, seeds=simplicity_seeds(config))
    lower_bound = lambda_lower_bound(mu, mesh, params, seed=seed)

    writer.function("eigenfunction.csv", pair.u)
    writer.json("eigen.json", render_eigen_report(pair, params, sign_report, simplicity, lower_bound))
    if not pair.converged:
        return "non_convergence"
    if not simplicity.passed or simplicity.excluded:
        logger.warning(
            f"Simplicity check: passed={simplicity.passed}, excluded seeds {list(simplicity.excluded)}"
        )
        return "check_failed"
    return "success"


def run_measure_report(config: RunConfig, inputs: Inputs, writer: ArtifactWriter) -> str:
    mu, params = inputs.mu, config.params
    centers, radii = growth_sample(mu, config.seeds[0])
    growth = fit_growth_exponent(mu, centers, radii)
    dimension = dimension_consistency_check(mu, params, seed=config.seeds[0], growth=growth)

    dimension_value, open_set, ratio = None, None, None
    if inputs.ifs is not None and len(inputs.ifs.maps) > 1:
        dimension_value = similarity_dimension(inputs.ifs)
        ratio = max_growth_ratio(mu, centers, radii, dimension_value)
        if ratio > GROWTH_RATIO_BOUND:
            logger.warning(f"mu(B(x, r)) / r^s reaches {ratio:.3g}, above {GROWTH_RATIO_BOUND}")
        candidate = OPEN_SET_CANDIDATES.get(config.measure.ifs, config.domain)
        report = check_open_set_condition(inputs.ifs, candidate)
        open_set = {"candidate": candidate, **to_payload(report)}

    writer.csv("growth.csv", ["radius", "mean_log_mass"], growth_rows(growth))
    writer.json(
        "growth.json",
        render_measure_report(mu, growth, dimension, dimension_value, open_set, ratio),
    )
    return "success"


def run_analyze(config: RunConfig, inputs: Inputs, writer: ArtifactWriter) -> str:
    mesh, mu, params = inputs.mesh, inputs.mu, config.params
    seed = config.seeds[0]
    pair = minimize_rayleigh(mu, mesh, params, seed=seed)
    report = analyze_eigenfunction(pair, mu, params, seed=seed, pair_budget=config.pair_budget)

    payload = render_regularity_report(report, pair)
    if params.p < 2.0:
        payload["dimension_check"] = render_dimension_report(
            dimension_consistency_check(mu, params, seed=seed)
        )
    writer.function("eigenfunction.csv", pair.u)
    writer.csv("holder_pairs.csv", ["distance", "increment"], holder_rows(report.holder_fit))
    writer.json("analysis.json", payload)
    return status_of(pair.converged)


def run_counterexample(config: RunConfig, inputs: Inputs, writer: ArtifactWriter) -> str:
    params = config.params.replace(q=config.measure_q)
    report = counterexample_probe(
        params,
        level=config.measure.level,
        resolutions=config.resolutions,
        r0=config.measure.r0,
        seed=config.seeds[0],
        pair_budget=config.pair_budget,
    )
    writer.json("counterexample.json", render_counterexample_report(report))
    return status_of(report.converged)


COMMAND_HANDLERS: dict[str, Callable[[RunConfig, Inputs, ArtifactWriter], str]] = {
    "poisson": run_poisson,
    "eigen": run_eigen,
    "measure-report": run_measure_report,
    "analyze": run_analyze,
    "counterexample": run_counterexample,
}


def run(config: RunConfig) -> int:
    """Execute one command and return its exit code.

    Raises:
        ValidationError: Before the output directory is created
        SolverError: After a manifest with status "failed" was written
        StorageError: If the output directory cannot be written or is locked
    """
    inputs = prepare_inputs(config)
    handler = COMMAND_HANDLERS[config.command]

    try:
        config.output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise StorageError(f"Cannot create output directory: {e}", str(config.output_dir))

    logger.info(f"Running {config.command} into {config.output_dir}")
    start = time.perf_counter()
    with output_lock(config.output_dir):
        writer = ArtifactWriter(config.output_dir)
        status = "failed"
        try:
            _write_inputs(writer, inputs)
            status = handler(config, inputs, writer)
        finally:
            write_manifest(
                config.output_dir,
                config.to_dict(),
                config.seeds,
                time.perf_counter() - start,
                status,
                writer.names,
            )
    return handle_command_result(status, config.command)
