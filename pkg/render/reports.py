# render/reports.py - Per-command report payloads and CSV tables

import math
from typing import Optional

import numpy as np

from logic.analysis import (
    CounterexampleReport,
    DimensionReport,
    HolderFit,
    RegularityReport,
)
from logic.eigen import EigenPair, SignReport, SimplicityReport
from logic.measure import DiscreteMeasure, GrowthReport
from logic.pde import PoissonSolution, SolverParams
from render.common import render_mesh_summary, render_params, to_payload


def render_poisson_report(
    solution: PoissonSolution,
    params: SolverParams,
    regularization_check: Optional[dict] = None,
) -> dict:
    """poisson.json: iterations, energies, residual and flags."""
    coeffs = solution.u.coeffs
    return {
        "iterations": solution.iterations,
        "final_energy": solution.final_energy,
        "residual_norm": solution.residual_norm,
        "converged": solution.converged,
        "borderline_q": solution.borderline_q,
        "energy_history": list(solution.energy_history),
        "max_u": float(coeffs.max()),
        "min_u": float(coeffs.min()),
        "params": render_params(params),
        "regularization_check": regularization_check,
        "mesh": render_mesh_summary(solution.u.mesh),
    }


def render_sign_report(report: SignReport) -> dict:
    return to_payload(report)


def render_simplicity_report(report: SimplicityReport) -> dict:
    return to_payload(report)


def render_eigen_report(
    pair: EigenPair,
    params: SolverParams,
    sign_report: SignReport,
    simplicity: Optional[SimplicityReport] = None,
    lower_bound: Optional[float] = None,
) -> dict:
    """eigen.json: lambda, iterations, residual, sign report and seed agreement."""
    return {
        "lambda": pair.eigenvalue,
        "iterations": pair.iterations,
        "residual": pair.residual_norm,
        "converged": pair.converged,
        "seed": pair.seed,
        "rayleigh_history": list(pair.rayleigh_history),
        "sign_report": render_sign_report(sign_report),
        "seeds": list(simplicity.seeds) if simplicity else [pair.seed],
        "lambda_spread": simplicity.lambda_spread if simplicity else 0.0,
        "simplicity": render_simplicity_report(simplicity) if simplicity else None,
        "lower_bound": lower_bound,
        "params": render_params(params),
        "mesh": render_mesh_summary(pair.u.mesh),
    }


def render_growth_report(growth: GrowthReport) -> dict:
    return to_payload(growth)


def growth_rows(growth: GrowthReport) -> np.ndarray:
    """growth.csv rows: radius, mean log-mass over centers."""
    return np.column_stack([growth.radii, growth.mean_log_mass])


def render_measure_report(
    mu: DiscreteMeasure,
    growth: GrowthReport,
    dimension: Optional[DimensionReport] = None,
    similarity_dimension: Optional[float] = None,
    open_set: Optional[dict] = None,
    similarity_max_ratio: Optional[float] = None,
) -> dict:
    """growth.json: measure header, growth fit and optional dimension data.

    similarity_max_ratio is the largest sampled mu(B(x, r)) / r^s at the
    similarity dimension s.
    """
    payload = {
        "measure": to_payload(mu.header()),
        "growth": render_growth_report(growth),
        "similarity_dimension": similarity_dimension,
        "similarity_max_ratio": similarity_max_ratio,
        "open_set_condition": open_set,
    }
    if dimension is not None:
        payload["dimension_check"] = render_dimension_report(dimension)
    return payload


def render_dimension_report(report: DimensionReport) -> dict:
    payload = to_payload(report)
    payload.pop("growth")
    return payload


def render_holder_fit(fit: HolderFit) -> dict:
    return to_payload(fit)


def holder_rows(fit: HolderFit) -> np.ndarray:
    """holder_pairs.csv rows: distance, increment."""
    return np.column_stack([fit.distances, fit.increments])


def render_regularity_report(report: RegularityReport, pair: EigenPair) -> dict:
    """analysis.json: sup check, Hölder fit and a priori exponents."""
    payload = to_payload(report)
    payload["lambda"] = pair.eigenvalue
    payload["converged"] = pair.converged
    payload["mesh"] = render_mesh_summary(pair.u.mesh)
    return payload


def render_counterexample_report(report: CounterexampleReport) -> dict:
    payload = to_payload(report)
    payload["growth_ratios"] = {
        str(alpha): [r if math.isfinite(r) else None for r in ratios]
        for alpha, ratios in report.growth_ratios.items()
    }
    payload["onsets"] = {str(alpha): onset for alpha, onset in report.onsets.items()}
    return payload
