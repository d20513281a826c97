# render/__init__.py - Payload rendering module

from render.common import render_mesh_summary, render_params, to_payload
from render.reports import (
    growth_rows,
    holder_rows,
    render_counterexample_report,
    render_dimension_report,
    render_eigen_report,
    render_growth_report,
    render_holder_fit,
    render_measure_report,
    render_poisson_report,
    render_regularity_report,
    render_sign_report,
    render_simplicity_report,
)

__all__ = [
    # Common
    "to_payload",
    "render_params",
    "render_mesh_summary",
    # Reports
    "render_poisson_report",
    "render_eigen_report",
    "render_sign_report",
    "render_simplicity_report",
    "render_measure_report",
    "render_growth_report",
    "render_dimension_report",
    "render_holder_fit",
    "render_regularity_report",
    "render_counterexample_report",
    # CSV tables
    "growth_rows",
    "holder_rows",
]
