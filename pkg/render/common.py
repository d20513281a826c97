# render/common.py - Common payload conversion

import dataclasses
from pathlib import Path

import numpy as np

from logic.measure import DiscreteMeasure
from logic.mesh import FeFunction, Mesh


def to_payload(value):
    """Convert a result object into plain JSON-ready Python values.

    Dataclass fields declared with repr=False, and embedded functions,
    meshes or measures, are left out; arrays become lists.
    """
    if isinstance(value, (FeFunction, Mesh, DiscreteMeasure)):
        return None
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: to_payload(getattr(value, f.name))
            for f in dataclasses.fields(value)
            if f.repr and not isinstance(getattr(value, f.name), (FeFunction, Mesh, DiscreteMeasure))
        }
    if isinstance(value, dict):
        return {str(k): to_payload(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_payload(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value


def render_params(params) -> dict:
    """Solver parameters plus the derived q bound."""
    payload = params.to_dict()
    payload["q_max"] = params.q_max
    payload["borderline_q"] = params.borderline_q
    return payload


def render_mesh_summary(mesh: Mesh) -> dict:
    payload = mesh.summary()
    payload["min_edge"] = mesh.min_edge
    payload["interior_vertices"] = int(len(mesh.interior))
    return payload
