"""Pytest configuration and fixtures"""

import pytest

from logic.measure import lebesgue_measure, natural_measure, sierpinski_ifs, with_natural_probabilities
from logic.mesh import build_uniform_mesh
from logic.pde import SolverParams


@pytest.fixture
def square_mesh():
    """Unit square, resolution 16"""
    return build_uniform_mesh("unit_square", 16)


@pytest.fixture
def coarse_mesh():
    """Unit square, resolution 8"""
    return build_uniform_mesh("unit_square", 8)


@pytest.fixture
def lebesgue(square_mesh):
    """Lebesgue measure on square_mesh"""
    return lebesgue_measure(square_mesh)


@pytest.fixture
def sierpinski():
    """Natural Sierpinski measure at depth 6 (729 atoms)"""
    return natural_measure(with_natural_probabilities(sierpinski_ifs()), 6)


@pytest.fixture
def linear_params():
    """p = 2, q = 3"""
    return SolverParams(p=2.0, q=3.0)


@pytest.fixture
def subquadratic_params():
    """p = 1.5, q = 3 (admissible range q <= 6)"""
    return SolverParams(p=1.5, q=3.0, tol_residual=1e-7)


@pytest.fixture
def out_dir(tmp_path):
    """Empty output directory for command runs"""
    return tmp_path / "out"
