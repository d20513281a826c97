# tests/test_eigen.py - Tests for the first eigenpair and its checks

import math

import numpy as np
import pytest

from core.config import CONVEXITY_SLACK
from core.exceptions import ValidationError
from logic.eigen import (
    EigenPair,
    aligned_distance,
    check_sign,
    check_simplicity,
    convexity_inequality,
    eigen_residual,
    holder_bridge,
    lambda_lower_bound,
    minimize_rayleigh,
    rayleigh_quotient,
)
from logic.measure import couple, lebesgue_measure
from logic.mesh import FeFunction, build_uniform_mesh

DIRICHLET_LAMBDA = 2.0 * math.pi**2


@pytest.fixture
def linear_pair(square_mesh, lebesgue, linear_params):
    return minimize_rayleigh(lebesgue, square_mesh, linear_params, seed=5)


class TestMinimizeRayleighLinear:
    """Tests for minimize_rayleigh at p = 2"""

    def test_dirichlet_eigenvalue(self, linear_pair):
        """Test that lambda approximates 2 pi^2 on the unit square"""
        assert linear_pair.converged is True
        assert abs(linear_pair.eigenvalue - DIRICHLET_LAMBDA) / DIRICHLET_LAMBDA < 0.05

    def test_normalization_and_sign(self, linear_pair, lebesgue):
        """Test unit mu-mass and the positive sign convention"""
        values = couple(linear_pair.u.mesh, lebesgue).values(linear_pair.u.coeffs)
        assert np.sum(lebesgue.weights * values**2) == pytest.approx(1.0, rel=1e-9)
        assert np.sum(lebesgue.weights * values) > 0.0
        assert linear_pair.u.vanishes_on_boundary()

    def test_rayleigh_history_non_increasing(self, linear_pair):
        """Test that accepted steps never raise the quotient"""
        assert np.all(np.diff(linear_pair.rayleigh_history) <= 0.0)

    def test_eigenvalue_is_rayleigh_quotient(self, linear_pair, lebesgue, linear_params):
        """Test that the reported eigenvalue is the exact Rayleigh quotient"""
        assert linear_pair.eigenvalue == pytest.approx(rayleigh_quotient(linear_pair.u, lebesgue, linear_params))

    def test_residual_small(self, linear_pair, lebesgue, linear_params):
        """Test the weak-form eigen residual"""
        assert eigen_residual(linear_pair, lebesgue, linear_params) < 1e-5

    def test_residual_detects_wrong_eigenvalue(self, linear_pair, lebesgue, linear_params):
        """Test that lambda raised by 10% leaves a residual of order 0.1 lambda max b_i"""
        mass = couple(linear_pair.u.mesh, lebesgue).load(
            couple(linear_pair.u.mesh, lebesgue).values(linear_pair.u.coeffs)
        )
        wrong = linear_pair.with_eigenvalue(1.1 * linear_pair.eigenvalue)
        residual = eigen_residual(wrong, lebesgue, linear_params)
        assert residual >= 0.05 * linear_pair.eigenvalue * float(np.abs(mass).max())

    def test_same_seed_reproducible(self, square_mesh, lebesgue, linear_params, linear_pair):
        """Test that a seed fixes the result"""
        again = minimize_rayleigh(lebesgue, square_mesh, linear_params, seed=5)
        assert again.eigenvalue == linear_pair.eigenvalue
        np.testing.assert_array_equal(again.u.coeffs, linear_pair.u.coeffs)

    @pytest.mark.slow
    def test_dirichlet_eigenvalue_fine_mesh(self, linear_params):
        """Test lambda within 2% of 2 pi^2 at resolution 64"""
        mesh = build_uniform_mesh("unit_square", 64)
        pair = minimize_rayleigh(lebesgue_measure(mesh), mesh, linear_params, seed=5)
        assert pair.converged is True
        assert abs(pair.eigenvalue - DIRICHLET_LAMBDA) / DIRICHLET_LAMBDA < 0.02

    @pytest.mark.slow
    def test_eigenvalue_decreases_under_refinement(self, linear_params):
        """Test lambda(16) > lambda(32) > lambda(64) > 2 pi^2"""
        eigenvalues = []
        for resolution in (16, 32, 64):
            mesh = build_uniform_mesh("unit_square", resolution)
            eigenvalues.append(minimize_rayleigh(lebesgue_measure(mesh), mesh, linear_params, seed=5).eigenvalue)
        assert eigenvalues[0] > eigenvalues[1] > eigenvalues[2] > DIRICHLET_LAMBDA

    def test_fractal_measure(self, square_mesh, sierpinski, linear_params):
        """Test a positive first eigenfunction for the Sierpinski measure"""
        pair = minimize_rayleigh(sierpinski, square_mesh, linear_params, seed=2)
        assert pair.converged is True
        assert pair.eigenvalue > 0.0
        assert check_sign(pair).passed is True


@pytest.mark.slow
class TestMinimizeRayleighNonlinear:
    """Tests for minimize_rayleigh at p = 1.5"""

    def test_converges_positive(self, coarse_mesh, subquadratic_params):
        """Test convergence and positivity at p = 1.5"""
        mu = lebesgue_measure(coarse_mesh)
        pair = minimize_rayleigh(mu, coarse_mesh, subquadratic_params, seed=1)
        assert pair.converged is True
        assert pair.eigenvalue > 0.0
        assert check_sign(pair).passed is True


class TestSignAndSimplicity:
    """Tests for check_sign, aligned_distance and check_simplicity"""

    def test_sign_of_plain_function_flipped(self, coarse_mesh):
        """Test that a negative bump passes after the sign convention"""
        u = FeFunction.interpolate(coarse_mesh, lambda x, y: -np.sin(np.pi * x) * np.sin(np.pi * y))
        report = check_sign(u)
        assert report.passed is True
        assert report.min_value >= 0.0

    def test_sign_change_fails(self, coarse_mesh):
        """Test that a sign-changing function fails"""
        u = FeFunction.interpolate(coarse_mesh, lambda x, y: np.sin(2 * np.pi * x) * np.sin(np.pi * y))
        assert check_sign(u).passed is False

    def test_aligned_distance(self):
        """Test that scalar multiples have zero aligned distance"""
        u = np.array([1.0, 2.0, 3.0])
        assert aligned_distance(u, -2.0 * u) == pytest.approx(0.0, abs=1e-15)
        assert aligned_distance(u, np.array([1.0, 0.0, 0.0])) == pytest.approx(3.0)

    def test_simplicity_passes(self, coarse_mesh, linear_params):
        """Test agreement of three seeds at p = 2"""
        mu = lebesgue_measure(coarse_mesh)
        report = check_simplicity(mu, coarse_mesh, linear_params, num_seeds=3)
        assert report.passed is True
        assert len(report.seeds) == 3
        assert report.lambda_spread < 1e-8

    def test_simplicity_needs_three_seeds(self, coarse_mesh, linear_params):
        """Test that fewer than three seeds are rejected"""
        mu = lebesgue_measure(coarse_mesh)
        with pytest.raises(ValidationError):
            check_simplicity(mu, coarse_mesh, linear_params, seeds=[1, 2])


class TestLowerBound:
    """Tests for lambda_lower_bound"""

    def test_bounds_first_eigenvalue(self, linear_pair, square_mesh, lebesgue, linear_params):
        """Test 0 < bound <= lambda at p = 2"""
        bound = lambda_lower_bound(lebesgue, square_mesh, linear_params, seed=1)
        assert 0.5 * linear_pair.eigenvalue < bound <= linear_pair.eigenvalue * (1 + 1e-9)


    @pytest.mark.slow
    def test_bounds_first_eigenvalue_subquadratic(self, coarse_mesh, subquadratic_params):
        """Test 0 < bound <= lambda at p = 1.5"""
        mu = lebesgue_measure(coarse_mesh)
        pair = minimize_rayleigh(mu, coarse_mesh, subquadratic_params, seed=3)
        bound = lambda_lower_bound(mu, coarse_mesh, subquadratic_params, seed=1)
        assert pair.converged is True
        assert 0.0 < bound <= pair.eigenvalue * (1 + 1e-4)


class TestInequalities:
    """Tests for holder_bridge and convexity_inequality"""

    def test_holder_bridge(self, linear_pair, lebesgue):
        """Test ||u||_p <= mu(Omega)^{1/p - 1/q} ||u||_q"""
        lhs, rhs = holder_bridge(linear_pair.u, lebesgue, 2.0, 3.0)
        assert lhs == pytest.approx(1.0, rel=1e-9)
        assert lhs <= rhs * (1 + 1e-12)

    def test_holder_bridge_order(self, linear_pair, lebesgue):
        """Test that q < p is rejected"""
        with pytest.raises(ValidationError):
            holder_bridge(linear_pair.u, lebesgue, 2.0, 1.5)

    def test_convexity(self, square_mesh):
        """Test the p-mean convexity inequality on two positive functions"""
        u = FeFunction.interpolate(square_mesh, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
        v = FeFunction.interpolate(square_mesh, lambda x, y: 16 * x * (1 - x) * y * (1 - y) * (1 + x))
        lhs, rhs = convexity_inequality(u, v, 1.5)
        assert lhs <= rhs * (1 + CONVEXITY_SLACK)

    @pytest.mark.slow
    def test_convexity_random_pairs(self):
        """Test the convexity inequality on 100 random positive pairs at resolution 32"""
        mesh = build_uniform_mesh("unit_square", 32)
        rng = np.random.default_rng(21)

        def random_positive():
            kx, ky = rng.integers(1, 3, size=2)
            a, b = rng.uniform(-1.0, 1.0, size=2)
            return FeFunction.interpolate(
                mesh, lambda x, y: np.sin(np.pi * x) ** kx * np.sin(np.pi * y) ** ky * np.exp(a * x + b * y)
            )

        for _ in range(100):
            u, v = random_positive(), random_positive()
            p = rng.uniform(1.1, 2.0)
            lhs, rhs = convexity_inequality(u, v, p)
            assert lhs <= rhs * (1 + CONVEXITY_SLACK)

    def test_convexity_rejects_negative(self, square_mesh):
        """Test that negative functions are rejected"""
        u = FeFunction.interpolate(square_mesh, lambda x, y: x - 0.5)
        with pytest.raises(ValidationError):
            convexity_inequality(u, u, 1.5)

    def test_convexity_needs_same_mesh(self, square_mesh, coarse_mesh):
        """Test that functions on different meshes are rejected"""
        with pytest.raises(ValidationError):
            convexity_inequality(FeFunction.zeros(square_mesh), FeFunction.zeros(coarse_mesh), 1.5)


class TestEigenPair:
    """Tests for EigenPair and rayleigh_quotient edge cases"""

    def test_non_finite_eigenvalue(self, coarse_mesh):
        """Test that an infinite eigenvalue is rejected"""
        with pytest.raises(ValidationError):
            EigenPair(math.inf, FeFunction.zeros(coarse_mesh), 0, ())

    def test_with_eigenvalue(self, coarse_mesh):
        """Test replacing the eigenvalue"""
        pair = EigenPair(1.0, FeFunction.zeros(coarse_mesh), 0, ())
        assert pair.with_eigenvalue(2.0).eigenvalue == 2.0

    def test_zero_function_rejected(self, coarse_mesh, linear_params):
        """Test that u = 0 has no Rayleigh quotient"""
        mu = lebesgue_measure(coarse_mesh)
        with pytest.raises(ValidationError):
            rayleigh_quotient(FeFunction.zeros(coarse_mesh), mu, linear_params)

    def test_rayleigh_quotient_scale_invariant(self, linear_params):
        """Test R(c u) = R(u)"""
        mesh = build_uniform_mesh("unit_square", 8)
        mu = lebesgue_measure(mesh)
        u = FeFunction.interpolate(mesh, lambda x, y: x * (1 - x) * y * (1 - y), zero_boundary=True)
        assert rayleigh_quotient(u.scaled(3.0), mu, linear_params) == pytest.approx(
            rayleigh_quotient(u, mu, linear_params)
        )
