# tests/test_mesh.py - Unit tests for polygons, meshes and P1 functions

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.exceptions import ValidationError
from logic.mesh import (
    FeFunction,
    Mesh,
    Polygon,
    build_uniform_mesh,
    dirichlet_energy,
    get_domain,
    gradient,
    validate_polygon,
)

L_SHAPE = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]


class TestValidatePolygon:
    """Tests for validate_polygon function"""

    def test_square_is_valid(self):
        """Test that the unit square passes"""
        assert validate_polygon([(0, 0), (1, 0), (1, 1), (0, 1)]) == (True, None)

    def test_too_few_vertices(self):
        """Test that two points are rejected"""
        is_valid, error_msg = validate_polygon([(0, 0), (1, 0)])
        assert is_valid is False
        assert "at least 3" in error_msg

    def test_self_intersecting(self):
        """Test that a bow tie is rejected as not simple"""
        is_valid, error_msg = validate_polygon([(0, 0), (2, 2), (2, 0), (0, 1)])
        assert is_valid is False
        assert "not simple" in error_msg

    def test_collinear_vertex(self):
        """Test that a vertex on a straight edge is rejected"""
        assert validate_polygon([(0, 0), (0.5, 0), (1, 0), (0, 1)])[0] is False

    def test_zero_area(self):
        """Test that a degenerate polygon is rejected"""
        assert validate_polygon([(0, 0), (1, 0), (2, 0)])[0] is False


class TestPolygon:
    """Tests for Polygon and get_domain"""

    def test_clockwise_input_reoriented(self):
        """Test that clockwise vertices are stored counterclockwise"""
        polygon = Polygon.from_points([(0, 0), (0, 1), (1, 1), (1, 0)])
        assert polygon.area == pytest.approx(1.0)

    def test_builtin_domains(self):
        """Test the built-in unit square and triangle"""
        square = get_domain("unit_square")
        triangle = get_domain("unit_triangle")
        assert square.diameter == pytest.approx(math.sqrt(2.0))
        assert triangle.area == pytest.approx(math.sqrt(3.0) / 4.0)
        assert square.is_convex() and triangle.is_convex()

    def test_l_shape_not_convex(self):
        """Test convexity of a non-convex polygon"""
        assert get_domain(L_SHAPE).is_convex() is False

    def test_unknown_domain(self):
        """Test that an unknown name raises ValidationError"""
        with pytest.raises(ValidationError) as excinfo:
            get_domain("disc")
        assert excinfo.value.field == "domain"


class TestBuildUniformMesh:
    """Tests for build_uniform_mesh function"""

    def test_unit_square_counts(self):
        """Test vertex and triangle counts on the unit square"""
        mesh = build_uniform_mesh("unit_square", 8)
        assert mesh.num_vertices == 81
        assert mesh.num_triangles == 128
        assert mesh.area == pytest.approx(1.0)
        assert len(mesh.interior) == 49

    def test_unit_triangle_counts(self):
        """Test counts on the equilateral triangle"""
        mesh = build_uniform_mesh("unit_triangle", 4)
        assert mesh.num_vertices == 15
        assert mesh.num_triangles == 16
        assert mesh.area == pytest.approx(math.sqrt(3.0) / 4.0)

    def test_boundary_flags_on_square(self):
        """Test that boundary vertices are exactly those on the square's sides"""
        mesh = build_uniform_mesh("unit_square", 6)
        x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
        on_side = np.isclose(x, 0) | np.isclose(x, 1) | np.isclose(y, 0) | np.isclose(y, 1)
        np.testing.assert_array_equal(mesh.boundary_mask, on_side)

    def test_non_convex_domain(self):
        """Test that an L-shaped domain is meshed with the correct area"""
        mesh = build_uniform_mesh(L_SHAPE, 6)
        assert mesh.area == pytest.approx(3.0)
        assert np.all(mesh.element_areas > 0)

    def test_mesh_size_bound(self):
        """Test that the longest edge is at most diameter / resolution"""
        mesh = build_uniform_mesh("unit_square", 10)
        assert mesh.h <= mesh.diameter / 10 * (1 + 1e-12)

    def test_resolution_too_small(self):
        """Test that a resolution below 2 is rejected"""
        with pytest.raises(ValidationError):
            build_uniform_mesh("unit_square", 1)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=2, max_value=12))
    def test_areas_sum_to_domain_area(self, resolution):
        """Test that element areas always sum to the polygon area"""
        mesh = build_uniform_mesh("unit_triangle", resolution)
        assert mesh.area == pytest.approx(mesh.domain.area, rel=1e-12)


class TestMeshFromArrays:
    """Tests for Mesh.from_arrays"""

    def test_clockwise_triangle_reoriented(self):
        """Test that a clockwise triangle gets a positive area"""
        mesh = Mesh.from_arrays([(0, 0), (1, 0), (0, 1)], [(0, 2, 1)], [True, True, True])
        assert mesh.element_areas[0] == pytest.approx(0.5)

    def test_degenerate_triangle_rejected(self):
        """Test that a zero-area triangle raises ValidationError"""
        with pytest.raises(ValidationError):
            Mesh.from_arrays([(0, 0), (1, 0), (2, 0)], [(0, 1, 2)], [True, True, True])

    def test_index_out_of_range(self):
        """Test that invalid vertex indices are rejected"""
        with pytest.raises(ValidationError):
            Mesh.from_arrays([(0, 0), (1, 0), (0, 1)], [(0, 1, 3)], [True, True, True])


class TestPointLocation:
    """Tests for locate, evaluation_matrix and contains_ball"""

    @pytest.fixture
    def mesh(self):
        return build_uniform_mesh("unit_square", 8)

    def test_linear_function_reproduced(self, mesh):
        """Test that P1 evaluation reproduces linear functions exactly"""
        u = FeFunction.interpolate(mesh, lambda x, y: 2 * x - 3 * y + 1)
        rng = np.random.default_rng(0)
        points = rng.uniform(0, 1, size=(50, 2))
        np.testing.assert_allclose(u.evaluate(points), 2 * points[:, 0] - 3 * points[:, 1] + 1, atol=1e-12)

    def test_evaluation_rows_sum_to_one(self, mesh):
        """Test that barycentric weights form a partition of unity"""
        E = mesh.evaluation_matrix(np.array([[0.3, 0.7], [1.0, 1.0], [0.0, 0.5]]))
        np.testing.assert_allclose(np.asarray(E.sum(axis=1)).ravel(), 1.0)

    def test_point_outside_rejected(self, mesh):
        """Test that a point outside the mesh raises ValidationError"""
        with pytest.raises(ValidationError):
            mesh.locate(np.array([[1.5, 0.5]]))

    def test_contains_ball(self, mesh):
        """Test ball containment against the square's sides"""
        assert mesh.contains_ball((0.5, 0.5), 0.4) is True
        assert mesh.contains_ball((0.5, 0.5), 0.6) is False
        assert mesh.contains_ball((2.0, 2.0), 0.1) is False


class TestFeFunction:
    """Tests for FeFunction, gradient and dirichlet_energy"""

    def test_wrong_length_rejected(self):
        """Test that coefficient length must match the mesh"""
        mesh = build_uniform_mesh("unit_square", 4)
        with pytest.raises(ValidationError):
            FeFunction(mesh, np.zeros(3))

    def test_coefficients_read_only(self):
        """Test that coefficients cannot be modified in place"""
        u = FeFunction.zeros(build_uniform_mesh("unit_square", 4))
        with pytest.raises(ValueError):
            u.coeffs[0] = 1.0

    def test_gradient_of_linear_function(self):
        """Test that the gradient of a x + b y is (a, b) on every triangle"""
        mesh = build_uniform_mesh("unit_triangle", 5)
        u = FeFunction.interpolate(mesh, lambda x, y: 3 * x - y)
        np.testing.assert_allclose(gradient(u), np.tile([3.0, -1.0], (mesh.num_triangles, 1)), atol=1e-12)

    def test_dirichlet_energy_of_linear_function(self):
        """Test the p-energy of u = x on the unit square"""
        mesh = build_uniform_mesh("unit_square", 6)
        u = FeFunction.interpolate(mesh, lambda x, y: x)
        assert dirichlet_energy(u, 2.0) == pytest.approx(1.0)
        assert dirichlet_energy(u.scaled(2.0), 1.5) == pytest.approx(2.0**1.5)

    def test_zero_boundary_interpolation(self):
        """Test that zero_boundary clears boundary values"""
        mesh = build_uniform_mesh("unit_square", 4)
        u = FeFunction.interpolate(mesh, lambda x, y: np.ones_like(x), zero_boundary=True)
        assert u.vanishes_on_boundary()
        assert u.coeffs[mesh.interior].min() == 1.0

    def test_exponent_out_of_range(self):
        """Test that p outside (1, 2] is rejected"""
        u = FeFunction.zeros(build_uniform_mesh("unit_square", 4))
        with pytest.raises(ValidationError):
            dirichlet_energy(u, 1.0)
        with pytest.raises(ValidationError):
            dirichlet_energy(u, 2.5)
