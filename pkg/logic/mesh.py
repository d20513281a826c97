# mesh.py - P1 triangulations of planar polygons

"""Conforming triangle meshes with piecewise linear (P1) nodal functions.

A polygon is cut into coarse triangles by ear clipping and every coarse
triangle is refined uniformly, so the unit square yields the structured grid
with one diagonal orientation and the unit triangle its regular subdivision.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np
from scipy import sparse
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial.distance import pdist

from core.config import (
    BUILTIN_DOMAINS,
    GEOMETRY_TOL,
    LOCATE_CANDIDATES,
    LOCATE_TOL,
    MIN_RESOLUTION,
)
from core.exceptions import ValidationError
from core.validation import ensure_valid, validate_float_range, validate_int_range

logger = logging.getLogger(__name__)


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def _cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float((a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]))


def _signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_intersect(a, b, c, d, tol: float) -> bool:
    d1 = _cross(c, d, a)
    d2 = _cross(c, d, b)
    d3 = _cross(a, b, c)
    d4 = _cross(a, b, d)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
        (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)
    ):
        return True

    def on_segment(p, q, r, cross):
        return abs(cross) <= tol and min(p[0], q[0]) - tol <= r[0] <= max(p[0], q[0]) + tol and min(
            p[1], q[1]
        ) - tol <= r[1] <= max(p[1], q[1]) + tol

    return (
        on_segment(c, d, a, d1)
        or on_segment(c, d, b, d2)
        or on_segment(a, b, c, d3)
        or on_segment(a, b, d, d4)
    )


def validate_polygon(vertices: Sequence[Sequence[float]]) -> tuple[bool, str | None]:
    """Check that vertices describe a simple polygon.

    Args:
        vertices: Polygon corners in order (either orientation)

    Returns:
        Tuple[bool, Optional[str]]: (is_valid, error_message)
    """
    points = np.asarray(vertices, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        return False, "polygon vertices must be 2D points"
    n = len(points)
    if n < 3:
        return False, "polygon needs at least 3 vertices"
    if not np.all(np.isfinite(points)):
        return False, "polygon vertices must be finite"

    scale = max(float(np.ptp(points, axis=0).max()), 1.0)
    tol = GEOMETRY_TOL * scale * scale
    if abs(_signed_area(points)) <= tol:
        return False, "polygon has zero area"

    for i in range(n):
        a, b, c = points[i - 1], points[i], points[(i + 1) % n]
        if np.linalg.norm(b - a) <= GEOMETRY_TOL * scale:
            return False, f"polygon has repeated vertex {i}"
        if abs(_cross(a, b, c)) <= tol:
            return False, f"polygon has collinear edges at vertex {i}"

    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_intersect(
                points[i], points[(i + 1) % n], points[j], points[(j + 1) % n], tol
            ):
                return False, f"polygon edges {i} and {j} intersect (polygon is not simple)"

    return True, None


@dataclass(frozen=True, eq=False)
class Polygon:
    """A simple polygon stored counterclockwise."""

    name: str
    vertices: np.ndarray

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]], name: str = "polygon") -> Polygon:
        ensure_valid(validate_polygon(points), "domain")
        vertices = np.array(points, dtype=float)
        if _signed_area(vertices) < 0:
            vertices = vertices[::-1].copy()
        return cls(name=name, vertices=_readonly(vertices))

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    @cached_property
    def diameter(self) -> float:
        return float(pdist(self.vertices).max())

    def is_convex(self) -> bool:
        n = len(self.vertices)
        return all(
            _cross(self.vertices[i - 1], self.vertices[i], self.vertices[(i + 1) % n]) > 0
            for i in range(n)
        )

    def contains_convex(self, points: np.ndarray, tol: float = GEOMETRY_TOL) -> np.ndarray:
        """Closed containment test for convex polygons (vectorized)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        a = self.vertices
        b = np.roll(self.vertices, -1, axis=0)
        edge = b - a
        rel = points[:, None, :] - a[None, :, :]
        cross = edge[None, :, 0] * rel[:, :, 1] - edge[None, :, 1] * rel[:, :, 0]
        scale = max(self.diameter, 1.0)
        return np.all(cross >= -tol * scale * scale, axis=1)

    def to_dict(self) -> dict:
        return {"name": self.name, "vertices": self.vertices.tolist()}


def get_domain(domain: Union[str, Polygon, Sequence[Sequence[float]]]) -> Polygon:
    """Resolve a domain descriptor (built-in name, Polygon or vertex list)."""
    if isinstance(domain, Polygon):
        return domain
    if isinstance(domain, str):
        if domain not in BUILTIN_DOMAINS:
            raise ValidationError(
                "domain", f"unknown domain '{domain}', expected one of: {', '.join(BUILTIN_DOMAINS)}"
            )
        return Polygon.from_points(BUILTIN_DOMAINS[domain], name=domain)
    return Polygon.from_points(domain)


def _ear_clip(vertices: np.ndarray) -> list[tuple[int, int, int]]:
    """Triangulate a counterclockwise simple polygon without adding points."""
    scale = max(float(np.ptp(vertices, axis=0).max()), 1.0)
    tol = GEOMETRY_TOL * scale * scale
    remaining = list(range(len(vertices)))
    triangles = []
    while len(remaining) > 3:
        for k in range(len(remaining)):
            i0, i1, i2 = remaining[k - 1], remaining[k], remaining[(k + 1) % len(remaining)]
            a, b, c = vertices[i0], vertices[i1], vertices[i2]
            if _cross(a, b, c) <= tol:
                continue
            blocked = False
            for other in remaining:
                if other in (i0, i1, i2):
                    continue
                p = vertices[other]
                if _cross(a, b, p) >= -tol and _cross(b, c, p) >= -tol and _cross(c, a, p) >= -tol:
                    blocked = True
                    break
            if not blocked:
                triangles.append((i0, i1, i2))
                del remaining[k]
                break
        else:
            raise ValidationError("domain", "polygon could not be triangulated")
    triangles.append(tuple(remaining))
    return triangles


def assemble_matrix(mesh: Mesh, local: np.ndarray) -> sparse.csr_matrix:
    """Assemble per-triangle 3x3 blocks into a global sparse matrix."""
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.num_vertices
    return sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_vector(mesh: Mesh, local: np.ndarray) -> np.ndarray:
    """Assemble per-triangle nodal contributions (m, 3) into a vertex vector."""
    return np.bincount(
        mesh.triangles.ravel(), weights=local.ravel(), minlength=mesh.num_vertices
    )


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation with P1 basis data.

    Attributes:
        vertices: (n, 2) vertex coordinates
        triangles: (m, 3) counterclockwise vertex indices
        boundary_mask: (n,) True for vertices on the domain boundary
        element_areas: (m,) triangle areas
        grad_basis: (m, 3, 2) constant gradients of the three nodal basis functions
        domain: The polygon that was meshed, when known
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_mask: np.ndarray
    element_areas: np.ndarray
    grad_basis: np.ndarray
    domain: Polygon | None = None

    @classmethod
    def from_arrays(
        cls,
        vertices: np.ndarray,
        triangles: np.ndarray,
        boundary_mask: np.ndarray,
        domain: Polygon | None = None,
    ) -> Mesh:
        """Build a mesh from raw arrays, computing areas and basis gradients.

        Clockwise triangles are reoriented; degenerate triangles are rejected.
        """
        vertices = np.array(vertices, dtype=float)
        triangles = np.array(triangles, dtype=np.int64)
        boundary_mask = np.array(boundary_mask, dtype=bool)

        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ValidationError("vertices", "expected an (n, 2) array")
        if triangles.ndim != 2 or triangles.shape[1] != 3 or len(triangles) == 0:
            raise ValidationError("triangles", "expected a non-empty (m, 3) array")
        if boundary_mask.shape != (len(vertices),):
            raise ValidationError("boundary_mask", "expected one flag per vertex")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise ValidationError("triangles", "vertex index out of range")

        corners = vertices[triangles]
        d1 = corners[:, 1] - corners[:, 0]
        d2 = corners[:, 2] - corners[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        flipped = det < 0
        if np.any(flipped):
            logger.debug(f"Reorienting {int(flipped.sum())} clockwise triangles")
            triangles[flipped] = triangles[flipped][:, [0, 2, 1]]
            det = np.abs(det)

        scale = max(float(np.ptp(vertices, axis=0).max()), 1.0)
        if np.any(det <= GEOMETRY_TOL * GEOMETRY_TOL * scale * scale):
            bad = int(np.argmin(det))
            raise ValidationError("triangles", f"triangle {bad} has zero area")

        x, y = vertices[triangles, 0], vertices[triangles, 1]
        grad_basis = np.empty((len(triangles), 3, 2))
        grad_basis[:, 0, 0] = y[:, 1] - y[:, 2]
        grad_basis[:, 0, 1] = x[:, 2] - x[:, 1]
        grad_basis[:, 1, 0] = y[:, 2] - y[:, 0]
        grad_basis[:, 1, 1] = x[:, 0] - x[:, 2]
        grad_basis[:, 2, 0] = y[:, 0] - y[:, 1]
        grad_basis[:, 2, 1] = x[:, 1] - x[:, 0]
        grad_basis /= det[:, None, None]

        return cls(
            vertices=_readonly(vertices),
            triangles=_readonly(triangles),
            boundary_mask=_readonly(boundary_mask),
            element_areas=_readonly(0.5 * det),
            grad_basis=_readonly(grad_basis),
            domain=domain,
        )

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    @property
    def area(self) -> float:
        return float(np.sum(self.element_areas))

    @cached_property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask)

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted vertex pairs."""
        pairs = np.concatenate(
            [self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]]
        )
        return np.unique(np.sort(pairs, axis=1), axis=0)

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        pairs = np.concatenate(
            [self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]]
        )
        unique, counts = np.unique(np.sort(pairs, axis=1), axis=0, return_counts=True)
        return unique[counts == 1]

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        ends = self.vertices[self.edges]
        return np.linalg.norm(ends[:, 1] - ends[:, 0], axis=1)

    @property
    def h(self) -> float:
        """Longest edge length."""
        return float(self.edge_lengths.max())

    @property
    def min_edge(self) -> float:
        return float(self.edge_lengths.min())

    @cached_property
    def diameter(self) -> float:
        if self.domain is not None:
            return self.domain.diameter
        hull = ConvexHull(self.vertices)
        return float(pdist(self.vertices[hull.vertices]).max())

    @cached_property
    def stiffness(self) -> sparse.csr_matrix:
        """The p = 2 stiffness matrix over all vertices."""
        local = self.element_areas[:, None, None] * np.einsum(
            "tid,tjd->tij", self.grad_basis, self.grad_basis
        )
        return assemble_matrix(self, local)

    @cached_property
    def _centroid_tree(self) -> cKDTree:
        return cKDTree(self.centroids)

    def _barycentric(self, triangle_ids: np.ndarray, points: np.ndarray) -> np.ndarray:
        # phi_j is 1/3 at the centroid and has constant gradient
        offset = points - self.centroids[triangle_ids]
        return 1.0 / 3.0 + np.einsum("...jd,...d->...j", self.grad_basis[triangle_ids], offset)

    def locate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Find the triangle containing each point and its barycentric weights.

        Args:
            points: (k, 2) query points

        Returns:
            (triangle index per point, (k, 3) barycentric weights)

        Raises:
            ValidationError: If a point lies outside the closed mesh
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        count = min(LOCATE_CANDIDATES, self.num_triangles)
        _, candidates = self._centroid_tree.query(points, k=count)
        candidates = candidates.reshape(len(points), count)

        bary = self._barycentric(candidates, points[:, None, :])
        inside = bary.min(axis=2) >= -LOCATE_TOL
        first = np.argmax(inside, axis=1)
        rows = np.arange(len(points))
        triangle_ids = candidates[rows, first]
        weights = bary[rows, first]

        missing = np.flatnonzero(~inside.any(axis=1))
        all_ids = np.arange(self.num_triangles)
        for index in missing:
            full = self._barycentric(all_ids, points[index][None, :])
            best = int(np.argmax(full.min(axis=1)))
            if full[best].min() < -LOCATE_TOL:
                raise ValidationError(
                    "points", f"point {points[index].tolist()} lies outside the mesh"
                )
            triangle_ids[index] = best
            weights[index] = full[best]

        weights = np.clip(weights, 0.0, None)
        weights /= weights.sum(axis=1, keepdims=True)
        return triangle_ids, weights

    def evaluation_matrix(self, points: np.ndarray) -> sparse.csr_matrix:
        """Sparse matrix E with (E @ coeffs)[k] = value of the P1 function at points[k]."""
        triangle_ids, weights = self.locate(points)
        rows = np.repeat(np.arange(len(weights)), 3)
        cols = self.triangles[triangle_ids].ravel()
        return sparse.coo_matrix(
            (weights.ravel(), (rows, cols)), shape=(len(weights), self.num_vertices)
        ).tocsr()

    def contains_ball(self, center: Sequence[float], radius: float) -> bool:
        """Whether the closed ball B(center, radius) lies inside the meshed domain."""
        center = np.asarray(center, dtype=float)
        try:
            self.locate(center[None, :])
        except ValidationError:
            return False
        a = self.vertices[self.boundary_edges[:, 0]]
        b = self.vertices[self.boundary_edges[:, 1]]
        edge = b - a
        t = np.clip(np.einsum("kd,kd->k", center - a, edge) / np.einsum("kd,kd->k", edge, edge), 0, 1)
        distance = np.linalg.norm(a + t[:, None] * edge - center, axis=1).min()
        return bool(distance >= radius * (1.0 - GEOMETRY_TOL))

    def summary(self) -> dict:
        return {
            "vertices": self.num_vertices,
            "triangles": self.num_triangles,
            "h": self.h,
            "area": self.area,
            "domain": self.domain.name if self.domain is not None else "imported",
        }


@dataclass(frozen=True, eq=False)
class FeFunction:
    """A P1 function given by its nodal values on a mesh."""

    mesh: Mesh
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.mesh.num_vertices,):
            raise ValidationError(
                "coeffs",
                f"expected {self.mesh.num_vertices} nodal values, got shape {coeffs.shape}",
            )
        object.__setattr__(self, "coeffs", _readonly(coeffs))

    @classmethod
    def zeros(cls, mesh: Mesh) -> FeFunction:
        return cls(mesh, np.zeros(mesh.num_vertices))

    @classmethod
    def interpolate(
        cls,
        mesh: Mesh,
        func: Callable[[np.ndarray, np.ndarray], np.ndarray],
        zero_boundary: bool = False,
    ) -> FeFunction:
        """Nodal interpolant of a vectorized func(x, y)."""
        values = np.broadcast_to(
            np.asarray(func(mesh.vertices[:, 0], mesh.vertices[:, 1]), dtype=float),
            (mesh.num_vertices,),
        ).copy()
        if zero_boundary:
            values[mesh.boundary_mask] = 0.0
        return cls(mesh, values)

    def with_coeffs(self, coeffs: np.ndarray) -> FeFunction:
        return FeFunction(self.mesh, coeffs)

    def scaled(self, factor: float) -> FeFunction:
        return FeFunction(self.mesh, factor * self.coeffs)

    def vanishes_on_boundary(self) -> bool:
        return bool(np.all(self.coeffs[self.mesh.boundary_mask] == 0.0))

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self.mesh.evaluation_matrix(points) @ self.coeffs


def build_uniform_mesh(
    domain: Union[str, Polygon, Sequence[Sequence[float]]], resolution: int
) -> Mesh:
    """Triangulate a simple polygon uniformly.

    Args:
        domain: Built-in name ("unit_square", "unit_triangle"), Polygon or vertex list
        resolution: Number of subdivisions per diameter, at least 2

    Returns:
        Mesh: Triangulation whose longest edge is at most diameter / resolution

    Raises:
        ValidationError: If the polygon is not simple or resolution < 2
    """
    ensure_valid(validate_int_range(resolution, MIN_RESOLUTION, None, "resolution"), "resolution")
    polygon = get_domain(domain)
    corners = polygon.vertices
    coarse = _ear_clip(corners)

    longest = max(
        float(np.linalg.norm(corners[a] - corners[b]))
        for tri in coarse
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0]))
    )
    k = max(1, math.ceil(resolution * longest / polygon.diameter - 1e-9))

    n_corners = len(corners)
    polygon_edges = {tuple(sorted((i, (i + 1) % n_corners))) for i in range(n_corners)}
    ids: dict[tuple, int] = {}
    points: list[np.ndarray] = []
    on_boundary: list[bool] = []

    def node(key: tuple, coord: np.ndarray, boundary: bool) -> int:
        if key not in ids:
            ids[key] = len(points)
            points.append(coord)
            on_boundary.append(boundary)
        return ids[key]

    def edge_node(a: int, b: int, step: int) -> int:
        if step == 0:
            return node(("v", a), corners[a], True)
        if step == k:
            return node(("v", b), corners[b], True)
        lo, hi = min(a, b), max(a, b)
        offset = step if a == lo else k - step
        coord = corners[lo] + (offset / k) * (corners[hi] - corners[lo])
        return node(("e", lo, hi, offset), coord, (lo, hi) in polygon_edges)

    triangles = []
    for t, (a, b, c) in enumerate(coarse):
        A, B, C = corners[a], corners[b], corners[c]
        grid = {}
        for i in range(k + 1):
            for j in range(k + 1 - i):
                if j == 0:
                    grid[i, j] = edge_node(a, b, i)
                elif i == 0:
                    grid[i, j] = edge_node(a, c, j)
                elif i + j == k:
                    grid[i, j] = edge_node(b, c, j)
                else:
                    coord = A + (i / k) * (B - A) + (j / k) * (C - A)
                    grid[i, j] = node(("t", t, i, j), coord, False)
        for i in range(k):
            for j in range(k - i):
                triangles.append((grid[i, j], grid[i + 1, j], grid[i, j + 1]))
                if i + j < k - 1:
                    triangles.append((grid[i + 1, j], grid[i + 1, j + 1], grid[i, j + 1]))

    mesh = Mesh.from_arrays(np.array(points), np.array(triangles), np.array(on_boundary), polygon)
    logger.debug(
        f"Built mesh on {polygon.name}: {mesh.num_vertices} vertices, "
        f"{mesh.num_triangles} triangles, h={mesh.h:.4g}"
    )
    return mesh


def gradient(u: FeFunction) -> np.ndarray:
    """Per-triangle constant gradient of a P1 function, shape (m, 2)."""
    mesh = u.mesh
    if u.coeffs.shape != (mesh.num_vertices,):
        raise ValidationError("coeffs", "length does not match the mesh")
    return np.einsum("tk,tkd->td", u.coeffs[mesh.triangles], mesh.grad_basis)


def validate_exponent(p: float) -> tuple[bool, str | None]:
    return validate_float_range(p, 1.0, 2.0, "p", min_inclusive=False)


def dirichlet_energy(u: FeFunction, p: float) -> float:
    """Sum over triangles of area * |grad u|^p."""
    ensure_valid(validate_exponent(p), "p")
    norms = np.linalg.norm(gradient(u), axis=1)
    return float(np.sum(u.mesh.element_areas * norms**p))
