# measure.py - Discrete Borel measures: Lebesgue quadrature, self-similar and log-Cantor

"""Finite atom approximations of the measures paired with the p-Dirichlet energy.

Integrals against a measure become weighted sums of point values of P1
functions, so every measure here is a list of weighted atoms plus a
provenance tag describing how it was built.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
from scipy import optimize, sparse, stats
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.spatial.distance import pdist

from core.config import (
    DEFAULT_LOG_CANTOR_R0,
    DIMENSION_XTOL,
    GEOMETRY_TOL,
    GROWTH_DEFAULT_RADII,
    GROWTH_DIAMETER_FRACTION,
    GROWTH_MAX_SKIPPED,
    GROWTH_MIN_CENTERS,
    GROWTH_MIN_RADII,
    GROWTH_SPACING_FACTOR,
    LOG_CANTOR_CENTER,
    MASS_TOL,
    MAX_IFS_ATOMS,
    MAX_LOG_CANTOR_ATOMS,
    PROBABILITY_SUM_TOL,
    RESOLVABLE_OFFSET,
    SPACE_DIM,
)
from core.exceptions import BudgetExceededError, ValidationError
from core.validation import ensure_valid, validate_float_range, validate_int_range
from logic.mesh import Mesh, Polygon, get_domain

logger = logging.getLogger(__name__)

PROVENANCE_KINDS = ["lebesgue", "ifs", "log_cantor", "custom"]


# --- Iterated function systems ---


@dataclass(frozen=True)
class SimilarityMap:
    """x -> ratio * R(angle) * S * x + translation, S a reflection in the x-axis if reflect."""

    ratio: float
    angle: float = 0.0
    translation: tuple[float, float] = (0.0, 0.0)
    reflect: bool = False

    @cached_property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        rotation = np.array([[c, -s], [s, c]])
        if self.reflect:
            rotation = rotation @ np.diag([1.0, -1.0])
        return self.ratio * rotation

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return points @ self.matrix.T + np.asarray(self.translation, dtype=float)

    def fixed_point(self) -> np.ndarray:
        return np.linalg.solve(np.eye(2) - self.matrix, np.asarray(self.translation, dtype=float))


@dataclass(frozen=True)
class IfsSpec:
    """Contracting similarities with their probabilities."""

    maps: tuple[SimilarityMap, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        object.__setattr__(self, "probabilities", tuple(float(p) for p in self.probabilities))
        if not self.maps:
            raise ValidationError("maps", "an IFS needs at least one map")
        if len(self.probabilities) != len(self.maps):
            raise ValidationError("probabilities", "expected one probability per map")
        for i, m in enumerate(self.maps):
            ensure_valid(
                validate_float_range(
                    m.ratio, 0.0, 1.0, f"ratio[{i}]", min_inclusive=False, max_inclusive=False
                ),
                "maps",
            )
        for i, p in enumerate(self.probabilities):
            ensure_valid(validate_float_range(p, 0.0, 1.0, f"probability[{i}]"), "probabilities")
        total = math.fsum(self.probabilities)
        if abs(total - 1.0) > PROBABILITY_SUM_TOL:
            raise ValidationError("probabilities", f"must sum to 1, got {total!r}")

    @property
    def ratios(self) -> np.ndarray:
        return np.array([m.ratio for m in self.maps])


def _uniform(maps: list[SimilarityMap]) -> IfsSpec:
    n = len(maps)
    return IfsSpec(tuple(maps), tuple([1.0 / n] * n))


def sierpinski_ifs() -> IfsSpec:
    """Three half-scale maps toward the corners of the unit triangle."""
    corners = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0)]
    return _uniform([SimilarityMap(0.5, 0.0, (x / 2.0, y / 2.0)) for x, y in corners])


def quadrant_ifs() -> IfsSpec:
    """Four half-scale maps onto the quadrants of the unit square."""
    offsets = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)]
    return _uniform([SimilarityMap(0.5, 0.0, t) for t in offsets])


def cantor_dust_ifs() -> IfsSpec:
    """Four third-scale maps toward the corners of the unit square."""
    offsets = [(0.0, 0.0), (2.0 / 3.0, 0.0), (0.0, 2.0 / 3.0), (2.0 / 3.0, 2.0 / 3.0)]
    return _uniform([SimilarityMap(1.0 / 3.0, 0.0, t) for t in offsets])


BUILTIN_IFS_FACTORIES = {
    "sierpinski": sierpinski_ifs,
    "quadrants": quadrant_ifs,
    "cantor-dust": cantor_dust_ifs,
}


def similarity_dimension(ifs: IfsSpec) -> float:
    """Unique s > 0 with sum_i r_i^s = 1, by bisection to 1e-12."""
    if len(ifs.maps) < 2:
        raise ValidationError("maps", "similarity dimension needs at least two maps")
    ratios = ifs.ratios

    def excess(s: float) -> float:
        return float(np.sum(ratios**s)) - 1.0

    upper = 1.0
    while excess(upper) > 0.0:
        upper *= 2.0
    return float(optimize.bisect(excess, 0.0, upper, xtol=DIMENSION_XTOL))


def natural_probabilities(ifs: IfsSpec) -> tuple[float, ...]:
    """Probabilities r_i^s of the natural self-similar measure."""
    s = similarity_dimension(ifs)
    weights = ifs.ratios**s
    return tuple(float(w) for w in weights / weights.sum())


def with_natural_probabilities(ifs: IfsSpec) -> IfsSpec:
    return IfsSpec(ifs.maps, natural_probabilities(ifs))


@dataclass(frozen=True)
class OpenSetReport:
    """Certificate of the open set test."""

    holds: bool
    containment_violations: list[int] = field(default_factory=list)
    overlapping_pairs: list[tuple[int, int]] = field(default_factory=list)


def _separated(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    """Separating-axis test for two convex polygons; touching counts as separated."""
    for poly in (a, b):
        edges = np.roll(poly, -1, axis=0) - poly
        normals = np.column_stack([-edges[:, 1], edges[:, 0]])
        for normal in normals:
            length = np.linalg.norm(normal)
            if length == 0.0:
                continue
            pa = a @ normal / length
            pb = b @ normal / length
            if pa.max() <= pb.min() + tol or pb.max() <= pa.min() + tol:
                return True
    return False


def check_open_set_condition(ifs: IfsSpec, candidate_open_set) -> OpenSetReport:
    """Test the open set condition for a convex candidate U.

    Each image f_i(U) must lie in U and the images must be pairwise disjoint
    as open sets.
    """
    polygon: Polygon = get_domain(candidate_open_set)
    if not polygon.is_convex():
        raise ValidationError("candidate_open_set", "only convex candidates are supported")

    tol = GEOMETRY_TOL * max(polygon.diameter, 1.0)
    images = [m.apply(polygon.vertices) for m in ifs.maps]
    violations = [i for i, image in enumerate(images) if not polygon.contains_convex(image).all()]
    overlaps = [
        (i, j)
        for i in range(len(images))
        for j in range(i + 1, len(images))
        if not _separated(images[i], images[j], tol)
    ]
    holds = not violations and not overlaps
    logger.debug(f"Open set condition on {polygon.name}: holds={holds}")
    return OpenSetReport(holds, violations, overlaps)


# --- Discrete measures ---


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted atoms.

    Attributes:
        points: (k, 2) atom locations
        weights: (k,) positive atom weights
        total_mass: Sum of weights
        provenance: Construction record with at least a "kind" entry
    """

    points: np.ndarray
    weights: np.ndarray
    total_mass: float
    provenance: dict

    def __post_init__(self):
        points = np.array(self.points, dtype=float).reshape(-1, SPACE_DIM)
        weights = np.array(self.weights, dtype=float).ravel()
        if len(points) == 0 or len(points) != len(weights):
            raise ValidationError("atoms", "expected one positive weight per atom")
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(weights))):
            raise ValidationError("atoms", "atoms must be finite")
        if np.any(weights <= 0.0):
            raise ValidationError("weights", "all atom weights must be positive")
        total = float(np.sum(weights))
        if abs(total - self.total_mass) > MASS_TOL * max(1.0, abs(total)):
            raise ValidationError("total_mass", f"{self.total_mass!r} differs from the weight sum {total!r}")
        kind = self.provenance.get("kind")
        if kind not in PROVENANCE_KINDS:
            raise ValidationError("provenance", f"kind must be one of: {', '.join(PROVENANCE_KINDS)}")
        points.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "total_mass", float(self.total_mass))

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def kind(self) -> str:
        return self.provenance["kind"]

    @cached_property
    def tree(self) -> cKDTree:
        return cKDTree(self.points)

    @cached_property
    def diameter(self) -> float:
        """Diameter of the atom cloud (bounding box diagonal for degenerate clouds)."""
        unique = np.unique(self.points, axis=0)
        if len(unique) < 2:
            return 0.0
        try:
            hull = ConvexHull(unique)
            return float(pdist(unique[hull.vertices]).max())
        except (QhullError, ValueError):
            return float(np.linalg.norm(np.ptp(unique, axis=0)))

    def header(self) -> dict:
        return {"provenance": self.provenance, "total_mass": self.total_mass, "atoms": self.size}


def natural_measure(
    ifs: IfsSpec, depth: int, seed_point: Sequence[float] | None = None
) -> DiscreteMeasure:
    """Depth-L approximation of the self-similar measure of an IFS.

    Atom (i_1, ..., i_L) sits at f_{i_1}( ... f_{i_L}(seed_point)) with weight
    p_{i_1} ... p_{i_L}; atoms are ordered with i_1 varying slowest, so the
    cylinder f_i(E) is a contiguous block.

    Args:
        ifs: The iterated function system
        depth: Word length L >= 1
        seed_point: Starting point, defaults to the mean of the maps' fixed points

    Raises:
        BudgetExceededError: If N^L exceeds the atom budget
    """
    ensure_valid(validate_int_range(depth, 1, None, "depth"), "depth")
    n_maps = len(ifs.maps)
    max_depth = 1
    while n_maps ** (max_depth + 1) <= MAX_IFS_ATOMS:
        max_depth += 1
        if n_maps == 1:
            break
    if n_maps**depth > MAX_IFS_ATOMS:
        raise BudgetExceededError("depth", f"{n_maps}^{depth} atoms exceed the budget of {MAX_IFS_ATOMS}", max_depth)

    if seed_point is None:
        seed = np.mean([m.fixed_point() for m in ifs.maps], axis=0)
    else:
        seed = np.asarray(seed_point, dtype=float)

    points = seed[None, :]
    weights = np.ones(1)
    for _ in range(depth):
        points = np.concatenate([m.apply(points) for m in ifs.maps])
        weights = np.concatenate([p * weights for p in ifs.probabilities])

    keep = weights > 0.0
    points, weights = points[keep], weights[keep]
    logger.debug(f"Natural measure: depth {depth}, {len(weights)} atoms")
    return DiscreteMeasure(
        points=points,
        weights=weights,
        total_mass=float(np.sum(weights)),
        provenance={
            "kind": "ifs",
            "depth": depth,
            "maps": n_maps,
            "probabilities": list(ifs.probabilities),
            "seed_point": seed.tolist(),
        },
    )


def lebesgue_measure(mesh: Mesh) -> DiscreteMeasure:
    """One atom per triangle at its barycenter, weighted by the triangle area."""
    weights = np.array(mesh.element_areas)
    return DiscreteMeasure(
        points=mesh.centroids,
        weights=weights,
        total_mass=float(np.sum(weights)),
        provenance={"kind": "lebesgue", "triangles": mesh.num_triangles},
    )


# --- Log-Cantor measure ---


def _validate_log_cantor(q: float, r0: float, level: int) -> None:
    ensure_valid(validate_float_range(q, 2.0, None, "q", min_inclusive=False), "q")
    ensure_valid(
        validate_float_range(r0, 0.0, 1.0 / math.e, "r0", min_inclusive=False, max_inclusive=False),
        "r0",
    )
    ensure_valid(validate_int_range(level, 0, None, "level"), "level")


def log_cantor_radii(q: float, r0: float, level: int) -> np.ndarray:
    """Tree-ball diameters r_0, ..., r_K with |log r_{k+1}| = 2^{2/q} |log r_k|."""
    _validate_log_cantor(q, r0, level)
    k = np.arange(level + 1)
    return np.exp(-abs(math.log(r0)) * 2.0 ** (2.0 * k / q))


def log_cantor_gauge(r: np.ndarray, q: float) -> np.ndarray:
    """h(r) = |log r|^(-q/2)."""
    return np.abs(np.log(r)) ** (-q / 2.0)


@dataclass(frozen=True, eq=False)
class LogCantorTree:
    """Binary tree of disjoint balls; level-k balls have diameter radii[k] and mass h(r_k)."""

    q: float
    r0: float
    root: np.ndarray
    radii: np.ndarray
    centers: tuple[np.ndarray, ...]

    @property
    def level(self) -> int:
        return len(self.radii) - 1

    @cached_property
    def masses(self) -> np.ndarray:
        """Closed-form mass h(r_0) 2^-k of every level-k tree ball."""
        h0 = float(log_cantor_gauge(np.array(self.r0), self.q))
        return h0 * 2.0 ** -np.arange(self.level + 1)

    @cached_property
    def resolvable_level(self) -> int:
        """Deepest level whose child offsets are distinguishable in double precision."""
        scale = max(1.0, float(np.abs(self.root).max()))
        offsets = 0.5 * (self.radii[:-1] - self.radii[1:])
        deepest = 0
        for k, offset in enumerate(offsets, start=1):
            if offset < RESOLVABLE_OFFSET * scale:
                break
            deepest = k
        return deepest


def log_cantor_tree(
    q: float,
    level: int,
    center: Sequence[float] = LOG_CANTOR_CENTER,
    r0: float = DEFAULT_LOG_CANTOR_R0,
) -> LogCantorTree:
    """Place the tree balls along the horizontal diameter of their parents.

    Children of a ball with diameter r_k are centered at
    parent_center +/- (r_k - r_{k+1}) / 2 along the x-axis, which keeps them
    inside the parent and disjoint exactly when r_{k+1} < r_k / 2.

    Raises:
        BudgetExceededError: If 2^level exceeds the atom budget
        ValidationError: If children cannot fit or the radii underflow
    """
    _validate_log_cantor(q, r0, level)
    max_level = int(math.floor(math.log2(MAX_LOG_CANTOR_ATOMS)))
    if level > max_level:
        raise BudgetExceededError(
            "level", f"2^{level} atoms exceed the budget of {MAX_LOG_CANTOR_ATOMS}", max_level
        )

    radii = log_cantor_radii(q, r0, level)
    if radii[-1] <= 0.0:
        raise ValidationError("level", f"tree diameters underflow double precision before level {level}")
    for k in range(level):
        if not radii[k + 1] < radii[k] / 2.0:
            raise ValidationError(
                "r0",
                f"two balls of diameter {radii[k + 1]:.6g} cannot fit disjointly in a ball of "
                f"diameter {radii[k]:.6g}; choose a smaller r0",
            )

    root = np.asarray(center, dtype=float)
    levels = [root[None, :].copy()]
    for k in range(1, level + 1):
        offset = 0.5 * (radii[k - 1] - radii[k])
        parents = levels[-1]
        children = np.empty((2 * len(parents), 2))
        children[0::2] = parents - [offset, 0.0]
        children[1::2] = parents + [offset, 0.0]
        levels.append(children)

    return LogCantorTree(q=float(q), r0=float(r0), root=root, radii=radii, centers=tuple(levels))


def log_cantor_measure(
    q: float,
    level: int,
    base_ball: tuple[Sequence[float], float] = (LOG_CANTOR_CENTER, DEFAULT_LOG_CANTOR_R0),
) -> DiscreteMeasure:
    """2^K atoms at the level-K tree-ball centers, total mass h(r_0)."""
    center, r0 = base_ball
    tree = log_cantor_tree(q, level, center, r0)
    atoms = tree.centers[-1]
    weights = np.full(len(atoms), tree.masses[-1])
    return DiscreteMeasure(
        points=atoms,
        weights=weights,
        total_mass=float(tree.masses[0]),
        provenance={
            "kind": "log_cantor",
            "level": level,
            "q": float(q),
            "r0": float(r0),
            "center": tree.root.tolist(),
            "normalization": "total_mass = h(r0)",
        },
    )


# --- Ball masses and growth exponents ---


def ball_mass(mu: DiscreteMeasure, center: Sequence[float], r: float) -> float:
    """mu of the closed ball B(center, r)."""
    ensure_valid(validate_float_range(r, 0.0, None, "r", min_inclusive=False), "r")
    offset = mu.points - np.asarray(center, dtype=float)
    inside = np.einsum("kd,kd->k", offset, offset) <= r * r * (1.0 + 2.0 * GEOMETRY_TOL)
    return float(np.sum(mu.weights[inside]))


def ball_masses(mu: DiscreteMeasure, centers: np.ndarray, radii: Sequence[float]) -> np.ndarray:
    """Closed-ball masses for every (center, radius), shape (len(centers), len(radii))."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    masses = np.empty((len(centers), len(radii)))
    for j, r in enumerate(radii):
        neighbours = mu.tree.query_ball_point(centers, r * (1.0 + GEOMETRY_TOL))
        masses[:, j] = [float(np.sum(mu.weights[idx])) for idx in neighbours]
    return masses


def atom_spacing(mu: DiscreteMeasure) -> float:
    """Largest nearest-neighbour distance between atoms."""
    if mu.size < 2:
        return 0.0
    distances, _ = mu.tree.query(mu.points, k=2)
    return float(distances[:, 1].max())


def geometric_radii(r_max: float, r_min: float, count: int) -> np.ndarray:
    """Strictly decreasing geometric grid from r_max to r_min."""
    if not 0.0 < r_min < r_max:
        raise ValidationError("radii", f"need 0 < r_min < r_max, got {r_min!r}, {r_max!r}")
    return np.geomspace(r_max, r_min, count)


def growth_sample(
    mu: DiscreteMeasure,
    seed: int,
    num_centers: int = GROWTH_MIN_CENTERS,
    num_radii: int = GROWTH_DEFAULT_RADII,
    interior: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded centers and a geometric radius grid for fit_growth_exponent.

    Radii run geometrically from 4 atom spacings to a quarter of the cloud
    diameter. With interior=True centers are drawn from atoms at least
    r_max away from the bounding box of the cloud when enough exist.
    """
    spacing = atom_spacing(mu)
    r_min = GROWTH_SPACING_FACTOR * spacing
    r_max = GROWTH_DIAMETER_FRACTION * mu.diameter
    if not 0.0 < r_min < r_max:
        raise ValidationError(
            "measure", "atom cloud too coarse (or degenerate) for growth fitting; increase depth"
        )
    radii = geometric_radii(r_max, r_min, num_radii)

    candidates = np.arange(mu.size)
    if interior:
        low, high = mu.points.min(axis=0), mu.points.max(axis=0)
        mask = np.all(mu.points - low >= r_max, axis=1) & np.all(high - mu.points >= r_max, axis=1)
        if mask.sum() >= num_centers:
            candidates = np.flatnonzero(mask)

    rng = np.random.default_rng(seed)
    chosen = rng.choice(candidates, size=num_centers, replace=len(candidates) < num_centers)
    return mu.points[chosen], radii


@dataclass(frozen=True)
class GrowthReport:
    """Fitted power law mu(B(x, r)) ~ C r^s."""

    fitted_exponent: float
    fitted_constant: float
    radii_range: tuple[float, float]
    max_ratio: float
    sample_count: int
    skipped: int = 0
    fit_r2: float = 1.0
    radii: tuple[float, ...] = ()
    mean_log_mass: tuple[float, ...] = ()


def fit_growth_exponent(
    mu: DiscreteMeasure, centers: np.ndarray, radii: Sequence[float]
) -> GrowthReport:
    """Least-squares slope of log mu(B(x, r)) against log r, averaged over centers.

    Empty balls are skipped; more than half skipped rejects the fit.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.asarray(radii, dtype=float)
    if len(centers) < GROWTH_MIN_CENTERS:
        raise ValidationError("centers", f"need at least {GROWTH_MIN_CENTERS} centers")
    if len(radii) < GROWTH_MIN_RADII:
        raise ValidationError("radii", f"need at least {GROWTH_MIN_RADII} radii")
    if np.any(radii <= 0.0) or np.any(np.diff(radii) >= 0.0):
        raise ValidationError("radii", "radii must be positive and strictly decreasing")

    masses = ball_masses(mu, centers, radii)
    valid = masses > 0.0
    skipped = int((~valid).sum())
    if skipped > GROWTH_MAX_SKIPPED * masses.size:
        raise ValidationError("radii", f"{skipped} of {masses.size} sampled balls are empty")

    log_mass = np.where(valid, np.log(np.where(valid, masses, 1.0)), 0.0)
    counts = valid.sum(axis=0)
    usable = counts > 0
    if usable.sum() < 2:
        raise ValidationError("radii", "fewer than two radii hold any mass")
    mean_log = log_mass[:, usable].sum(axis=0) / counts[usable]
    fit = stats.linregress(np.log(radii[usable]), mean_log)

    exponent = float(fit.slope)
    ratios = masses / radii[None, :] ** exponent
    report = GrowthReport(
        fitted_exponent=exponent,
        fitted_constant=float(math.exp(fit.intercept)),
        radii_range=(float(radii.min()), float(radii.max())),
        max_ratio=float(ratios[valid].max()),
        sample_count=int(valid.sum()),
        skipped=skipped,
        fit_r2=float(fit.rvalue**2),
        radii=tuple(float(r) for r in radii[usable]),
        mean_log_mass=tuple(float(m) for m in mean_log),
    )
    logger.debug(f"Growth fit: exponent={exponent:.4f}, r2={report.fit_r2:.4f}, skipped={skipped}")
    return report


def max_growth_ratio(
    mu: DiscreteMeasure, centers: np.ndarray, radii: Sequence[float], exponent: float
) -> float:
    """sup over the sampled balls of mu(B(x, r)) / r^exponent."""
    radii = np.asarray(radii, dtype=float)
    return float((ball_masses(mu, centers, radii) / radii[None, :] ** exponent).max())


def lp_norm(values: np.ndarray, mu: DiscreteMeasure, exponent: float) -> float:
    """(sum_k w_k |v_k|^t)^(1/t) for per-atom values v."""
    values = np.asarray(values, dtype=float)
    if values.shape != (mu.size,):
        raise ValidationError("values", f"expected {mu.size} per-atom values")
    return float(np.sum(mu.weights * np.abs(values) ** exponent)) ** (1.0 / exponent)


# --- Coupling atoms to a mesh ---


@dataclass(frozen=True, eq=False)
class AtomCoupling:
    """Point evaluation of P1 functions at the atoms of a measure."""

    mesh: Mesh
    measure: DiscreteMeasure
    matrix: sparse.csr_matrix

    @property
    def weights(self) -> np.ndarray:
        return self.measure.weights

    def values(self, coeffs: np.ndarray) -> np.ndarray:
        return self.matrix @ coeffs

    def load(self, atom_values: np.ndarray) -> np.ndarray:
        """Nodal vector <v mu, phi_i> = sum_k w_k v_k phi_i(x_k)."""
        return self.matrix.T @ (self.measure.weights * atom_values)


@lru_cache(maxsize=32)
def couple(mesh: Mesh, mu: DiscreteMeasure) -> AtomCoupling:
    """Locate every atom in the mesh (cached per mesh/measure pair).

    Raises:
        ValidationError: If an atom lies outside the meshed domain
    """
    try:
        matrix = mesh.evaluation_matrix(mu.points)
    except ValidationError as e:
        raise ValidationError("measure", f"atoms must lie in the closed domain: {e.message}")

    spacing = atom_spacing(mu)
    if spacing > mesh.h / 2.0:
        logger.warning(
            f"Atom spacing {spacing:.3g} exceeds half the mesh size {mesh.h / 2.0:.3g}; "
            "the measure may not resolve the finite element space"
        )
    return AtomCoupling(mesh=mesh, measure=mu, matrix=matrix)
