# analysis.py - Empirical regularity checks for computed eigenfunctions

"""Checks of sup bounds, Hölder exponents and measure growth on discrete solutions.

None of these certify a theorem; they measure the quantities a theorem
bounds and report whether the numbers behave as the bound predicts
(stable constants under refinement, fitted exponents above a priori
bounds, ratios that blow up where a growth condition fails).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree
from scipy.stats import qmc

from core.config import (
    CANTOR_ALPHA_TOL,
    CANTOR_MASS_BOUND,
    CANTOR_RADIUS_FACTOR,
    DEFAULT_LOG_CANTOR_R0,
    DEFAULT_RESOLUTIONS,
    DEFAULT_SEED,
    DIMENSION_SLACK,
    GROWTH_ALPHAS,
    HOLDER_ALPHA_RANGE,
    HOLDER_BINS,
    HOLDER_CAP,
    HOLDER_DIRECTIONS,
    HOLDER_MIN_BINS,
    HOLDER_MIN_DECADES,
    HOLDER_MIN_PAIRS,
    HOLDER_REGION_FRACTION,
    HOLDER_SOFT_FACTOR,
    HOLDER_STEEP_EDGES,
    LOG_CANTOR_CENTER,
    SPACE_DIM,
    SUP_CHECK_BALLS,
    SUP_CHECK_SIGMAS,
)
from core.exceptions import ValidationError
from core.validation import ensure_valid, validate_float_range, validate_int_range
from logic.eigen import EigenPair, minimize_rayleigh
from logic.measure import (
    DiscreteMeasure,
    GrowthReport,
    ball_mass,
    ball_masses,
    fit_growth_exponent,
    growth_sample,
    log_cantor_measure,
    log_cantor_tree,
)
from logic.mesh import FeFunction, Mesh, build_uniform_mesh
from logic.pde import SolverParams

logger = logging.getLogger(__name__)


# --- Exponent formulas ---


def _require_subcritical(params: SolverParams, operation: str) -> None:
    if params.p >= SPACE_DIM:
        raise ValidationError("p", f"{operation} needs p < 2; the estimate does not apply at p = 2")


def holder_bound(params: SolverParams) -> float:
    """min(0.999, (q - p)(2 - p) / (p (p - 1)))."""
    _require_subcritical(params, "holder_bound")
    p, q = params.p, params.q
    return min(HOLDER_CAP, (q - p) * (SPACE_DIM - p) / (p * (p - 1.0)))


def moser_epsilon(params: SolverParams) -> float:
    """min((2 - p)(q/p - 1), 2(p - 1)), the gain per step of the Moser iteration."""
    _require_subcritical(params, "moser_epsilon")
    p, q = params.p, params.q
    return min((SPACE_DIM - p) * (q / p - 1.0), SPACE_DIM * (p - 1.0))


def implied_holder_exponent(growth_exponent: float, params: SolverParams) -> float:
    """alpha with mu(B(x, R)) <= M R^{2 - p + alpha (p - 1)} at the given growth exponent.

    Clipped to [0, 0.999].
    """
    p = params.p
    alpha = (growth_exponent - (SPACE_DIM - p)) / (p - 1.0)
    return float(np.clip(alpha, 0.0, HOLDER_CAP))


# --- Sup-norm estimate ---


@dataclass(frozen=True)
class SupCheckEntry:
    """One (ball, sigma) evaluation of the local sup estimate."""

    center: tuple[float, float]
    radius: float
    sigma: float
    lhs: float
    rhs_core: float
    constant: float


@dataclass(frozen=True)
class SupCheckReport:
    entries: tuple[SupCheckEntry, ...]
    max_constant: float
    part: str = "positive"
    skipped: tuple[str, ...] = ()


def interior_balls(
    mesh: Mesh, count: int = SUP_CHECK_BALLS, radius: Optional[float] = None
) -> list[tuple[tuple[float, float], float]]:
    """Quasi-random (Halton) ball centers with B(center, 2 radius) inside the domain.

    Args:
        mesh: The mesh
        count: Number of balls
        radius: Ball radius (default: diameter / 16)

    Raises:
        ValidationError: If fewer than count admissible centers are found
    """
    ensure_valid(validate_int_range(count, 1, None, "count"), "count")
    if radius is None:
        radius = mesh.diameter / 16.0
    ensure_valid(validate_float_range(radius, 0.0, None, "radius", min_inclusive=False), "radius")

    low, high = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
    sampler = qmc.Halton(d=SPACE_DIM, scramble=False)
    balls = []
    draws = 0
    while len(balls) < count and draws < 64 * count:
        candidate = qmc.scale(sampler.random(1), low, high)[0]
        draws += 1
        if mesh.contains_ball(candidate, 2.0 * radius):
            balls.append(((float(candidate[0]), float(candidate[1])), float(radius)))
    if len(balls) < count:
        raise ValidationError("radius", f"only {len(balls)} of {count} balls of radius {radius:.3g} fit")
    return balls


def sup_bound_check(
    u: FeFunction,
    balls: Sequence[tuple[Sequence[float], float]],
    sigmas: Sequence[float],
    params: SolverParams,
    part: str = "positive",
) -> SupCheckReport:
    """Implied constants C = sup_{B(sigma r)} u+ (1 - sigma)^{2/p} / (mean over B(r) of (u+)^p)^{1/p}.

    Args:
        u: The function
        balls: (center, r) pairs with B(center, 2r) inside the domain
        sigmas: Values in (0, 1) (analyze_eigenfunction uses SUP_CHECK_SIGMAS)
        params: Supplies p
        part: "positive" checks u+, "negative" checks u-

    Raises:
        ValidationError: If a ball is not admissible or a sigma is outside (0, 1)
    """
    if part not in ("positive", "negative"):
        raise ValidationError("part", "must be 'positive' or 'negative'")
    for sigma in sigmas:
        ensure_valid(validate_float_range(sigma, 0.0, 1.0, "sigma", False, False), "sigma")

    mesh = u.mesh
    p = params.p
    values = np.maximum(u.coeffs if part == "positive" else -u.coeffs, 0.0)
    powered = values**p
    triangle_means = powered[mesh.triangles].mean(axis=1)

    entries, skipped = [], []
    for center, radius in balls:
        center = np.asarray(center, dtype=float)
        if not mesh.contains_ball(center, 2.0 * radius):
            raise ValidationError("balls", f"B({center.tolist()}, {2.0 * radius:.4g}) leaves the domain")
        vertex_distance = np.linalg.norm(mesh.vertices - center, axis=1)
        inside = np.all(vertex_distance[mesh.triangles] <= radius, axis=1)
        if not inside.any():
            skipped.append(f"no triangle inside B({center.tolist()}, {radius:.4g})")
            continue
        areas = mesh.element_areas[inside]
        rhs_core = float(np.sum(areas * triangle_means[inside]) / np.sum(areas)) ** (1.0 / p)

        for sigma in sigmas:
            near = vertex_distance <= sigma * radius
            if not near.any():
                skipped.append(f"no vertex in B({center.tolist()}, {sigma * radius:.4g})")
                continue
            lhs = float(values[near].max())
            if lhs == 0.0:
                constant = 0.0
            elif rhs_core > 0.0:
                constant = lhs * (1.0 - sigma) ** (SPACE_DIM / p) / rhs_core
            else:
                constant = math.inf
            entries.append(
                SupCheckEntry(
                    center=(float(center[0]), float(center[1])),
                    radius=float(radius),
                    sigma=float(sigma),
                    lhs=lhs,
                    rhs_core=rhs_core,
                    constant=constant,
                )
            )

    for note in skipped:
        logger.info(f"sup_bound_check: skipped, {note}")
    max_constant = max((entry.constant for entry in entries), default=0.0)
    return SupCheckReport(entries=tuple(entries), max_constant=max_constant, part=part, skipped=tuple(skipped))


# --- Hölder exponent fit ---


@dataclass(frozen=True, eq=False)
class HolderFit:
    """Slope of binned max log-increments against log-distance.

    slope is the raw regression slope; alpha_hat is slope clipped to
    HOLDER_ALPHA_RANGE. decades is log10 of the largest over the smallest
    sampled distance scale.
    """

    alpha_hat: float
    fit_r2: float
    pair_count: int
    bin_log_distance: tuple[float, ...] = ()
    bin_log_increment: tuple[float, ...] = ()
    slope: float = 0.0
    decades: float = 0.0
    distances: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    increments: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)


def _holder_pairs(
    u: FeFunction, region: np.ndarray, d_min: float, d_max: float, pair_budget: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vertex pairs (first, second) inside region for holder_exponent_fit.

    Every mesh edge of the region is a pair. Anchors are the ends of the
    steepest edges plus random region vertices; each anchor is paired with
    the region vertices nearest to anchor + d e over a geometric grid of d
    in [d_min, d_max] and HOLDER_DIRECTIONS evenly spaced directions e.
    """
    mesh = u.mesh
    vertices = mesh.vertices
    in_region = np.zeros(mesh.num_vertices, dtype=bool)
    in_region[region] = True

    edges = mesh.edges[np.all(in_region[mesh.edges], axis=1)]
    quotients = np.abs(u.coeffs[edges[:, 0]] - u.coeffs[edges[:, 1]]) / np.linalg.norm(
        vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1
    )
    steepest = edges[np.argsort(-quotients, kind="stable")[:HOLDER_STEEP_EDGES]]

    rng = np.random.default_rng(seed)
    count = min(len(region), math.ceil(pair_budget / (HOLDER_BINS * HOLDER_DIRECTIONS)))
    anchors = np.union1d(steepest.ravel(), rng.choice(region, size=count, replace=False))

    levels = np.geomspace(d_min, d_max, HOLDER_BINS)
    angles = 2.0 * np.pi * np.arange(HOLDER_DIRECTIONS) / HOLDER_DIRECTIONS
    steps = levels[:, None, None] * np.stack([np.cos(angles), np.sin(angles)], axis=-1)[None, :, :]
    targets = vertices[anchors][:, None, :] + steps.reshape(-1, 2)[None, :, :]
    _, nearest = cKDTree(vertices[region]).query(targets.reshape(-1, 2))

    first = np.concatenate([edges[:, 0], np.repeat(anchors, len(levels) * len(angles))])
    second = np.concatenate([edges[:, 1], region[nearest]])
    return first, second


def holder_exponent_fit(
    u: FeFunction,
    pair_budget: int = HOLDER_MIN_PAIRS,
    seed: int = DEFAULT_SEED,
    center: Optional[Sequence[float]] = None,
    radius: Optional[float] = None,
) -> HolderFit:
    """Estimate the Hölder exponent of u from vertex pairs at stratified distances.

    Distances run from the shortest edge to a quarter of the mesh diameter
    (to radius for a fit localized around center). They are split into
    HOLDER_BINS log bins; in each bin the pair with the largest increment
    gives one point (its log-distance, its log-increment), and the slope of
    a least-squares line through these points is the exponent estimate.

    Raises:
        ValidationError: If the budget is too small, the distances span fewer
            than HOLDER_MIN_DECADES decades or fewer than HOLDER_MIN_BINS bins
            carry a nonzero increment
    """
    ensure_valid(validate_int_range(pair_budget, HOLDER_MIN_PAIRS, None, "pair_budget"), "pair_budget")
    mesh = u.mesh
    region = np.arange(mesh.num_vertices)
    d_max = HOLDER_REGION_FRACTION * mesh.diameter
    if center is not None:
        if radius is None or not radius > 0.0:
            raise ValidationError("radius", "a positive radius is required with center")
        offsets = np.linalg.norm(mesh.vertices - np.asarray(center, dtype=float), axis=1)
        region = np.flatnonzero(offsets <= radius)
        d_max = float(radius)
    d_min = mesh.min_edge
    if len(region) < 2 or not d_max > d_min:
        raise ValidationError("u", "mesh too coarse for a Hölder fit in the requested region")
    decades = math.log10(d_max / d_min)
    if decades < HOLDER_MIN_DECADES:
        raise ValidationError(
            "u",
            f"pair distances span {decades:.2f} decades, need {HOLDER_MIN_DECADES}; refine the mesh",
        )

    first, second = _holder_pairs(u, region, d_min, d_max, pair_budget, seed)
    distances = np.linalg.norm(mesh.vertices[first] - mesh.vertices[second], axis=1)
    keep = (first != second) & (distances <= d_max + mesh.h)
    first, second, distances = first[keep], second[keep], distances[keep]
    increments = np.abs(u.coeffs[first] - u.coeffs[second])

    signal = increments > 0.0
    if signal.sum() < 2:
        raise ValidationError("u", "no increments to fit (u is constant on the sampled pairs)")
    log_d = np.log(distances[signal])
    log_inc = np.log(increments[signal])
    edges = np.linspace(math.log(d_min), math.log(d_max), HOLDER_BINS + 1)
    which = np.clip(np.digitize(log_d, edges) - 1, 0, HOLDER_BINS - 1)

    bin_x, bin_y = [], []
    for b in range(HOLDER_BINS):
        members = np.flatnonzero(which == b)
        if members.size:
            top = members[np.argmax(log_inc[members])]
            bin_x.append(float(log_d[top]))
            bin_y.append(float(log_inc[top]))
    if len(bin_x) < HOLDER_MIN_BINS:
        raise ValidationError(
            "u", f"only {len(bin_x)} nonempty distance bins (need {HOLDER_MIN_BINS}); mesh too coarse"
        )

    fit = stats.linregress(bin_x, bin_y)
    low, high = HOLDER_ALPHA_RANGE
    alpha_hat = min(max(float(fit.slope), low), high)
    if alpha_hat != fit.slope:
        logger.warning(f"holder_exponent_fit: slope {fit.slope:.4f} clipped to [{low}, {high}]")
    logger.debug(
        f"holder_exponent_fit: alpha={alpha_hat:.4f}, r2={fit.rvalue**2:.4f}, "
        f"bins={len(bin_x)}, pairs={len(distances)}, decades={decades:.2f}"
    )
    return HolderFit(
        alpha_hat=alpha_hat,
        fit_r2=float(fit.rvalue**2),
        pair_count=int(len(distances)),
        bin_log_distance=tuple(bin_x),
        bin_log_increment=tuple(bin_y),
        slope=float(fit.slope),
        decades=decades,
        distances=distances,
        increments=increments,
    )


# --- Growth and dimension ---


@dataclass(frozen=True)
class DimensionReport:
    s_target: float
    fitted_exponent: float
    passed: bool
    max_q: float
    growth: GrowthReport


def dimension_consistency_check(
    mu: DiscreteMeasure,
    params: SolverParams,
    seed: int = DEFAULT_SEED,
    growth: Optional[GrowthReport] = None,
) -> DimensionReport:
    """Compare the fitted growth exponent of mu with s_target = q(2 - p)/p.

    PASS iff fitted >= s_target - DIMENSION_SLACK. max_q inverts the relation
    at the fitted exponent (unbounded for p = 2).
    """
    if growth is None:
        centers, radii = growth_sample(mu, seed)
        growth = fit_growth_exponent(mu, centers, radii)
    p, q = params.p, params.q
    s_target = q * (SPACE_DIM - p) / p
    fitted = growth.fitted_exponent
    max_q = math.inf if p >= SPACE_DIM else fitted * p / (SPACE_DIM - p)
    passed = fitted >= s_target - DIMENSION_SLACK
    log = logger.info if passed else logger.warning
    log(f"dimension check: s_target={s_target:.4f}, fitted={fitted:.4f}, max q={max_q:.4g}")
    return DimensionReport(s_target=s_target, fitted_exponent=fitted, passed=passed, max_q=max_q, growth=growth)


# --- Regularity report for an eigenfunction ---


@dataclass(frozen=True)
class RegularityReport:
    """Sup check, Hölder fit and a priori exponents for one eigenfunction.

    bound_alpha, moser_epsilon and soft_check are None when p = 2.
    """

    sup_check: SupCheckReport
    holder_fit: HolderFit
    bound_alpha: Optional[float]
    moser_epsilon: Optional[float]
    implied_alpha: Optional[float]
    soft_check: Optional[bool]


def analyze_eigenfunction(
    pair: EigenPair,
    mu: DiscreteMeasure,
    params: SolverParams,
    seed: int = DEFAULT_SEED,
    pair_budget: int = HOLDER_MIN_PAIRS,
    balls: Optional[Sequence[tuple[Sequence[float], float]]] = None,
) -> RegularityReport:
    """Run every regularity check on a converged eigenpair."""
    mesh = pair.u.mesh
    if balls is None:
        balls = interior_balls(mesh)
    sup_check = sup_bound_check(pair.u, balls, SUP_CHECK_SIGMAS, params)
    holder_fit = holder_exponent_fit(pair.u, pair_budget, seed)

    bound_alpha = epsilon = soft_check = None
    if params.p < SPACE_DIM:
        bound_alpha = holder_bound(params)
        epsilon = moser_epsilon(params)
        soft_check = holder_fit.alpha_hat >= HOLDER_SOFT_FACTOR * bound_alpha
        if not soft_check:
            logger.warning(
                f"Hölder fit {holder_fit.alpha_hat:.3f} below {HOLDER_SOFT_FACTOR} x bound {bound_alpha:.3f}"
            )

    implied = None
    try:
        centers, radii = growth_sample(mu, seed)
        implied = implied_holder_exponent(fit_growth_exponent(mu, centers, radii).fitted_exponent, params)
    except ValidationError as e:
        logger.warning(f"No growth exponent for the implied Hölder exponent: {e}")

    return RegularityReport(
        sup_check=sup_check,
        holder_fit=holder_fit,
        bound_alpha=bound_alpha,
        moser_epsilon=epsilon,
        implied_alpha=implied,
        soft_check=soft_check,
    )


# --- Log-Cantor counterexample ---


@dataclass(frozen=True)
class CounterexampleReport:
    """Measure-side and solution-side evidence at p = 2 for the log-Cantor measure."""

    q: float
    level: int
    r0: float
    resolvable_level: int
    resolutions: tuple[int, ...]
    eigenvalues: tuple[float, ...]
    converged: bool
    alpha_hats: tuple[float, ...]
    alpha_non_increasing: bool
    growth_ratios: dict[float, tuple[float, ...]]
    onsets: dict[float, Optional[int]]
    growth_increasing: bool
    brute_force_agrees: bool
    max_mass_ratio: float
    mass_bound_ok: bool
    passed: bool


def _increasing_onset(values: np.ndarray) -> Optional[int]:
    """Smallest k with values[k:] strictly increasing, or None when fewer than two values remain."""
    onset = len(values) - 1
    while onset > 0 and values[onset - 1] < values[onset]:
        onset -= 1
    return onset if onset < len(values) - 1 else None


def counterexample_probe(
    params: SolverParams,
    level: int,
    resolutions: Sequence[int] = tuple(DEFAULT_RESOLUTIONS),
    r0: float = DEFAULT_LOG_CANTOR_R0,
    seed: int = DEFAULT_SEED,
    pair_budget: int = HOLDER_MIN_PAIRS,
    alphas: Sequence[float] = GROWTH_ALPHAS,
    alpha_tolerance: float = CANTOR_ALPHA_TOL,
) -> CounterexampleReport:
    """Collect the log-Cantor evidence at p = 2.

    Growth ratios mu(B_k)/r_k^alpha of the tree balls are taken in closed
    form and confirmed by summing atoms on resolvable levels; strict increase
    is required from the onset level for every alpha. The mass bound
    mu(B(x, r_k))/h(r_k) is checked over atoms and tree centers. The
    eigenfunction is computed on the unit square at every resolution and its
    Hölder exponent fitted near the tree root.

    Raises:
        ValidationError: If p != 2 or the tree cannot be built
    """
    if params.p != SPACE_DIM:
        raise ValidationError("p", "the log-Cantor counterexample runs at p = 2")
    resolutions = tuple(int(r) for r in resolutions)
    if not resolutions:
        raise ValidationError("resolutions", "at least one resolution is required")

    q = params.q
    tree = log_cantor_tree(q, level, LOG_CANTOR_CENTER, r0)
    mu = log_cantor_measure(q, level, (LOG_CANTOR_CENTER, r0))
    radii, masses = tree.radii, tree.masses
    resolvable = tree.resolvable_level

    growth_ratios, onsets = {}, {}
    for alpha in alphas:
        ratios = masses / radii**alpha
        growth_ratios[float(alpha)] = tuple(float(r) for r in ratios)
        onsets[float(alpha)] = _increasing_onset(ratios)
    growth_increasing = all(onset is not None for onset in onsets.values())

    brute = np.array([ball_mass(mu, tree.centers[k][0], radii[k] / 2.0) for k in range(resolvable + 1)])
    brute_force_agrees = bool(np.allclose(brute, masses[: resolvable + 1], rtol=1e-12, atol=0.0))

    max_ratio = 0.0
    for k in range(resolvable + 1):
        centers = np.concatenate([np.unique(mu.points, axis=0), tree.centers[k]])
        ratio = ball_masses(mu, centers, [radii[k]])[:, 0] / masses[k]
        max_ratio = max(max_ratio, float(ratio.max()))
    mass_bound_ok = max_ratio <= CANTOR_MASS_BOUND

    eigenvalues, alpha_hats, converged = [], [], True
    fit_radius = CANTOR_RADIUS_FACTOR * radii[min(1, level)]
    for resolution in resolutions:
        mesh = build_uniform_mesh("unit_square", resolution)
        pair = minimize_rayleigh(mu, mesh, params, seed=seed)
        converged = converged and pair.converged
        fit = holder_exponent_fit(pair.u, pair_budget, seed, center=tree.root, radius=fit_radius)
        eigenvalues.append(pair.eigenvalue)
        alpha_hats.append(fit.alpha_hat)
        logger.info(f"counterexample: resolution {resolution}, lambda={pair.eigenvalue:.6g}, alpha={fit.alpha_hat:.4f}")

    alpha_non_increasing = all(b <= a + alpha_tolerance for a, b in zip(alpha_hats, alpha_hats[1:]))
    passed = growth_increasing and alpha_non_increasing and mass_bound_ok and brute_force_agrees
    return CounterexampleReport(
        q=float(q),
        level=level,
        r0=float(r0),
        resolvable_level=resolvable,
        resolutions=resolutions,
        eigenvalues=tuple(eigenvalues),
        converged=converged,
        alpha_hats=tuple(alpha_hats),
        alpha_non_increasing=alpha_non_increasing,
        growth_ratios=growth_ratios,
        onsets=onsets,
        growth_increasing=growth_increasing,
        brute_force_agrees=brute_force_agrees,
        max_mass_ratio=max_ratio,
        mass_bound_ok=mass_bound_ok,
        passed=passed,
    )
