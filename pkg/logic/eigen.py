# eigen.py - First (p, mu)-eigenpair, sign and simplicity checks

"""First eigenpair of -div(|grad u|^{p-2} grad u) = lambda |u|^{p-2} u mu.

The eigenvalue is the minimum of the Rayleigh quotient
R(u) = sum_T area |grad u|^p / sum_k w_k |u(x_k)|^p over P1 functions
vanishing on the boundary. Iterates are renormalized to unit mu-mass after
every accepted step.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.sparse.linalg import splu

from core.config import (
    DEFAULT_SEED,
    LOWER_BOUND_BATCH,
    LOWER_BOUND_STEPS,
    SIGN_TOL,
    SIMPLICITY_DISTANCE_FACTOR,
    SIMPLICITY_MIN_SEEDS,
    SIMPLICITY_RESIDUAL_FLOOR,
    SIMPLICITY_SPREAD,
    SIMPLICITY_TIGHTENING,
)
from core.exceptions import BreakdownError, ConvergenceError, ValidationError
from core.validation import ensure_valid, validate_int_range
from logic.measure import DiscreteMeasure, couple, lp_norm
from logic.mesh import FeFunction, Mesh, dirichlet_energy
from logic.pde import (
    DescentDirection,
    SolverParams,
    backtrack,
    p_dirichlet,
    p_dirichlet_gradient,
    relative_decrease,
    solve_poisson,
    stationary_to_roundoff,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EigenPair:
    """A normalized first eigenpair.

    Attributes:
        eigenvalue: lambda, the exact Rayleigh quotient of u
        u: Eigenfunction with sum_k w_k |u(x_k)|^p = 1 and sum_k w_k u(x_k) >= 0
        iterations: Accepted descent steps
        rayleigh_history: Regularized Rayleigh quotient after every accepted step
        residual_norm: eigen_residual of the pair
        converged: Whether both stopping tolerances were met
        seed: Seed of the random initialization
    """

    eigenvalue: float
    u: FeFunction
    iterations: int
    rayleigh_history: tuple[float, ...]
    residual_norm: float
    converged: bool = True
    seed: Optional[int] = None

    def __post_init__(self):
        if not math.isfinite(self.eigenvalue):
            raise ValidationError("eigenvalue", "must be finite")

    def with_eigenvalue(self, eigenvalue: float) -> EigenPair:
        return dataclasses.replace(self, eigenvalue=eigenvalue)


def _signed_power(values: np.ndarray, p: float) -> np.ndarray:
    """|v|^{p-2} v, continuous at 0 for p > 1."""
    return np.sign(values) * np.abs(values) ** (p - 1.0)


def _mu_mass(coupling, coeffs: np.ndarray, p: float) -> float:
    return float(np.sum(coupling.weights * np.abs(coupling.values(coeffs)) ** p))


def rayleigh_quotient(u: FeFunction, mu: DiscreteMeasure, params: SolverParams) -> float:
    """sum_T area |grad u|^p / sum_k w_k |u(x_k)|^p.

    Raises:
        ValidationError: If u vanishes at every atom
    """
    denominator = _mu_mass(couple(u.mesh, mu), u.coeffs, params.p)
    if not denominator > 0.0:
        raise ValidationError("u", "vanishes mu-almost everywhere; not admissible in the Rayleigh quotient")
    return dirichlet_energy(u, params.p) / denominator


def eigen_residual(pair: EigenPair, mu: DiscreteMeasure, params: SolverParams) -> float:
    """max over interior nodes of |a_p(u, phi_i) - lambda <|u|^{p-2} u mu, phi_i>|."""
    mesh = pair.u.mesh
    coupling = couple(mesh, mu)
    coeffs = pair.u.coeffs
    stiffness_part = p_dirichlet_gradient(mesh, coeffs, params.p, params.grad_reg)
    mass_part = coupling.load(_signed_power(coupling.values(coeffs), params.p))
    defect = (stiffness_part - pair.eigenvalue * mass_part)[mesh.interior]
    return float(np.abs(defect).max()) if defect.size else 0.0


def minimize_rayleigh(
    mu: DiscreteMeasure, mesh: Mesh, params: SolverParams, seed: int = DEFAULT_SEED
) -> EigenPair:
    """Minimize the Rayleigh quotient from a seeded positive start.

    Each step moves along -H^{-1} r, where r = a_p(u) - R(u) b(u) is the
    eigen residual and H the regularized Hessian of the p-energy (the
    stiffness matrix for p = 2, which turns the scheme into inverse
    iteration). The step is backtracked against R and u is renormalized to
    unit mu-mass.

    Raises:
        ValidationError: If mu has no mass reachable from the interior nodes
        BreakdownError: If the normalization collapses or the line search meets NaN
    """
    operation = "minimize_rayleigh"
    p, eps = params.p, params.grad_reg
    coupling = couple(mesh, mu)
    interior = mesh.interior
    if not len(interior):
        raise ValidationError("mesh", "has no interior vertices")

    x = np.zeros(mesh.num_vertices)
    x[interior] = np.random.default_rng(seed).uniform(0.5, 1.5, size=len(interior))
    mass = _mu_mass(coupling, x, p)
    if not mass > 0.0:
        raise ValidationError("measure", "carries no mass where interior basis functions are nonzero")
    x /= mass ** (1.0 / p)

    def quotient(coeffs: np.ndarray) -> float:
        denominator = _mu_mass(coupling, coeffs, p)
        if not denominator > 0.0:
            return math.inf
        return p_dirichlet(mesh, coeffs, p, eps) / denominator

    value = quotient(x)
    history = [value]
    direction_of = DescentDirection(mesh, params)
    decrease = 0.0
    converged = False
    residual = math.inf
    iteration = 0

    while True:
        r = (
            p_dirichlet_gradient(mesh, x, p, eps)
            - value * coupling.load(_signed_power(coupling.values(x), p))
        )[interior]
        residual = float(np.abs(r).max())
        if residual < params.tol_residual and decrease < params.tol_energy:
            converged = True
            break
        if iteration >= params.max_iter:
            break

        direction = direction_of(x, r)
        slope = p * float(r @ direction)
        if not slope < 0.0:
            direction = -r
            slope = -p * float(r @ r)
        step, trial, trial_value = backtrack(quotient, x, interior, direction, value, slope, operation)
        if step is None:
            converged = residual < params.tol_residual or stationary_to_roundoff(slope, value)
            if not converged:
                logger.warning(f"{operation}: line search stalled with residual {residual:.3e}")
            break

        mass = _mu_mass(coupling, trial, p)
        if not mass > np.finfo(float).tiny:
            raise BreakdownError("normalization collapsed to zero", operation, f"mass={mass!r}")
        if trial_value > value:
            raise BreakdownError("Rayleigh quotient increased", operation, f"{value!r} -> {trial_value!r}")
        x = trial / mass ** (1.0 / p)
        decrease = relative_decrease(value, trial_value)
        value = trial_value
        history.append(value)
        iteration += 1
        logger.debug(f"{operation}: iter {iteration}, R={value:.12g}, residual={residual:.3e}, step={step:.3g}")

    if np.sum(coupling.weights * coupling.values(x)) < 0.0:
        x = -x
    u = FeFunction(mesh, x)
    eigenvalue = rayleigh_quotient(u, mu, params)
    pair = EigenPair(
        eigenvalue=eigenvalue,
        u=u,
        iterations=iteration,
        rayleigh_history=tuple(history),
        residual_norm=0.0,
        converged=converged,
        seed=seed,
    )
    final_residual = eigen_residual(pair, mu, params)
    if converged:
        logger.info(f"{operation}: lambda={eigenvalue:.10g} after {iteration} iterations (seed {seed})")
    else:
        logger.warning(f"{operation}: not converged after {iteration} iterations, residual {final_residual:.3e}")
    return dataclasses.replace(pair, residual_norm=final_residual)


# --- Sign and simplicity ---


@dataclass(frozen=True)
class SignReport:
    """Extremes of u over interior vertices under the positive sign convention."""

    min_value: float
    max_value: float
    tolerance: float
    passed: bool


def check_sign(pair: Union[EigenPair, FeFunction], tolerance: float = SIGN_TOL) -> SignReport:
    """PASS iff min over interior vertices >= -tolerance.

    A plain FeFunction is first flipped so that its interior sum is nonnegative.
    """
    u = pair.u if isinstance(pair, EigenPair) else pair
    values = u.coeffs[u.mesh.interior]
    if not isinstance(pair, EigenPair) and values.sum() < 0.0:
        values = -values
    if not values.size:
        raise ValidationError("u", "mesh has no interior vertices")
    low, high = float(values.min()), float(values.max())
    return SignReport(min_value=low, max_value=high, tolerance=tolerance, passed=low >= -tolerance)


@dataclass(frozen=True)
class SimplicityReport:
    """Cross-seed agreement of first eigenpairs."""

    seeds: tuple[int, ...]
    eigenvalues: tuple[float, ...]
    excluded: tuple[int, ...]
    lambda_spread: float
    max_aligned_distance: float
    distance_threshold: float
    passed: bool
    pairs: tuple[EigenPair, ...] = field(default=(), repr=False, compare=False)


def aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    """max |u - c v| with c = (u . v)/(v . v), the least-squares scalar."""
    denominator = float(v @ v)
    scale = float(u @ v) / denominator if denominator > 0.0 else 0.0
    return float(np.abs(u - scale * v).max())


def check_simplicity(
    mu: DiscreteMeasure,
    mesh: Mesh,
    params: SolverParams,
    num_seeds: int = SIMPLICITY_MIN_SEEDS,
    seeds: Optional[Sequence[int]] = None,
) -> SimplicityReport:
    """Run minimize_rayleigh from several seeds and compare the results.

    Each seed is solved with tol_residual tightened by SIMPLICITY_TIGHTENING.
    PASS iff the relative lambda spread is at most SIMPLICITY_SPREAD and
    every pairwise aligned L-infinity distance is at most
    SIMPLICITY_DISTANCE_FACTOR * tol_residual.

    Raises:
        ValidationError: If fewer than SIMPLICITY_MIN_SEEDS seeds are requested
        ConvergenceError: If no seed converges
    """
    ensure_valid(validate_int_range(num_seeds, SIMPLICITY_MIN_SEEDS, None, "num_seeds"), "num_seeds")
    if seeds is None:
        seeds = [DEFAULT_SEED + i for i in range(num_seeds)]
    seeds = tuple(int(s) for s in seeds)
    if len(seeds) < SIMPLICITY_MIN_SEEDS:
        raise ValidationError("seeds", f"need at least {SIMPLICITY_MIN_SEEDS} seeds")

    tight = params.replace(
        tol_residual=max(params.tol_residual * SIMPLICITY_TIGHTENING, SIMPLICITY_RESIDUAL_FLOOR)
    )
    pairs, excluded = [], []
    for seed in seeds:
        pair = minimize_rayleigh(mu, mesh, tight, seed=seed)
        if pair.converged:
            pairs.append(pair)
        else:
            logger.warning(f"check_simplicity: seed {seed} did not converge and is excluded")
            excluded.append(seed)
    if not pairs:
        raise ConvergenceError("no seed converged", "check_simplicity", f"seeds={list(seeds)}")

    eigenvalues = [pair.eigenvalue for pair in pairs]
    spread = (max(eigenvalues) - min(eigenvalues)) / min(eigenvalues)
    distance = max(
        (
            aligned_distance(a.u.coeffs, b.u.coeffs)
            for i, a in enumerate(pairs)
            for b in pairs[i + 1 :]
        ),
        default=0.0,
    )
    threshold = SIMPLICITY_DISTANCE_FACTOR * params.tol_residual
    passed = len(pairs) >= 2 and spread <= SIMPLICITY_SPREAD and distance <= threshold
    logger.info(f"check_simplicity: spread={spread:.3e}, aligned distance={distance:.3e}, passed={passed}")
    return SimplicityReport(
        seeds=tuple(pair.seed for pair in pairs),
        eigenvalues=tuple(eigenvalues),
        excluded=tuple(excluded),
        lambda_spread=spread,
        max_aligned_distance=distance,
        distance_threshold=threshold,
        passed=passed,
        pairs=tuple(pairs),
    )


# --- Lower bound and inequalities ---


def lambda_lower_bound(
    mu: DiscreteMeasure, mesh: Mesh, params: SolverParams, seed: int = DEFAULT_SEED
) -> float:
    """Lower bound on the first eigenvalue from positive test functions.

    For positive v let w solve the (p, mu)-Poisson problem with right side
    |v|^{p-2} v mu. Then min_i (v_i / w_i)^{p-1} over interior nodes bounds
    lambda from below (exact Collatz-Wielandt bound for p = 2 when the
    stiffness matrix is an M-matrix). Each of LOWER_BOUND_BATCH random
    starts is refined by LOWER_BOUND_STEPS steps v <- w; the best bound is
    returned.

    Raises:
        BreakdownError: If no candidate yields a positive bound
    """
    p = params.p
    coupling = couple(mesh, mu)
    interior = mesh.interior
    if not len(interior):
        raise ValidationError("mesh", "has no interior vertices")
    factor = splu(mesh.stiffness[interior][:, interior].tocsc()) if p == 2.0 else None

    def poisson(v: np.ndarray) -> np.ndarray:
        load = _signed_power(coupling.values(v), p)
        if factor is not None:
            w = np.zeros_like(v)
            w[interior] = factor.solve(coupling.load(load)[interior])
            return w
        return np.array(solve_poisson(load, mu, mesh, params).u.coeffs)

    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(LOWER_BOUND_BATCH):
        v = np.zeros(mesh.num_vertices)
        v[interior] = rng.uniform(0.5, 1.5, size=len(interior))
        for _ in range(LOWER_BOUND_STEPS + 1):
            w = poisson(v)
            if np.all(w[interior] > 0.0):
                bound = float(np.min(v[interior] / w[interior])) ** (p - 1.0)
                best = max(best, bound)
            scale = float(np.abs(w).max())
            if not scale > 0.0:
                break
            v = w / scale

    if not best > 0.0:
        raise BreakdownError(
            "no test function produced a positive bound", "lambda_lower_bound", f"seed={seed}"
        )
    logger.debug(f"lambda_lower_bound: {best:.10g}")
    return best


def holder_bridge(u: FeFunction, mu: DiscreteMeasure, p: float, q: float) -> tuple[float, float]:
    """Both sides of ||u||_{p,mu} <= mu(Omega)^{1/p - 1/q} ||u||_{q,mu}."""
    if not 1.0 <= p <= q:
        raise ValidationError("q", "need 1 <= p <= q")
    values = couple(u.mesh, mu).values(u.coeffs)
    total = float(mu.weights.sum())
    return lp_norm(values, mu, p), total ** (1.0 / p - 1.0 / q) * lp_norm(values, mu, q)


def convexity_inequality(u: FeFunction, v: FeFunction, p: float) -> tuple[float, float]:
    """Both sides of int |grad w|^p <= (int |grad u|^p + int |grad v|^p) / 2.

    w is the P1 interpolant of ((u^p + v^p)/2)^{1/p}; u and v must be nonnegative.
    """
    if u.mesh is not v.mesh:
        raise ValidationError("v", "must live on the same mesh as u")
    if np.any(u.coeffs < 0.0) or np.any(v.coeffs < 0.0):
        raise ValidationError("u", "both functions must be nonnegative")
    w = u.with_coeffs(((u.coeffs**p + v.coeffs**p) / 2.0) ** (1.0 / p))
    return dirichlet_energy(w, p), 0.5 * (dirichlet_energy(u, p) + dirichlet_energy(v, p))
