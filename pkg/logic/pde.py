# pde.py - (p, mu)-Poisson problem by convex energy minimization

"""Discrete solver for -div(|grad u|^{p-2} grad u) = f mu with zero boundary values.

The solution minimizes J(u) = (1/p) sum_T area (|grad u|^2 + eps^2)^{p/2}
- sum_k w_k u(x_k) f_k over P1 functions vanishing on the boundary.
Boundary unknowns are eliminated; descent works on interior coefficients.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve, splu

from core.config import (
    ARMIJO_C,
    BACKTRACK_FACTOR,
    DEFAULT_DESCENT,
    DEFAULT_GRAD_REG,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL_ENERGY,
    DEFAULT_TOL_RESIDUAL,
    DESCENT_METHODS,
    HESSIAN_FLOOR,
    MAX_BACKTRACKS,
    REG_CONTINUATION_FACTOR,
    REG_CONTINUATION_MAX_STAGES,
    STALL_RTOL,
)
from core.exceptions import BreakdownError, ValidationError
from core.validation import (
    ensure_valid,
    validate_float_range,
    validate_in_list,
    validate_int_range,
)
from logic.measure import DiscreteMeasure, couple, lp_norm
from logic.mesh import FeFunction, Mesh, assemble_matrix, assemble_vector, validate_exponent

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverParams:
    """Exponents and tolerances shared by every solver.

    Attributes:
        p: Exponent of the p-Dirichlet energy, 1 < p <= 2
        q: Integrability exponent of the measure, p < q <= 2p/(2-p) (any finite q for p = 2)
        grad_reg: Regularization eps of |grad u| near zero
        tol_energy: Relative decrease threshold of the objective
        tol_residual: Threshold on the max nodal weak-form defect
        max_iter: Maximum number of accepted descent steps per solve
        descent: "newton" (regularized Hessian) or "stiffness" (p = 2 preconditioner)
    """

    p: float
    q: float
    grad_reg: float = DEFAULT_GRAD_REG
    tol_energy: float = DEFAULT_TOL_ENERGY
    tol_residual: float = DEFAULT_TOL_RESIDUAL
    max_iter: int = DEFAULT_MAX_ITER
    descent: str = DEFAULT_DESCENT

    def __post_init__(self):
        ensure_valid(validate_exponent(self.p), "p")
        ensure_valid(validate_float_range(self.q, self.p, None, "q", min_inclusive=False), "q")
        if self.q > self.q_max * (1.0 + 1e-12):
            raise ValidationError("q", f"must be at most 2p/(2-p) = {self.q_max:.6g} for p = {self.p}")
        ensure_valid(validate_float_range(self.grad_reg, 0.0, None, "grad_reg"), "grad_reg")
        for name in ("tol_energy", "tol_residual"):
            ensure_valid(
                validate_float_range(getattr(self, name), 0.0, None, name, min_inclusive=False), name
            )
        ensure_valid(validate_int_range(self.max_iter, 1, None, "max_iter"), "max_iter")
        ensure_valid(validate_in_list(self.descent, DESCENT_METHODS, "descent"), "descent")

    @property
    def q_max(self) -> float:
        """Largest admissible q; unbounded in the borderline case p = 2."""
        if self.p >= 2.0:
            return math.inf
        return 2.0 * self.p / (2.0 - self.p)

    @property
    def borderline_q(self) -> bool:
        """True for p = n = 2, where any finite q > p is accepted."""
        return self.p >= 2.0

    def replace(self, **changes) -> SolverParams:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# --- Regularized p-Dirichlet energy ---


def _gradients(mesh: Mesh, coeffs: np.ndarray, grad_reg: float) -> tuple[np.ndarray, np.ndarray]:
    grads = np.einsum("tk,tkd->td", coeffs[mesh.triangles], mesh.grad_basis)
    return grads, np.einsum("td,td->t", grads, grads) + grad_reg * grad_reg


def p_dirichlet(mesh: Mesh, coeffs: np.ndarray, p: float, grad_reg: float) -> float:
    """sum_T area ((|grad u|^2 + eps^2)^{p/2} - eps^p); equals dirichlet_energy at eps = 0."""
    _, s = _gradients(mesh, coeffs, grad_reg)
    return float(np.sum(mesh.element_areas * (s ** (p / 2.0) - grad_reg**p)))


def p_dirichlet_gradient(mesh: Mesh, coeffs: np.ndarray, p: float, grad_reg: float) -> np.ndarray:
    """a_p(u, phi_i) for every vertex i: the gradient of (1/p) p_dirichlet."""
    grads, s = _gradients(mesh, coeffs, grad_reg)
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(s > 0.0, s ** ((p - 2.0) / 2.0), 0.0)
    flux = (mesh.element_areas * weight)[:, None] * grads
    return assemble_vector(mesh, np.einsum("td,tkd->tk", flux, mesh.grad_basis))


def p_dirichlet_hessian(
    mesh: Mesh, coeffs: np.ndarray, p: float, grad_reg: float
) -> sparse.csr_matrix:
    """Hessian of (1/p) p_dirichlet; symmetric positive semidefinite for p > 1."""
    grads, s = _gradients(mesh, coeffs, grad_reg)
    s = np.maximum(s, HESSIAN_FLOOR)
    isotropic = s ** ((p - 2.0) / 2.0)
    along = (p - 2.0) * s ** ((p - 4.0) / 2.0)
    basis = mesh.grad_basis
    projected = np.einsum("tkd,td->tk", basis, grads)
    local = mesh.element_areas[:, None, None] * (
        isotropic[:, None, None] * np.einsum("tid,tjd->tij", basis, basis)
        + along[:, None, None] * projected[:, :, None] * projected[:, None, :]
    )
    return assemble_matrix(mesh, local)


class DescentDirection:
    """Preconditioned descent directions on the interior unknowns.

    For p = 2 (or descent="stiffness") the interior stiffness matrix is
    factorized once; otherwise the regularized Hessian is assembled and
    solved at every call.
    """

    def __init__(self, mesh: Mesh, params: SolverParams):
        self.mesh = mesh
        self.params = params
        self.interior = mesh.interior
        self._factor = None
        if params.descent == "stiffness" or params.p == 2.0:
            stiffness = mesh.stiffness[self.interior][:, self.interior].tocsc()
            self._factor = splu(stiffness)

    def __call__(self, coeffs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Return -P^{-1} rhs for the current preconditioner P."""
        if self._factor is not None:
            return -self._factor.solve(rhs)
        hessian = p_dirichlet_hessian(self.mesh, coeffs, self.params.p, self.params.grad_reg)
        return -spsolve(hessian[self.interior][:, self.interior].tocsc(), rhs)


def backtrack(
    objective: Callable[[np.ndarray], float],
    coeffs: np.ndarray,
    interior: np.ndarray,
    direction: np.ndarray,
    value: float,
    slope: float,
    operation: str,
) -> tuple[Optional[float], np.ndarray, float]:
    """Armijo backtracking along direction on the interior unknowns.

    Returns:
        (step, trial coefficients, trial value), or (None, coeffs, value) when
        no step gives sufficient decrease

    Raises:
        BreakdownError: If the objective turns NaN
    """
    step = 1.0
    for _ in range(MAX_BACKTRACKS):
        trial = coeffs.copy()
        trial[interior] += step * direction
        trial_value = objective(trial)
        if math.isnan(trial_value):
            raise BreakdownError(
                "objective is NaN during the line search",
                operation=operation,
                details=f"step={step:.3g}, value={value:.17g}, slope={slope:.3g}",
            )
        if trial_value <= value + ARMIJO_C * step * slope:
            return step, trial, trial_value
        step *= BACKTRACK_FACTOR
    return None, coeffs, value


def relative_decrease(old: float, new: float) -> float:
    return (old - new) / max(abs(old), abs(new), np.finfo(float).tiny)


def stationary_to_roundoff(slope: float, value: float) -> bool:
    """Whether the predicted decrease is lost in the rounding of the objective."""
    return -slope <= STALL_RTOL * max(abs(value), np.finfo(float).tiny)


# --- Energy, residual and the solver ---


def _atom_values(f_values, mu: DiscreteMeasure) -> np.ndarray:
    f = np.asarray(f_values, dtype=float)
    if f.shape != (mu.size,):
        raise ValidationError("f_values", f"expected {mu.size} per-atom values, got shape {f.shape}")
    return f


def energy(u: FeFunction, f_values, mu: DiscreteMeasure, params: SolverParams) -> float:
    """J(u) = (1/p) sum_T area (|grad u|^2 + eps^2)^{p/2} - sum_k w_k u(x_k) f_k.

    The constant eps^p area is subtracted so that J(0) = 0.
    """
    f = _atom_values(f_values, mu)
    coupling = couple(u.mesh, mu)
    dirichlet = p_dirichlet(u.mesh, u.coeffs, params.p, params.grad_reg)
    return dirichlet / params.p - float(np.sum(mu.weights * coupling.values(u.coeffs) * f))


def energy_gradient(u: FeFunction, f_values, mu: DiscreteMeasure, params: SolverParams) -> np.ndarray:
    """Nodal gradient a_p(u, phi_i) - <f mu, phi_i> over all vertices."""
    f = _atom_values(f_values, mu)
    coupling = couple(u.mesh, mu)
    return p_dirichlet_gradient(u.mesh, u.coeffs, params.p, params.grad_reg) - coupling.load(f)


def weak_residual(u: FeFunction, f_values, mu: DiscreteMeasure, params: SolverParams) -> float:
    """max over interior nodes of |a_p(u, phi_i) - <f mu, phi_i>|."""
    defect = energy_gradient(u, f_values, mu, params)[u.mesh.interior]
    return float(np.abs(defect).max()) if defect.size else 0.0


def holder_duality(f_values, phi_values, mu: DiscreteMeasure, q: float) -> tuple[float, float]:
    """Both sides of |<f mu, phi>| <= ||f||_{q', mu} ||phi||_{q, mu}."""
    f = _atom_values(f_values, mu)
    phi = _atom_values(phi_values, mu)
    conjugate = q / (q - 1.0)
    lhs = abs(float(np.sum(mu.weights * f * phi)))
    return lhs, lp_norm(f, mu, conjugate) * lp_norm(phi, mu, q)


@dataclass(frozen=True, eq=False)
class PoissonSolution:
    """Result of solve_poisson.

    energy_history holds the objective along the final regularization stage.
    """

    u: FeFunction
    iterations: int
    final_energy: float
    residual_norm: float
    converged: bool = True
    energy_history: tuple[float, ...] = ()
    borderline_q: bool = False
    stages: int = 1


@dataclass
class _Descent:
    """State of one descent run at a fixed grad_reg."""

    x: np.ndarray
    value: float = 0.0
    residual: float = 0.0
    iterations: int = 0
    converged: bool = False
    history: list = dataclasses.field(default_factory=list)


def _descend(
    mesh: Mesh, load: np.ndarray, params: SolverParams, x: np.ndarray, budget: int, operation: str
) -> _Descent:
    """Armijo descent on the interior unknowns for at most budget accepted steps."""
    interior = mesh.interior
    p, eps = params.p, params.grad_reg

    def objective(coeffs: np.ndarray) -> float:
        return p_dirichlet(mesh, coeffs, p, eps) / p - float(load @ coeffs)

    run = _Descent(x=x, value=objective(x))
    run.history.append(run.value)
    direction_of = DescentDirection(mesh, params) if len(interior) else None
    decrease = 0.0

    while True:
        grad = (p_dirichlet_gradient(mesh, run.x, p, eps) - load)[interior]
        run.residual = float(np.abs(grad).max()) if grad.size else 0.0
        if run.residual < params.tol_residual and decrease < params.tol_energy:
            run.converged = True
            break
        if run.iterations >= budget:
            break

        direction = direction_of(run.x, grad)
        slope = float(grad @ direction)
        if not slope < 0.0:
            direction = -grad
            slope = -float(grad @ grad)
        step, x_new, value_new = backtrack(objective, run.x, interior, direction, run.value, slope, operation)
        if step is None:
            run.converged = run.residual < params.tol_residual or stationary_to_roundoff(slope, run.value)
            if not run.converged:
                logger.warning(f"{operation}: line search stalled with residual {run.residual:.3e}")
            break

        if value_new > run.value:
            raise BreakdownError("energy increased", operation, f"{run.value!r} -> {value_new!r}")
        decrease = relative_decrease(run.value, value_new)
        run.x, run.value = x_new, value_new
        run.history.append(run.value)
        run.iterations += 1
        logger.debug(
            f"{operation}: eps={eps:.1e}, iter {run.iterations}, J={run.value:.12g}, "
            f"residual={run.residual:.3e}, step={step:.3g}"
        )
    return run


def linear_warm_start(mesh: Mesh, load: np.ndarray, p: float) -> tuple[np.ndarray, float]:
    """The p = 2 solution rescaled to minimize the p-energy along its ray.

    Returns:
        (coefficients, area-weighted rms gradient of the rescaled function);
        zeros and 0.0 when the load or the interior is empty
    """
    interior = mesh.interior
    x = np.zeros(mesh.num_vertices)
    if not len(interior) or not np.any(load[interior]):
        return x, 0.0
    stiffness = mesh.stiffness[interior][:, interior].tocsc()
    x[interior] = splu(stiffness).solve(load[interior])
    work = float(load @ x)
    dirichlet = p_dirichlet(mesh, x, p, 0.0)
    if not (work > 0.0 and dirichlet > 0.0):
        return np.zeros(mesh.num_vertices), 0.0
    x *= (work / dirichlet) ** (1.0 / (p - 1.0))
    _, squared = _gradients(mesh, x, 0.0)
    scale = math.sqrt(float(np.sum(mesh.element_areas * squared)) / float(np.sum(mesh.element_areas)))
    return x, scale


def continuation_schedule(scale: float, grad_reg: float) -> list[float]:
    """Geometric grad_reg values from scale down to grad_reg (always ending at grad_reg)."""
    stages = []
    eps = scale
    while eps > grad_reg and len(stages) < REG_CONTINUATION_MAX_STAGES:
        stages.append(eps)
        eps *= REG_CONTINUATION_FACTOR
    stages.append(grad_reg)
    return stages


def solve_poisson(
    f_values,
    mu: DiscreteMeasure,
    mesh: Mesh,
    params: SolverParams,
    seed: Optional[int] = None,
    initial: Optional[FeFunction] = None,
) -> PoissonSolution:
    """Minimize the (p, mu)-Poisson energy by preconditioned descent with Armijo backtracking.

    Stops when the relative energy decrease is below tol_energy and the weak
    residual below tol_residual. For p < 2 without an initial function the
    regularization is continued: each stage solves at a larger grad_reg and
    warm-starts the next, the first stage from the rescaled p = 2 solution
    (or from the seeded random vector). max_iter bounds the accepted steps of
    all stages together; running out returns a result flagged converged=False.

    Args:
        f_values: Right-hand side sampled at the atoms of mu
        mu: The measure
        mesh: The mesh
        params: Solver parameters
        seed: When given (and no initial), start from a seeded random interior vector
        initial: Starting function (boundary values are zeroed)

    Raises:
        BreakdownError: If the line search meets NaN
    """
    operation = "solve_poisson"
    f = _atom_values(f_values, mu)
    load = couple(mesh, mu).load(f)
    interior = mesh.interior

    x = np.zeros(mesh.num_vertices)
    schedule = [params.grad_reg]
    if initial is not None:
        x = np.array(initial.coeffs, dtype=float)
        x[mesh.boundary_mask] = 0.0
    else:
        if params.p < 2.0:
            x, scale = linear_warm_start(mesh, load, params.p)
            schedule = continuation_schedule(scale, params.grad_reg)
        if seed is not None:
            x = np.zeros(mesh.num_vertices)
            x[interior] = np.random.default_rng(seed).uniform(-1.0, 1.0, size=len(interior))

    iterations = 0
    run = None
    for number, eps in enumerate(schedule, start=1):
        run = _descend(mesh, load, params.replace(grad_reg=eps), x, params.max_iter - iterations, operation)
        x = run.x
        iterations += run.iterations
        if number < len(schedule):
            logger.debug(f"{operation}: stage {number}/{len(schedule)} at eps={eps:.1e}, {run.iterations} steps")
            if iterations >= params.max_iter:
                # Budget spent before the target regularization: report there, unconverged
                run = _descend(mesh, load, params, x, 0, operation)
                run.converged = False
                break

    if not run.converged:
        logger.warning(f"{operation}: stopped after {iterations} iterations, residual {run.residual:.3e}")
    else:
        logger.info(f"{operation}: converged in {iterations} iterations, J={run.value:.10g}")

    return PoissonSolution(
        u=FeFunction(mesh, x),
        iterations=iterations,
        final_energy=run.value,
        residual_norm=run.residual,
        converged=run.converged,
        energy_history=tuple(run.history),
        borderline_q=params.borderline_q,
        stages=number,
    )
