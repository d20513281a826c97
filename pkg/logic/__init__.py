# logic/__init__.py - Numerical core: meshes, measures, solvers and checks

from logic.analysis import (
    CounterexampleReport,
    DimensionReport,
    HolderFit,
    RegularityReport,
    SupCheckReport,
    analyze_eigenfunction,
    counterexample_probe,
    dimension_consistency_check,
    holder_bound,
    holder_exponent_fit,
    implied_holder_exponent,
    interior_balls,
    moser_epsilon,
    sup_bound_check,
)
from logic.eigen import (
    EigenPair,
    SignReport,
    SimplicityReport,
    check_sign,
    check_simplicity,
    convexity_inequality,
    eigen_residual,
    holder_bridge,
    lambda_lower_bound,
    minimize_rayleigh,
    rayleigh_quotient,
)
from logic.measure import (
    BUILTIN_IFS_FACTORIES,
    DiscreteMeasure,
    GrowthReport,
    IfsSpec,
    LogCantorTree,
    OpenSetReport,
    SimilarityMap,
    ball_mass,
    ball_masses,
    check_open_set_condition,
    couple,
    fit_growth_exponent,
    growth_sample,
    lebesgue_measure,
    log_cantor_measure,
    log_cantor_radii,
    log_cantor_tree,
    lp_norm,
    natural_measure,
    natural_probabilities,
    similarity_dimension,
    with_natural_probabilities,
)
from logic.mesh import (
    FeFunction,
    Mesh,
    Polygon,
    build_uniform_mesh,
    dirichlet_energy,
    get_domain,
    gradient,
)
from logic.pde import (
    PoissonSolution,
    SolverParams,
    energy,
    energy_gradient,
    holder_duality,
    solve_poisson,
    weak_residual,
)

__all__ = [
    # Mesh
    "Polygon",
    "Mesh",
    "FeFunction",
    "get_domain",
    "build_uniform_mesh",
    "gradient",
    "dirichlet_energy",
    # Measures
    "SimilarityMap",
    "IfsSpec",
    "BUILTIN_IFS_FACTORIES",
    "OpenSetReport",
    "DiscreteMeasure",
    "LogCantorTree",
    "GrowthReport",
    "similarity_dimension",
    "natural_probabilities",
    "with_natural_probabilities",
    "check_open_set_condition",
    "natural_measure",
    "lebesgue_measure",
    "log_cantor_radii",
    "log_cantor_tree",
    "log_cantor_measure",
    "ball_mass",
    "ball_masses",
    "growth_sample",
    "fit_growth_exponent",
    "lp_norm",
    "couple",
    # Poisson problem
    "SolverParams",
    "PoissonSolution",
    "energy",
    "energy_gradient",
    "weak_residual",
    "solve_poisson",
    "holder_duality",
    # Eigenpairs
    "EigenPair",
    "SignReport",
    "SimplicityReport",
    "rayleigh_quotient",
    "minimize_rayleigh",
    "eigen_residual",
    "check_sign",
    "check_simplicity",
    "lambda_lower_bound",
    "holder_bridge",
    "convexity_inequality",
    # Regularity checks
    "SupCheckReport",
    "HolderFit",
    "DimensionReport",
    "RegularityReport",
    "CounterexampleReport",
    "interior_balls",
    "sup_bound_check",
    "holder_exponent_fit",
    "holder_bound",
    "moser_epsilon",
    "implied_holder_exponent",
    "dimension_consistency_check",
    "analyze_eigenfunction",
    "counterexample_probe",
]
