# config.py - Numerical constants, defaults and named choices

import math

TOOL_NAME = "plaplace-measures"
TOOL_VERSION = "0.1.0"

# Space dimension (planar domains only)
SPACE_DIM = 2

# Solver defaults
DEFAULT_GRAD_REG = 1e-8  # Regularization of |grad u| near zero for p < 2
DEFAULT_TOL_ENERGY = 1e-12  # Relative energy (or Rayleigh) decrease threshold
DEFAULT_TOL_RESIDUAL = 1e-8  # Max nodal weak-form defect threshold
DEFAULT_MAX_ITER = 5000  # Maximum accepted descent steps per solve (all regularization stages together)
DEFAULT_DESCENT = "newton"

DESCENT_METHODS = ["newton", "stiffness"]

# Line search
ARMIJO_C = 1e-4  # Sufficient decrease constant
BACKTRACK_FACTOR = 0.5  # Step halving
MAX_BACKTRACKS = 60  # Halvings before a line search is declared stalled
STALL_RTOL = 1e-13  # A stalled line search counts as converged when |slope| <= STALL_RTOL * |value|

# Regularization continuation for p < 2: grad_reg runs geometrically from the gradient
# scale of the rescaled p = 2 solution down to the configured value
REG_CONTINUATION_FACTOR = 0.1
REG_CONTINUATION_MAX_STAGES = 16

# Floor on |grad u|^2 + eps^2 when assembling Hessians with grad_reg = 0
HESSIAN_FLOOR = 1e-24

# Random seeds
DEFAULT_SEED = 20240607  # Used whenever no seed is configured

# Mesh
MIN_RESOLUTION = 2
GEOMETRY_TOL = 1e-12  # Relative tolerance for point location and containment
LOCATE_CANDIDATES = 12  # Nearest centroids tried before brute-force location
LOCATE_TOL = 1e-10  # Barycentric slack accepted as "inside a triangle"

BUILTIN_DOMAINS = {
    "unit_square": ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)),
    "unit_triangle": ((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0)),
}

# Measures
MAX_IFS_ATOMS = 10**7  # Atom budget of natural_measure
MAX_LOG_CANTOR_ATOMS = 10**6  # Atom budget of log_cantor_measure (2^19 atoms at most)
PROBABILITY_SUM_TOL = 1e-12  # |sum p_i - 1| allowed in an IFS
MASS_TOL = 1e-12  # Relative tolerance of total_mass against the weight sum
DIMENSION_XTOL = 1e-12  # Bisection tolerance for the similarity dimension
DEFAULT_LOG_CANTOR_R0 = 0.1  # Base ball diameter of the log-Cantor tree
LOG_CANTOR_CENTER = (0.5, 0.5)
RESOLVABLE_OFFSET = 1e-10  # Smallest child offset treated as resolvable in doubles

BUILTIN_IFS = ["sierpinski", "quadrants", "cantor-dust"]
MEASURE_KINDS = ["lebesgue", "ifs", "log-cantor"]

# Growth fitting
GROWTH_MIN_CENTERS = 32
GROWTH_MIN_RADII = 8
GROWTH_DEFAULT_RADII = 16
GROWTH_SPACING_FACTOR = 4.0  # Smallest radius in atom spacings
GROWTH_DIAMETER_FRACTION = 0.25  # Largest radius as a fraction of the diameter
GROWTH_RATIO_BOUND = 10.0  # Allowed sup of mu(B(x, r)) / r^s at the similarity dimension
GROWTH_MAX_SKIPPED = 0.5  # Fraction of empty balls that rejects a fit
DIMENSION_SLACK = 0.1  # Allowed shortfall of the fitted exponent against s_target

# Eigen checks
SIGN_TOL = 1e-8
SIMPLICITY_MIN_SEEDS = 3
SIMPLICITY_SPREAD = 0.01  # Relative lambda spread accepted as simple
SIMPLICITY_DISTANCE_FACTOR = 10.0  # Aligned distance threshold in units of tol_residual
SIMPLICITY_TIGHTENING = 1e-2  # Residual tolerance factor used for each seed
SIMPLICITY_RESIDUAL_FLOOR = 1e-13
LOWER_BOUND_BATCH = 4  # Random positive starts for lambda_lower_bound
LOWER_BOUND_STEPS = 3  # Inverse-iteration refinements per start
CONVEXITY_SLACK = 1e-2

# Regularity checks
HOLDER_CAP = 0.999  # Upper cap of the a priori Holder exponent
HOLDER_MIN_PAIRS = 1000
HOLDER_BINS = 12  # Distance bins, also the number of sampled distance levels
HOLDER_MIN_BINS = 4
HOLDER_DIRECTIONS = 16  # Sampled directions per anchor and distance level
HOLDER_STEEP_EDGES = 64  # Edges with the largest difference quotients whose ends become anchors
HOLDER_MIN_DECADES = 0.5  # Smallest accepted log10(largest / smallest pair distance)
HOLDER_ALPHA_RANGE = (0.0, 1.5)  # alpha_hat is clipped to this range
HOLDER_REGION_FRACTION = 0.25  # Largest pair distance as a fraction of the region diameter
HOLDER_SOFT_FACTOR = 0.5  # alpha_hat >= factor * holder_bound
SUP_CHECK_SIGMAS = (0.25, 0.5, 0.75)
SUP_CHECK_BALLS = 5
GROWTH_ALPHAS = (0.1, 0.5, 0.9)
CANTOR_RADIUS_FACTOR = 4.0  # Holder pairs within this many r_1 of the tree root
CANTOR_MASS_BOUND = 4.0  # Uniform bound on mu(B(x, r_k)) / h(r_k)
CANTOR_ALPHA_TOL = 0.02  # Allowed increase of alpha_hat between resolutions
DEFAULT_RESOLUTIONS = [32, 64, 128]
REGULARIZATION_CHECK_FACTOR = 100.0  # Second grad_reg of the p < 2 regularization check, relative to the first
REGULARIZATION_CHECK_FLOOR = 1e-6

# Command line
COMMANDS = ["poisson", "eigen", "measure-report", "analyze", "counterexample"]

# Run status written to the manifest -> exit code name
RUN_STATUS_EXIT = {
    "success": "success",
    "non_convergence": "non_convergence",
    "check_failed": "non_convergence",
}

EXIT_CODES = {
    "success": 0,
    "internal": 1,
    "validation": 2,
    "non_convergence": 3,
    "io": 4,
}
