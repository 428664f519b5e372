"""Default numerical parameters.

Every tolerance used by the verification suites is read from here unless a
scenario overrides it. Values assume O(1)-scaled coordinate charts.
"""

# finite differences
FD_STEP = 1e-4  # first derivatives of analytic fields
FD_STEP_SECOND = 1e-3  # direct second-derivative stencils (metric Hessian, scalar Hessians)
FD_NEST_RATIO = 10.0  # step multiplier per level when differentiating FD-derived fields

# convergence-study stepping (plain central differences, no extrapolation)
CONVERGENCE_STEP = 8e-3
CONVERGENCE_NEST_RATIO = 2.0
CONVERGENCE_ORDER_RANGE = (1.8, 2.2)
CONVERGENCE_NOISE_FLOOR = 1e-10

# degeneracy thresholds
MIN_METRIC_EIGENVALUE = 1e-10
MIN_WEDGE_NORM = 1e-14
MIN_WARP = 1e-8
KAPPA_THRESHOLD = 1e-6
CRITICAL_Q_FRACTION = 1e-4

# tolerances
TOL_KAHLER = 1e-5  # ||nabla J||
TOL_FOLIATION = 1e-5
TOL_KAPPA_REL = 1e-5
TOL_POTENTIAL = 1e-4
TOL_CURVATURE_REL = 1e-4
TOL_PROFILE_BOUNDARY = 1e-8
TOL_PROFILE_ROUNDTRIP = 1e-8
TOL_EVENNESS = 1e-6
TOL_BASE = 1e-6
TOL_KILLING = 1e-6
TOL_FRAME = 1e-10
EIGEN_CLUSTER_GAP = 1e-3
INDICATOR_TOL = 0.5  # pass/fail rows with residual 0 or 1 (or an integer count mismatch)

# geometry of sampling
BOUNDARY_MARGIN = 0.1  # base chart boxes
WARP_MARGIN_FRACTION = 0.05  # fraction of L kept away from t = 0, L

# integrators
GEODESIC_STEP = 1e-3

# profile realization
PROFILE_N_GRID = 2048
PROFILE_EXTENSION = 0.2  # angular extension past the endpoints, radians
