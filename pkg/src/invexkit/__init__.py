"""invexkit: numerical checkers for map-relative generalized convexity.

The toolkit pairs exact-formula geometry kernels (flat space, an open
spherical cap, the hyperboloid model of hyperbolic space) with
sampling-based checkers for invex sets, preinvex/invex functions,
transport-compatibility identities, proximal subgradient certificates, and
geodesic descent harnesses, all driven by declarative scenario files with
deterministic, replayable reports.
"""

__version__ = "0.1.0"

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    ChartMismatch,
    ConfigError,
    EmptyNeighborhood,
    InfeasibleStart,
    InvexkitError,
    NonDifferentiable,
    NumericalDrift,
    OutOfChart,
    PremiseFailure,
    TangencyViolation,
)
from .geometry import (
    Euclidean,
    GeodesicSegment,
    Hyperboloid,
    Manifold,
    Point,
    SphereCap,
    TangentVector,
    distance,
    exp_map,
    geodesic_eval,
    inner_product,
    inverse_transport,
    log_map,
    parallel_transport,
)
from .maps import (
    BiMap,
    MapTriple,
    PointMap,
    ScalarField,
    SetPredicate,
    eval_bimap,
    eval_differential,
    eval_point_map,
    eval_scalar,
    identity_triple,
)
from .report import HOLDS, INCONCLUSIVE, VIOLATED, CheckReport, Witness
from .sampling import ExplicitList, SampleScheme, UniformBall
from .invexity import (
    check_geodesic_invex_set,
    check_invex_function,
    check_invex_set_flat,
    check_level_set_invex,
    check_preinvex,
    check_sum_preinvex,
    check_transport_compatibility,
    replay_witness,
    theorem_invex_plus_compat_implies_preinvex,
    theorem_preinvex_implies_invex,
)
from .subgradient import (
    ProximalCertificate,
    search_proximal_subgradient,
    theorem_proximal_direction_bound,
    verify_proximal_subgradient,
)
from .optimize import (
    Backtracking,
    DescentConfig,
    FixedStep,
    SolveResult,
    geodesic_descent,
    multistart_local_global,
    solution_set_invex,
)
from .scenario import RunReport, emit_report, run_scenario
