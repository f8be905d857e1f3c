"""Central tolerance record.

Every numeric threshold used by the kernels and checkers lives here so a
scenario can override them in one place.  The defaults are the contractual
values asserted by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # embedding invariants
    point_invariant: float = 1e-12      # |norm constraint defect| at construction
    tangency: float = 1e-10             # |<base, vector>| defect at construction
    reprojection_max: float = 1e-8      # drift repaired silently below, error above

    # kernel contracts
    exp_log_roundtrip: float = 1e-9
    transport_isometry: float = 1e-9
    speed_constancy: float = 1e-6
    distance_consistency: float = 1e-8

    # differentiation
    fd_step: float = 1e-5               # central-difference step along geodesic probes
    fd_match: float = 1e-6              # analytic vs finite-difference agreement

    # checkers
    violation: float = 1e-8             # one-sided slack before a gap counts as violation
    witness_replay: float = 1e-12
    strict_pair_distance: float = 1e-10  # pairs closer than this skip strict-mode checks
    zero_direction: float = 1e-12       # ``nonzero direction`` premise threshold

    # solvers
    spread: float = 1e-6                # multistart objective-value spread bound
    optimal_pool_rel: float = 1e-8      # near-optimal pool: value <= best + rel*(1+|best|)
    solution_diameter: float = 1e-6
    proximal_radius_floor: float = 1e-4  # halving sweep stops below this radius


DEFAULT_TOLERANCES = Tolerances()


def with_overrides(base: Tolerances, **kwargs: float) -> Tolerances:
    """Return a copy of ``base`` with the given fields replaced."""
    return replace(base, **kwargs)
