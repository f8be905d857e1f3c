"""Catalog of descriptor vocabulary, shipped scenarios, and the theorem battery."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

__all__ = [
    "descriptor_catalog",
    "shipped_scenarios",
    "scenario_path",
    "format_catalog",
    "TheoremInstance",
    "theorem_battery",
]


def descriptor_catalog() -> dict:
    """The full scenario-file vocabulary, for `list-catalog` and docs."""
    return {
        "manifolds": {
            "euclidean": ["dim"],
            "sphere_cap": ["dim", "cap_center", "cap_radius"],
            "hyperboloid": ["dim"],
        },
        "point_maps": {
            "identity": [],
            "constant": ["point"],
            "geodesic_contraction": ["center", "factor"],
            "coordinate_affine": ["matrix", "offset"],
        },
        "direction_maps": {
            "log_based": [],
            "scaled_log": ["factor"],
            "euclidean_difference": [],
            "custom_table": ["entries", "match_tol"],
        },
        "scalar_fields": {
            "squared_distance": ["center"],
            "distance": ["center"],
            "linear_height": ["vector (off-hyperboloid only)"],
            "negated": ["inner"],
            "offset": ["inner", "shift"],
            "weighted_sum": ["terms: [{weight, field}]"],
            "min_of": ["first", "second"],
            "indicator_extended": ["inner", "domain"],
        },
        "set_predicates": {
            "metric_ball": ["center", "radius"],
            "sublevel": ["field", "level"],
            "finite_union": ["members"],
        },
        "samplers": {
            "uniform_ball": ["center", "radius"],
            "explicit_list": ["points"],
        },
        "ops": [
            "check_invex_set_flat",
            "check_convex_set_flat",
            "check_convex_set_classical",
            "check_convex_function_classical",
            "check_geodesic_invex_set",
            "check_preinvex",
            "check_invex_function",
            "check_transport_compatibility",
            "check_sum_preinvex",
            "check_level_set_invex",
            "theorem_preinvex_implies_invex",
            "theorem_invex_plus_compat_implies_preinvex",
            "verify_proximal_subgradient",
            "search_proximal_subgradient",
            "theorem_proximal_direction_bound",
            "geodesic_descent",
            "multistart_local_global",
            "solution_set_invex",
        ],
        "expectations": ["holds", "violated", "inconclusive"],
    }


def shipped_scenarios() -> list:
    """Names of the scenario files bundled with the package."""
    root = resources.files("invexkit").joinpath("scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def scenario_path(name: str) -> str:
    """Filesystem path of a shipped scenario (name without extension)."""
    root = resources.files("invexkit").joinpath("scenarios")
    target = root.joinpath(name + ".json")
    if not target.is_file():
        raise FileNotFoundError(
            f"no shipped scenario {name!r}; available: {', '.join(shipped_scenarios())}"
        )
    return str(target)


@dataclass(frozen=True, eq=False)
class TheoremInstance:
    """One (field, maps, region, scheme) tuple for the theorem harnesses.

    ``level`` picks a nonempty sublevel set for the level-set harness;
    ``certificate`` (hyperboloid instances only) feeds the proximal
    direction-bound theorem.
    """

    name: str
    manifold: object
    maps: object
    field: object
    region: object
    scheme: object
    level: float
    certificate: object = None
    sum_terms: tuple = ()


def theorem_battery():
    """Instances spanning all three chart models for the theorem harnesses.

    Every instance satisfies the harness premises by construction, so the
    expected falsification count across the whole battery is zero.
    """
    from .geometry import Euclidean, Hyperboloid, SphereCap, exp_map, log_map, scale_tangent
    from .maps import (
        DistanceTo,
        EuclideanDifference,
        GeodesicContraction,
        IdentityMap,
        LinearHeight,
        LogBased,
        MapTriple,
        MetricBall,
        SquaredDistance,
        WeightedSum,
        identity_triple,
    )
    from .sampling import SampleScheme, UniformBall
    from .subgradient import ProximalCertificate

    out = []

    e2 = Euclidean(2)
    origin = e2.point([0.0, 0.0])
    e_scheme = lambda seed: SampleScheme(  # noqa: E731 - compact builders
        n_pairs=40, s_grid=7, rng_seed=seed, sampler=UniformBall(origin, 1.5)
    )
    e_ball = MetricBall(origin, 2.5)
    diff = identity_triple(EuclideanDifference())
    out.append(TheoremInstance(
        "euclid_quadratic", e2, diff, SquaredDistance(origin), e_ball, e_scheme(201), 0.8,
    ))
    shifted = SquaredDistance(e2.point([1.0, 1.0]))
    out.append(TheoremInstance(
        "euclid_shifted_quadratic", e2, diff, shifted, e_ball, e_scheme(202), 2.0,
        sum_terms=((1.0, SquaredDistance(origin)), (0.5, shifted)),
    ))
    out.append(TheoremInstance(
        "euclid_linear", e2, diff, LinearHeight((0.8, -0.6)), e_ball, e_scheme(203), 0.3,
    ))
    out.append(TheoremInstance(
        "euclid_contracted_target", e2,
        MapTriple(GeodesicContraction(origin, 0.5), IdentityMap(), EuclideanDifference()),
        SquaredDistance(origin), e_ball, e_scheme(204), 0.8,
    ))
    out.append(TheoremInstance(
        "euclid_distance_cone", e2, diff, DistanceTo(e2.point([0.3, 0.2])), e_ball,
        e_scheme(205), 0.9,
    ))

    h2 = Hyperboloid(2)
    apex = h2.point([0.0, 0.0, 1.0])
    h_scheme = lambda seed: SampleScheme(  # noqa: E731
        n_pairs=40, s_grid=7, rng_seed=seed, sampler=UniformBall(apex, 1.2)
    )
    h_ball = MetricBall(apex, 2.2)
    log_t = identity_triple(LogBased())
    hsq = SquaredDistance(apex)
    grad_base = exp_map(apex, h2.tangent(apex, [0.5, 0.2, 0.0]))
    grad_cert = ProximalCertificate(
        grad_base, scale_tangent(log_map(grad_base, apex), -2.0), 0.0, 0.8
    )
    out.append(TheoremInstance(
        "hyperboloid_squared_distance", h2, log_t, hsq, h_ball, h_scheme(211), 1.0,
        certificate=grad_cert,
    ))
    out.append(TheoremInstance(
        "hyperboloid_height", h2, log_t, LinearHeight(), h_ball, h_scheme(212), 1.5,
        certificate=ProximalCertificate(
            apex, h2.tangent(apex, [0.0, 0.0, 0.0]), 0.0, 0.8
        ),
    ))
    p1 = exp_map(apex, h2.tangent(apex, [0.6, 0.0, 0.0]))
    p2 = exp_map(apex, h2.tangent(apex, [-0.3, 0.5, 0.0]))
    frechet = WeightedSum(((1.0, SquaredDistance(p1)), (2.0, SquaredDistance(p2))))
    out.append(TheoremInstance(
        "hyperboloid_frechet", h2, log_t, frechet, h_ball, h_scheme(213), 1.5,
        sum_terms=((1.0, SquaredDistance(p1)), (2.0, SquaredDistance(p2))),
    ))
    out.append(TheoremInstance(
        "hyperboloid_contracted_target", h2,
        MapTriple(GeodesicContraction(apex, 0.5), IdentityMap(), LogBased()),
        hsq, h_ball, h_scheme(214), 1.0,
    ))
    out.append(TheoremInstance(
        "hyperboloid_distance_cone", h2, log_t,
        DistanceTo(exp_map(apex, h2.tangent(apex, [0.9, -0.2, 0.0]))),
        h_ball, h_scheme(215), 1.2,
    ))

    cap = SphereCap(2, (0.0, 0.0, 1.0), 0.9)
    north = cap.point([0.0, 0.0, 1.0])
    s_scheme = lambda seed: SampleScheme(  # noqa: E731
        n_pairs=40, s_grid=7, rng_seed=seed, sampler=UniformBall(north, 0.45)
    )
    s_ball = MetricBall(north, 0.6)
    ssq = SquaredDistance(north)
    out.append(TheoremInstance(
        "spherecap_squared_distance", cap, identity_triple(LogBased()), ssq, s_ball,
        s_scheme(221), 0.15,
    ))
    out.append(TheoremInstance(
        "spherecap_contracted_target", cap,
        MapTriple(GeodesicContraction(north, 0.5), IdentityMap(), LogBased()),
        ssq, s_ball, s_scheme(222), 0.15,
    ))
    q = exp_map(north, cap.tangent(north, [0.3, 0.0, 0.0]))
    out.append(TheoremInstance(
        "spherecap_weighted_pair", cap, identity_triple(LogBased()),
        WeightedSum(((1.0, ssq), (1.0, SquaredDistance(q)))), s_ball, s_scheme(223), 0.25,
        sum_terms=((1.0, ssq), (1.0, SquaredDistance(q))),
    ))
    return out


def format_catalog() -> str:
    cat = descriptor_catalog()
    lines = []
    for section in [
        "manifolds",
        "point_maps",
        "direction_maps",
        "scalar_fields",
        "set_predicates",
        "samplers",
    ]:
        lines.append(f"{section}:")
        for kind, params in cat[section].items():
            suffix = f" ({', '.join(params)})" if params else ""
            lines.append(f"  {kind}{suffix}")
    lines.append("ops:")
    for op in cat["ops"]:
        lines.append(f"  {op}")
    lines.append("expectations: " + ", ".join(cat["expectations"]))
    lines.append("shipped scenarios:")
    for name in shipped_scenarios():
        lines.append(f"  {name}")
    return "\n".join(lines) + "\n"
