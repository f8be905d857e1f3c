"""Proximal subgradient certificates and their direction-map lower bound.

A certificate (sigma, lambda, mu) at a base point claims the local quadratic
minorant

    value(x) >= value(base) + <sigma, log_base(x)> - lambda * d(x, base)^2

for all x in the metric ball of radius mu around the base.  ``verify``
samples that claim; ``search`` scans a small candidate grid for certificates
that survive verification; the theorem harness upgrades a surviving
certificate to the linearized bound along the direction map on the
nonpositively-curved chart.
"""

from __future__ import annotations

import math

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import EmptyNeighborhood, NonDifferentiable, PremiseFailure
from .geometry import (
    Hyperboloid,
    Point,
    TangentVector,
    distance,
    exp_map,
    inner_product,
    log_map,
    scale_tangent,
)


def exp_map_shell(base: Point, unit: TangentVector, r: float) -> Point:
    return exp_map(base, scale_tangent(unit, r))
from .maps import (
    MapTriple,
    ScalarField,
    SetPredicate,
    eval_bimap,
    eval_differential,
    eval_scalar,
    finite_difference_gradient,
)
from .invexity import check_preinvex, extended_gap
from .report import HOLDS, VIOLATED, CheckReport, Witness, _Collector
from .sampling import SampleScheme, UniformBall, draw_point, iter_pairs, _Exhausted

__all__ = [
    "ProximalCertificate",
    "proximal_values",
    "direction_bound_values",
    "verify_proximal_subgradient",
    "search_proximal_subgradient",
    "theorem_proximal_direction_bound",
    "DEFAULT_LAMBDA_GRID",
]

DEFAULT_LAMBDA_GRID = (0.0, 1e-3, 1e-1, 1.0, 10.0)


class ProximalCertificate:
    """Claimed local quadratic minorant at ``base``.

    lam >= 0 is accepted even though the classical definition asks for a
    positive coefficient: a certificate with lam = 0 is strictly stronger
    and covers the plain convex-subgradient case.
    """

    def __init__(self, base: Point, sigma: TangentVector, lam: float, mu: float):
        if sigma.base != base:
            raise PremiseFailure("certificate", "sigma must be tangent at the base point")
        if lam < 0.0:
            raise PremiseFailure("certificate", "lambda must be >= 0")
        if mu <= 0.0:
            raise PremiseFailure("certificate", "mu must be > 0")
        self.base = base
        self.sigma = sigma
        self.lam = float(lam)
        self.mu = float(mu)

    def to_dict(self):
        return {
            "base": [float(t) for t in self.base.coords],
            "sigma": [float(t) for t in self.sigma.comps],
            "lambda": self.lam,
            "mu": self.mu,
        }

    def __repr__(self):
        return (
            f"ProximalCertificate(base={list(self.base.coords)}, "
            f"sigma={list(self.sigma.comps)}, lam={self.lam}, mu={self.mu})"
        )


def proximal_values(h: ScalarField, cert: ProximalCertificate, x: Point):
    """(lhs, rhs) of the quadratic-minorant inequality lhs >= rhs at x."""
    lhs = eval_scalar(h, x)
    d = distance(x, cert.base)
    rhs = (
        eval_scalar(h, cert.base)
        + inner_product(cert.sigma, log_map(cert.base, x))
        - cert.lam * d * d
    )
    return lhs, rhs


def direction_bound_values(h: ScalarField, maps: MapTriple, cert: ProximalCertificate, x: Point):
    """(lhs, rhs) of the linearized bound along the direction map at x."""
    lhs = eval_scalar(h, x)
    rhs = eval_scalar(h, cert.base) + inner_product(
        cert.sigma, eval_bimap(maps.direction, x, cert.base)
    )
    return lhs, rhs


def _proximal_witness(idx, x, cert, lhs, rhs, gap, label=""):
    return Witness(
        index=idx,
        first=tuple(float(t) for t in x.coords),
        second=tuple(float(t) for t in cert.base.coords),
        param=math.nan,
        lhs=float(lhs),
        rhs=float(rhs),
        gap=float(gap),
        label=label,
    )


def _probe_points(scheme: SampleScheme, cert: ProximalCertificate, radius: float):
    """Probes for a certificate: the scheme's explicit points filtered to the
    ball, or fresh draws around the base (the scheme sampler's region is
    superseded by the certificate's neighborhood).

    Random draws alone under-sample the immediate vicinity of the base, but
    that is exactly where quadratic minorants fail (the -lam d^2 slack
    vanishes), so the draws are topped up with radial probes along a few
    directions at geometrically shrinking radii.
    """
    sampler = scheme.sampler
    if hasattr(sampler, "points"):
        return [p for p in sampler.points if distance(p, cert.base) <= radius]
    rng = np.random.default_rng(scheme.rng_seed)
    ball = UniformBall(cert.base, radius)
    out = []
    for _ in range(scheme.n_pairs):
        try:
            out.append(draw_point(rng, ball))
        except _Exhausted:  # pragma: no cover - ball sampling cannot exhaust
            break
    man = cert.base.manifold
    basis = man.tangent_basis(cert.base.coords)
    for _ in range(8):
        z = rng.standard_normal(man.dim)
        n = float(np.linalg.norm(z))
        if n < 1e-12:  # pragma: no cover
            continue
        u = TangentVector(cert.base, (z / n) @ basis)
        for k in range(13):
            try:
                out.append(exp_map_shell(cert.base, u, radius * 2.0 ** (-k)))
            except Exception:  # noqa: BLE001 - e.g. shell exits a cap chart
                continue
    return out


def verify_proximal_subgradient(
    h: ScalarField,
    cert: ProximalCertificate,
    scheme: SampleScheme,
) -> CheckReport:
    """Sample the quadratic-minorant inequality over ball(base, mu) ∩ dom."""
    if not math.isfinite(eval_scalar(h, cert.base)):
        raise PremiseFailure("base_in_domain", "field is not finite at the certificate base")
    col = _Collector("verify_proximal_subgradient", scheme.tol, scheme.to_dict())
    col.details["certificate"] = cert.to_dict()
    in_domain = 0
    for idx, x in enumerate(_probe_points(scheme, cert, cert.mu)):
        lhs, rhs = proximal_values(h, cert, x)
        if math.isinf(lhs):
            col.skip()  # outside dom: quantifier does not range here
            continue
        in_domain += 1
        gap = extended_gap(rhs, lhs)  # violation: minorant exceeds the value
        col.record(_proximal_witness(idx, x, cert, lhs, rhs, gap))
    if in_domain == 0:
        raise EmptyNeighborhood(
            f"no probe landed in dom within radius {cert.mu} of the base"
        )
    return col.finish()


def search_proximal_subgradient(
    h: ScalarField,
    base: Point,
    mu: float,
    scheme: SampleScheme,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    tol_cfg: Tolerances = DEFAULT_TOLERANCES,
) -> list:
    """Scan a documented candidate grid for certificates that verify.

    Candidates: the (finite-difference or analytic) gradient when it exists,
    the zero vector, and +-log directions toward a few probe points.  For
    each direction the smallest passing lambda from the grid is kept.  An
    empty result is meaningful: the proximal subdifferential may be empty.
    """
    if not math.isfinite(eval_scalar(h, base)):
        raise PremiseFailure("base_in_domain", "field is not finite at the search base")
    candidates = []
    try:
        candidates.append(eval_differential(h, base))
    except NonDifferentiable:
        try:
            candidates.append(finite_difference_gradient(h, base, step=tol_cfg.fd_step))
        except NonDifferentiable:
            pass
    candidates.append(scale_tangent(log_map(base, base), 0.0))  # zero direction
    rng = np.random.default_rng(scheme.rng_seed + 1)
    ball = UniformBall(base, mu)
    for _ in range(3):
        try:
            probe = draw_point(rng, ball)
        except _Exhausted:  # pragma: no cover
            break
        v = log_map(base, probe)
        candidates.append(v)
        candidates.append(scale_tangent(v, -1.0))
    found = []
    for sigma in candidates:
        for lam in sorted(lambda_grid):
            cert = ProximalCertificate(base, sigma, lam, mu)
            try:
                rep = verify_proximal_subgradient(h, cert, scheme)
            except EmptyNeighborhood:
                return []
            if rep.verdict == HOLDS:
                found.append(cert)
                break
    return found


def theorem_proximal_direction_bound(
    h: ScalarField,
    maps: MapTriple,
    region: SetPredicate,
    cert: ProximalCertificate,
    scheme: SampleScheme,
    tol_cfg: Tolerances = DEFAULT_TOLERANCES,
) -> CheckReport:
    """A verified certificate bounds the field along the direction map on
    some neighborhood (nonpositive-curvature chart only).

    Premises, each raising :class:`PremiseFailure` when violated: Hadamard
    chart, lower-semicontinuous field, chord bound holds on samples, nonzero
    directions for distinct image pairs, certificate verifies.  The
    existential neighborhood is realized as a halving sweep from the
    certificate radius down to ``proximal_radius_floor``; the report carries
    the largest radius at which every sampled point satisfied the bound.
    Reaching the floor is a falsification-at-scale event.
    """
    man = cert.base.manifold
    if not isinstance(man, Hyperboloid):
        raise PremiseFailure(
            "hadamard_chart", f"direction-bound theorem needs the hyperboloid chart, got {man.kind}"
        )
    if not h.lsc:
        raise PremiseFailure("lower_semicontinuous", "field is declared not lsc")
    pre = check_preinvex(h, maps, scheme, domain=region)
    if pre.verdict != HOLDS:
        raise PremiseFailure("preinvex", f"chord bound verdict was {pre.verdict}")
    for idx, a, b in iter_pairs(scheme, domain=region):
        tgt = maps.target(a)
        base_img = maps.base(b)
        if distance(tgt, base_img) > tol_cfg.strict_pair_distance:
            g = eval_bimap(maps.direction, tgt, base_img)
            if g.norm() <= tol_cfg.zero_direction:
                raise PremiseFailure(
                    "nonzero_direction",
                    "direction map vanishes on a distinct sampled image pair",
                )
    cert_rep = verify_proximal_subgradient(h, cert, scheme)
    if cert_rep.verdict != HOLDS:
        raise PremiseFailure("certificate", f"certificate verdict was {cert_rep.verdict}")

    col = _Collector(
        "theorem_proximal_direction_bound", scheme.tol, scheme.to_dict(), theorem=True
    )
    col.details["certificate"] = cert.to_dict()
    radius = cert.mu
    level = 0
    while radius >= tol_cfg.proximal_radius_floor:
        rng = np.random.default_rng([scheme.rng_seed, level])
        ball = UniformBall(cert.base, radius)
        bad = None
        tested = 0
        for i in range(scheme.n_pairs):
            try:
                x = draw_point(rng, ball, domain=region)
            except _Exhausted:
                break
            lhs, rhs = direction_bound_values(h, maps, cert, x)
            if math.isinf(lhs):
                continue
            tested += 1
            gap = extended_gap(rhs, lhs)
            if gap > scheme.tol:
                bad = _proximal_witness(i, x, cert, lhs, rhs, gap, label=f"radius={radius!r}")
            col.record(_proximal_witness(i, x, cert, lhs, rhs, gap), violated=False)
        if bad is None:
            col.details["largest_passing_radius"] = radius
            col.details["n_tested_at_radius"] = tested
            if tested == 0:
                col.note("no sample landed in the region-neighborhood intersection (vacuous)")
            return col.finish()
        radius *= 0.5
        level += 1
    col.details["largest_passing_radius"] = None
    col.note(
        "falsification-at-scale: no radius down to the floor satisfied the bound on samples"
    )
    rep = col.finish()
    rep.verdict = VIOLATED
    rep.witnesses = [bad]
    rep.falsification = True
    return rep
