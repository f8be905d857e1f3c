"""Sampling-based predicate checkers for invex sets and functions.

Every checker quantifies its defining inequality over sampled point pairs
and a [0, 1] parameter grid.  Sampling can only falsify a universally
quantified statement, so the passing verdict is ``HOLDS_ON_SAMPLES``, never
"proved".  Violations require a one-sided gap above the scheme tolerance;
each violation is reported as a replayable witness.

A second family of entry points runs *theorem harnesses*: premise checks
followed by a conclusion check, where a conclusion violation under verified
premises is flagged as a falsification event (a build-failing outcome,
distinct from an expected violation).
"""

from __future__ import annotations

import math

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ChartMismatch, ConfigError, NonDifferentiable, OutOfChart
from .geometry import (
    Euclidean,
    GeodesicSegment,
    Manifold,
    Point,
    TangentVector,
    distance,
    exp_map,
    geodesic_eval,
    inner_product,
    inverse_transport,
    scale_tangent,
    tangent_norm,
)
from .maps import (
    IndicatorExtended,
    MapTriple,
    ScalarField,
    SetPredicate,
    Sublevel,
    WeightedSum,
    eval_bimap,
    eval_differential,
    eval_scalar,
)
from .report import HOLDS, INCONCLUSIVE, VIOLATED, CheckReport, Witness, _Collector
from .sampling import ExplicitList, SampleScheme, UniformBall, iter_pairs

__all__ = [
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
    "replay_witness",
    "scheme_manifold",
]

INVEX_DOMAIN_NOTE = (
    "reading: the function's domain is taken to be geodesic-invex with "
    "respect to the same map triple"
)
SOLUTION_SET_NOTE = (
    "reading: the at-most-one-point conclusion for strict objectives is "
    "applied to the solution set, not the whole chart"
)


def scheme_manifold(scheme: SampleScheme) -> Manifold:
    sampler = scheme.sampler
    if isinstance(sampler, UniformBall):
        return sampler.center.manifold
    if isinstance(sampler, ExplicitList):
        return sampler.points[0].manifold
    raise ConfigError(f"unknown sampler type {type(sampler).__name__}")


# ---------------------------------------------------------------------------
# extended-real helpers


def extended_gap(lhs: float, rhs: float) -> float:
    """lhs - rhs with the (-inf, inf] conventions: a +inf bound never
    violates, a +inf value against a finite bound always does."""
    if math.isinf(rhs) and rhs > 0:
        return -math.inf
    if math.isinf(lhs) and lhs > 0:
        return math.inf
    return lhs - rhs


def chord_value(s: float, at_target: float, at_base: float) -> float:
    """s * at_target + (1-s) * at_base with exact endpoints (0 * inf = 0)."""
    if s <= 0.0:
        return at_base
    if s >= 1.0:
        return at_target
    return s * at_target + (1.0 - s) * at_base


# ---------------------------------------------------------------------------
# per-sample gap functions (pure; shared by checkers and witness replay)


def invex_set_flat_gap(region: SetPredicate, maps: MapTriple, a: Point, b: Point, mu: float) -> float:
    base_pt = maps.base(b)
    if not isinstance(base_pt.manifold, Euclidean):
        raise ChartMismatch("flat invex-set check requires the euclidean chart")
    d = eval_bimap(maps.direction, maps.target(a), base_pt)
    moved = Point(base_pt.manifold, base_pt.coords + mu * d.comps)
    return region.violation(moved)


def convex_set_flat_gap(region: SetPredicate, target, base, a: Point, b: Point, mu: float) -> float:
    """Directly coded degenerate case: direction fixed to target - base."""
    x = target(a)
    y = base(b)
    if not isinstance(y.manifold, Euclidean):
        raise ChartMismatch("flat convex-set check requires the euclidean chart")
    moved = Point(y.manifold, y.coords + mu * (x.coords - y.coords))
    return region.violation(moved)


def classical_convex_set_gap(region: SetPredicate, a: Point, b: Point, mu: float) -> float:
    moved = Point(b.manifold, b.coords + mu * (a.coords - b.coords))
    return region.violation(moved)


def classical_convex_function_values(h: ScalarField, a: Point, b: Point, mu: float):
    moved = Point(b.manifold, b.coords + mu * (a.coords - b.coords))
    lhs = eval_scalar(h, moved)
    rhs = chord_value(mu, eval_scalar(h, a), eval_scalar(h, b))
    return lhs, rhs


def geodesic_invex_gap(region: SetPredicate, maps: MapTriple, a: Point, b: Point, s: float) -> float:
    base_pt = maps.base(b)
    d = eval_bimap(maps.direction, maps.target(a), base_pt)
    moved = exp_map(base_pt, scale_tangent(d, s))
    return region.violation(moved)


def preinvex_values(h: ScalarField, maps: MapTriple, a: Point, b: Point, s: float):
    tgt = maps.target(a)
    base_pt = maps.base(b)
    d = eval_bimap(maps.direction, tgt, base_pt)
    moved = exp_map(base_pt, scale_tangent(d, s))
    lhs = eval_scalar(h, moved)
    rhs = chord_value(s, eval_scalar(h, tgt), eval_scalar(h, base_pt))
    return lhs, rhs


def invex_function_values(h: ScalarField, maps: MapTriple, a: Point, b: Point, fd_fallback=True):
    tgt = maps.target(a)
    base_pt = maps.base(b)
    d = eval_bimap(maps.direction, tgt, base_pt)
    grad = eval_differential(h, base_pt, fd_fallback=fd_fallback)
    lhs = extended_gap(eval_scalar(h, tgt), eval_scalar(h, base_pt))  # H(E) - H(F)
    rhs = inner_product(grad, d)
    return lhs, rhs


def transport_compat_gaps(maps: MapTriple, a: Point, b: Point, s: float):
    """Both compatibility identities between the direction map and parallel
    transport along its own geodesic, pulled back to the start point.

    to_start:  transport of direction(base_image, path(s)) back to 0 must be
               -s * direction(target_image, base_image)
    to_target: transport of direction(target_image, path(s)) back to 0 must
               be (1-s) * direction(target_image, base_image)
    """
    tgt = maps.target(a)
    base_pt = maps.base(b)
    g0 = eval_bimap(maps.direction, tgt, base_pt)
    seg = GeodesicSegment(base_pt, g0)
    mid = geodesic_eval(seg, s)
    out = []
    for label, probe, coeff in (("to_start", base_pt, -s), ("to_target", tgt, 1.0 - s)):
        w = eval_bimap(maps.direction, probe, mid)
        back = inverse_transport(w, seg, s)
        want = scale_tangent(g0, coeff)
        diff = TangentVector(base_pt, back.comps - want.comps)
        out.append((label, tangent_norm(back), tangent_norm(want), tangent_norm(diff)))
    return out


# ---------------------------------------------------------------------------
# checkers


def _witness(idx, a, b, s, lhs, rhs, gap, label=""):
    return Witness(
        index=idx,
        first=tuple(float(t) for t in a.coords),
        second=tuple(float(t) for t in b.coords),
        param=float(s),
        lhs=float(lhs),
        rhs=float(rhs),
        gap=float(gap),
        label=label,
    )


def check_invex_set_flat(
    region: SetPredicate,
    maps: MapTriple,
    scheme: SampleScheme,
    tol_cfg: Tolerances = DEFAULT_TOLERANCES,
) -> CheckReport:
    """Is the region closed under base_image + mu * direction for sampled
    pairs drawn from the region and every grid mu?  Flat chart only."""
    if not isinstance(scheme_manifold(scheme), Euclidean):
        raise ChartMismatch("flat invex-set check requires the euclidean chart")
    col = _Collector("check_invex_set_flat", scheme.tol, scheme.to_dict())
    for idx, a, b in iter_pairs(scheme, domain=region):
        for mu in scheme.s_values():
            gap = invex_set_flat_gap(region, maps, a, b, float(mu))
            col.record(_witness(idx, a, b, mu, gap, 0.0, gap))
    return col.finish()


def check_convex_set_flat(
    region: SetPredicate,
    target,
    base,
    scheme: SampleScheme,
) -> CheckReport:
    """Degenerate control: the same quantification with the direction fixed
    to the coordinate difference of the two map images."""
    if not isinstance(scheme_manifold(scheme), Euclidean):
        raise ChartMismatch("flat convex-set check requires the euclidean chart")
    col = _Collector("check_convex_set_flat", scheme.tol, scheme.to_dict())
    for idx, a, b in iter_pairs(scheme, domain=region):
        for mu in scheme.s_values():
            gap = convex_set_flat_gap(region, target, base, a, b, float(mu))
            col.record(_witness(idx, a, b, mu, gap, 0.0, gap))
    return col.finish()


def check_convex_set_classical(region: SetPredicate, scheme: SampleScheme) -> CheckReport:
    """Plain segment-membership convexity check (no maps at all)."""
    if not isinstance(scheme_manifold(scheme), Euclidean):
        raise ChartMismatch("classical convexity check requires the euclidean chart")
    col = _Collector("check_convex_set_classical", scheme.tol, scheme.to_dict())
    for idx, a, b in iter_pairs(scheme, domain=region):
        for mu in scheme.s_values():
            gap = classical_convex_set_gap(region, a, b, float(mu))
            col.record(_witness(idx, a, b, mu, gap, 0.0, gap))
    return col.finish()


def check_convex_function_classical(
    h: ScalarField, scheme: SampleScheme, domain: SetPredicate | None = None
) -> CheckReport:
    """Plain chord check f(y + mu(x-y)) <= mu f(x) + (1-mu) f(y)."""
    if not isinstance(scheme_manifold(scheme), Euclidean):
        raise ChartMismatch("classical convexity check requires the euclidean chart")
    col = _Collector("check_convex_function_classical", scheme.tol, scheme.to_dict())
    for idx, a, b in iter_pairs(scheme, domain=domain):
        for mu in scheme.s_values():
            lhs, rhs = classical_convex_function_values(h, a, b, float(mu))
            gap = extended_gap(lhs, rhs)
            col.record(_witness(idx, a, b, mu, lhs, rhs, gap))
    return col.finish()


def check_geodesic_invex_set(
    region: SetPredicate,
    maps: MapTriple,
    scheme: SampleScheme,
) -> CheckReport:
    """Does the geodesic issued from each base image with the mapped
    direction stay in the region across the whole parameter grid?

    Pairs whose map images fall outside the region are skipped (the
    definition quantifies over image pairs inside it).  A geodesic that
    exits the chart (spherical cap) is INCONCLUSIVE, not VIOLATED: the
    required geodesic fails to exist in-model, which is a different
    failure than the inclusion failing.
    """
    col = _Collector("check_geodesic_invex_set", scheme.tol, scheme.to_dict())
    for idx, a, b in iter_pairs(scheme, domain=region):
        try:
            if not (region.contains(maps.target(a)) and region.contains(maps.base(b))):
                col.skip()
                continue
        except OutOfChart:
            col.skip()
            continue
        for s in scheme.s_values():
            try:
                gap = geodesic_invex_gap(region, maps, a, b, float(s))
            except OutOfChart as exc:
                col.record_inconclusive(
                    _witness(idx, a, b, s, math.nan, math.nan, math.nan, f"chart_exit: {exc}")
                )
                continue
            col.record(_witness(idx, a, b, s, gap, 0.0, gap))
    return col.finish()


def check_preinvex(
    h: ScalarField,
    maps: MapTriple,
    scheme: SampleScheme,
    strict: bool = False,
    domain: SetPredicate | None = None,
    tol_cfg: Tolerances = DEFAULT_TOLERANCES,
) -> CheckReport:
    """Chord bound along the mapped geodesic:
    value(path(s)) <= s * value(target_image) + (1-s) * value(base_image).

    Strict mode additionally requires the strict inequality for distinct
    image pairs and interior s; those comparisons use zero slack.
    """
    op = "check_preinvex_strict" if strict else "check_preinvex"
    col = _Collector(op, scheme.tol, scheme.to_dict())
    for idx, a, b in iter_pairs(scheme, domain=domain):
        if domain is not None:
            try:
                if not (domain.contains(maps.target(a)) and domain.contains(maps.base(b))):
                    col.skip()
                    continue
            except OutOfChart:
                col.skip()
                continue
        for s in scheme.s_values():
            try:
                lhs, rhs = preinvex_values(h, maps, a, b, float(s))
            except OutOfChart as exc:
                col.record_inconclusive(
                    _witness(idx, a, b, s, math.nan, math.nan, math.nan, f"chart_exit: {exc}")
                )
                continue
            gap = extended_gap(lhs, rhs)
            col.record(_witness(idx, a, b, s, lhs, rhs, gap))
            if strict and 0.0 < s < 1.0:
                if distance(maps.target(a), maps.base(b)) >= tol_cfg.strict_pair_distance:
                    col.record(
                        _witness(idx, a, b, s, lhs, rhs, gap, label="strict"),
                        violated=bool(gap >= 0.0),
                    )
    return col.finish()


def check_invex_function(
    h: ScalarField,
    maps: MapTriple,
    scheme: SampleScheme,
    domain: SetPredicate | None = None,
    fd_fallback: bool = True,
) -> CheckReport:
    """First-order lower bound:
    value(target_image) - value(base_image) >= <grad(base_image), direction>.

    Samples where the field is not differentiable are INCONCLUSIVE.
    """
    col = _Collector("check_invex_function", scheme.tol, scheme.to_dict())
    col.note(INVEX_DOMAIN_NOTE)
    for idx, a, b in iter_pairs(scheme, domain=domain):
        try:
            lhs, rhs = invex_function_values(h, maps, a, b, fd_fallback=fd_fallback)
        except NonDifferentiable as exc:
            col.record_inconclusive(
                _witness(idx, a, b, math.nan, math.nan, math.nan, math.nan, f"nondifferentiable: {exc}")
            )
            continue
        except OutOfChart as exc:
            col.record_inconclusive(
                _witness(idx, a, b, math.nan, math.nan, math.nan, math.nan, f"chart_exit: {exc}")
            )
            continue
        gap = extended_gap(rhs, lhs)  # violation: bound exceeds the difference
        col.record(_witness(idx, a, b, math.nan, lhs, rhs, gap))
    return col.finish()


def check_transport_compatibility(
    maps: MapTriple,
    scheme: SampleScheme,
    domain: SetPredicate | None = None,
) -> CheckReport:
    """Transport-compatibility identities tying the direction map to its own
    geodesics (pulled back to parameter 0):

      to_start:   P_0[direction(base_image, path(s))]   = -s      * direction0
      to_target:  P_0[direction(target_image, path(s))] = (1 - s) * direction0

    Gaps for the two identities are tracked separately in the details.
    """
    col = _Collector("check_transport_compatibility", scheme.tol, scheme.to_dict())
    worst = {"to_start": 0.0, "to_target": 0.0}
    for idx, a, b in iter_pairs(scheme, domain=domain):
        for s in scheme.s_values():
            try:
                rows = transport_compat_gaps(maps, a, b, float(s))
            except OutOfChart as exc:
                col.record_inconclusive(
                    _witness(idx, a, b, s, math.nan, math.nan, math.nan, f"chart_exit: {exc}")
                )
                continue
            for label, lhs, rhs, gap in rows:
                worst[label] = max(worst[label], gap)
                col.record(_witness(idx, a, b, s, lhs, rhs, gap, label=label))
    col.details["to_start_max_gap"] = worst["to_start"]
    col.details["to_target_max_gap"] = worst["to_target"]
    return col.finish()


# ---------------------------------------------------------------------------
# theorem harnesses


def _merge_composite(
    op: str,
    premises: dict,
    conclusion: CheckReport | None,
    scheme: SampleScheme,
    gate_on_premises: bool,
    extra_notes: tuple = (),
) -> CheckReport:
    details = {f"premise_{name}": rep.verdict for name, rep in premises.items()}
    notes = list(extra_notes)
    failed = [name for name, rep in premises.items() if rep.verdict != HOLDS]
    premise_evals = sum(rep.n_evaluated for rep in premises.values())
    if failed and gate_on_premises:
        notes.append(f"premise_failed: {', '.join(failed)}")
        first_failed = premises[failed[0]]
        return CheckReport(
            op=op,
            verdict=INCONCLUSIVE,
            witnesses=list(first_failed.witnesses),
            n_evaluated=premise_evals,
            tol=scheme.tol,
            scheme=scheme.to_dict(),
            details=details,
            notes=tuple(notes),
            theorem_harness=True,
            falsification=False,
        )
    if failed:
        notes.append(f"premise_failed: {', '.join(failed)} (conclusion still evaluated)")
    assert conclusion is not None
    falsification = not failed and conclusion.verdict == VIOLATED
    if falsification:
        notes.append("FALSIFICATION: conclusion violated while premises held on samples")
    return CheckReport(
        op=op,
        verdict=conclusion.verdict,
        witnesses=list(conclusion.witnesses),
        n_evaluated=premise_evals + conclusion.n_evaluated,
        n_skipped=conclusion.n_skipped,
        n_inconclusive=conclusion.n_inconclusive,
        max_gap=conclusion.max_gap,
        tol=scheme.tol,
        scheme=scheme.to_dict(),
        details=details,
        notes=tuple(list(conclusion.notes) + notes),
        theorem_harness=True,
        falsification=falsification,
    )


def check_sum_preinvex(
    terms,
    maps: MapTriple,
    scheme: SampleScheme,
    domain: SetPredicate | None = None,
) -> CheckReport:
    """Nonnegative combinations of chord-bounded fields stay chord-bounded.

    Premise: every positive-weight term passes the chord check on the same
    scheme.  A violated combination under passing premises is a
    falsification event.
    """
    premises = {}
    for i, (w, h) in enumerate(terms):
        if w == 0.0:
            continue
        premises[f"term_{i}"] = check_preinvex(h, maps, scheme, domain=domain)
    combined = WeightedSum(tuple(terms))
    conclusion = check_preinvex(combined, maps, scheme, domain=domain)
    return _merge_composite(
        "check_sum_preinvex", premises, conclusion, scheme, gate_on_premises=True
    )


def check_level_set_invex(
    h: ScalarField,
    level: float,
    maps: MapTriple,
    scheme: SampleScheme,
    domain: SetPredicate | None = None,
) -> CheckReport:
    """Sublevel sets of a chord-bounded field are geodesic invex sets.

    The premise is recorded but the sublevel check always runs, so a
    non-preinvex field can be used to demonstrate the contrapositive.
    """
    premise = check_preinvex(h, maps, scheme, domain=domain)
    inner = IndicatorExtended(h, domain) if domain is not None else h
    pred = Sublevel(inner, level)
    conclusion = check_geodesic_invex_set(pred, maps, scheme)
    return _merge_composite(
        "check_level_set_invex",
        {"preinvex": premise},
        conclusion,
        scheme,
        gate_on_premises=False,
    )


def theorem_preinvex_implies_invex(
    h: ScalarField,
    maps: MapTriple,
    scheme: SampleScheme,
    domain: SetPredicate | None = None,
) -> CheckReport:
    """Chord-bounded differentiable fields satisfy the first-order bound."""
    premise = check_preinvex(h, maps, scheme, domain=domain)
    if premise.verdict != HOLDS:
        return _merge_composite(
            "theorem_preinvex_implies_invex",
            {"preinvex": premise},
            None,
            scheme,
            gate_on_premises=True,
        )
    conclusion = check_invex_function(h, maps, scheme, domain=domain)
    return _merge_composite(
        "theorem_preinvex_implies_invex",
        {"preinvex": premise},
        conclusion,
        scheme,
        gate_on_premises=True,
    )


def theorem_invex_plus_compat_implies_preinvex(
    h: ScalarField,
    maps: MapTriple,
    scheme: SampleScheme,
    domain: SetPredicate | None = None,
) -> CheckReport:
    """First-order bound + transport compatibility imply the chord bound."""
    premises = {
        "invex_function": check_invex_function(h, maps, scheme, domain=domain),
        "transport_compatibility": check_transport_compatibility(maps, scheme, domain=domain),
    }
    if any(rep.verdict != HOLDS for rep in premises.values()):
        return _merge_composite(
            "theorem_invex_plus_compat_implies_preinvex",
            premises,
            None,
            scheme,
            gate_on_premises=True,
        )
    conclusion = check_preinvex(h, maps, scheme, domain=domain)
    return _merge_composite(
        "theorem_invex_plus_compat_implies_preinvex",
        premises,
        conclusion,
        scheme,
        gate_on_premises=True,
    )


# ---------------------------------------------------------------------------
# witness replay


def replay_witness(
    op: str,
    witness: Witness,
    manifold: Manifold,
    *,
    maps: MapTriple | None = None,
    region: SetPredicate | None = None,
    field: ScalarField | None = None,
    target=None,
    base=None,
) -> float:
    """Recompute a witness gap from its raw coordinates, in isolation.

    The returned gap must match the reported one within
    ``Tolerances.witness_replay``.
    """
    a = Point(manifold, np.asarray(witness.first, dtype=float))
    b = Point(manifold, np.asarray(witness.second, dtype=float))
    s = witness.param
    if op == "check_invex_set_flat":
        return invex_set_flat_gap(region, maps, a, b, s)
    if op == "check_convex_set_flat":
        return convex_set_flat_gap(region, target, base, a, b, s)
    if op == "check_convex_set_classical":
        return classical_convex_set_gap(region, a, b, s)
    if op == "check_convex_function_classical":
        lhs, rhs = classical_convex_function_values(field, a, b, s)
        return extended_gap(lhs, rhs)
    if op in ("check_geodesic_invex_set", "check_level_set_invex"):
        return geodesic_invex_gap(region, maps, a, b, s)
    if op in ("check_preinvex", "check_preinvex_strict", "check_sum_preinvex",
              "theorem_invex_plus_compat_implies_preinvex"):
        lhs, rhs = preinvex_values(field, maps, a, b, s)
        return extended_gap(lhs, rhs)
    if op in ("check_invex_function", "theorem_preinvex_implies_invex"):
        lhs, rhs = invex_function_values(field, maps, a, b)
        return extended_gap(rhs, lhs)
    if op == "check_transport_compatibility":
        for label, lhs, rhs, gap in transport_compat_gaps(maps, a, b, s):
            if label == witness.label:
                return gap
        raise ConfigError(f"witness label {witness.label!r} not produced by {op}")
    raise ConfigError(f"no replay rule for op {op!r}")
