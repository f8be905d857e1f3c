"""Geodesic descent and the multistart local-vs-global harness.

The solver iterates x <- exp_x(-eta * grad) with feasibility kept by step
rejection and halving (projection onto an arbitrary predicate is not
computable).  Accepted iterates never increase the objective, and every
trajectory point satisfies the feasible-region predicate exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import InfeasibleStart, NonDifferentiable, OutOfChart
from .geometry import Point, distance, exp_map, scale_tangent
from .maps import (
    IndicatorExtended,
    MapTriple,
    ScalarField,
    SetPredicate,
    Sublevel,
    eval_differential,
    eval_scalar,
)
from .invexity import SOLUTION_SET_NOTE, check_geodesic_invex_set, check_preinvex
from .report import HOLDS, INCONCLUSIVE, VIOLATED, CheckReport, Witness, _Collector
from .sampling import ExplicitList, SampleScheme, UniformBall, draw_point, _Exhausted
from .subgradient import search_proximal_subgradient

__all__ = [
    "FixedStep",
    "Backtracking",
    "DescentConfig",
    "SolveResult",
    "geodesic_descent",
    "multistart_local_global",
    "solution_set_invex",
]

MAX_FEASIBILITY_HALVINGS = 30


@dataclass(frozen=True)
class FixedStep:
    eta: float
    kind = "fixed"

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError("step size must be positive")

    def to_dict(self):
        return {"kind": self.kind, "eta": self.eta}


@dataclass(frozen=True)
class Backtracking:
    eta0: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    kind = "backtracking"

    def __post_init__(self):
        if self.eta0 <= 0.0:
            raise ValueError("initial step must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink factor must lie in (0, 1)")
        if not 0.0 < self.armijo < 1.0:
            raise ValueError("armijo constant must lie in (0, 1)")

    def to_dict(self):
        return {"kind": self.kind, "eta0": self.eta0, "shrink": self.shrink, "armijo": self.armijo}


@dataclass(frozen=True)
class DescentConfig:
    step: object = Backtracking()
    max_iters: int = 500
    grad_tol: float = 1e-9
    subgradient_mode: bool = False
    record_trajectory: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.grad_tol <= 0.0:
            raise ValueError("grad_tol must be positive")

    def to_dict(self):
        return {
            "step": self.step.to_dict(),
            "max_iters": self.max_iters,
            "grad_tol": self.grad_tol,
            "subgradient_mode": self.subgradient_mode,
        }


@dataclass
class SolveResult:
    minimizer: Point
    value: float
    iterations: int
    converged: bool
    trajectory: tuple = ()
    stop_reason: str = ""

    def to_dict(self):
        return {
            "minimizer": [float(t) for t in self.minimizer.coords],
            "value": self.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
        }


def _feasible(region: SetPredicate | None, x: Point) -> bool:
    return region is None or region.contains(x)


def _try_step(h, x, fx, direction, eta, region, accept):
    """Shrink ``eta`` until the candidate is feasible, in-chart, and passes
    ``accept``; returns (point, value, eta) or None."""
    t = eta
    for _ in range(MAX_FEASIBILITY_HALVINGS):
        try:
            cand = exp_map(x, scale_tangent(direction, t))
        except OutOfChart:
            t *= 0.5
            continue
        fc = eval_scalar(h, cand)
        if _feasible(region, cand) and math.isfinite(fc) and accept(t, fc):
            return cand, fc, t
        t *= 0.5
    return None


def _subgradient_direction(h, x, scheme_seed, radius, tol_cfg):
    """A verified certificate direction at a nonsmooth iterate."""
    probe_scheme = SampleScheme(
        n_pairs=8,
        s_grid=2,
        rng_seed=scheme_seed,
        sampler=UniformBall(x, radius),
        tol=tol_cfg.violation,
    )
    certs = search_proximal_subgradient(
        h, x, radius, probe_scheme, lambda_grid=(0.0, 1e-1, 1.0), tol_cfg=tol_cfg
    )
    if not certs:
        return None
    return certs[0].sigma


def geodesic_descent(
    h: ScalarField,
    start: Point,
    cfg: DescentConfig,
    region: SetPredicate | None = None,
    tol_cfg: Tolerances = DEFAULT_TOLERANCES,
) -> SolveResult:
    """Minimize ``h`` from ``start`` by geodesic steepest descent.

    Fixed steps accept any non-increasing feasible candidate; backtracking
    additionally demands the Armijo decrease.  In subgradient mode the
    descent direction comes from a verified proximal certificate whenever
    the analytic gradient is unavailable, with diminishing steps eta/sqrt(k).
    """
    if not _feasible(region, start):
        raise InfeasibleStart("start point violates the feasible region")
    fx = eval_scalar(h, start)
    if not math.isfinite(fx):
        raise InfeasibleStart("objective is not finite at the start point")

    x, k = start, 0
    trajectory = [start]
    converged = False
    reason = "max_iters"
    step_cfg = cfg.step
    eta0 = step_cfg.eta if isinstance(step_cfg, FixedStep) else step_cfg.eta0

    try:
        if eval_differential(h, start).norm() <= cfg.grad_tol:
            return SolveResult(
                minimizer=start,
                value=fx,
                iterations=0,
                converged=True,
                trajectory=tuple(trajectory) if cfg.record_trajectory else (),
                stop_reason="stationary_start",
            )
    except NonDifferentiable:
        pass

    for k in range(1, cfg.max_iters + 1):
        grad = None
        try:
            grad = eval_differential(h, x)
            gnorm = grad.norm()
        except NonDifferentiable:
            if not cfg.subgradient_mode:
                reason = "nondifferentiable_iterate"
                break
            sigma = _subgradient_direction(h, x, scheme_seed=k, radius=0.25, tol_cfg=tol_cfg)
            if sigma is None:
                reason = "empty_subdifferential"
                break
            grad, gnorm = sigma, sigma.norm()

        if gnorm <= cfg.grad_tol:
            converged, reason = True, "gradient_below_tol"
            break
        direction = scale_tangent(grad, -1.0)
        if cfg.subgradient_mode:
            eta = eta0 / math.sqrt(k)
            if eta * gnorm <= cfg.grad_tol:
                converged, reason = True, "subgradient_step_below_tol"
                break
            accepted = _try_step(h, x, fx, direction, eta, region, lambda t, fc: fc <= fx)
        elif isinstance(step_cfg, FixedStep):
            accepted = _try_step(h, x, fx, direction, eta0, region, lambda t, fc: fc <= fx)
        else:
            accepted = _try_step(
                h, x, fx, direction, eta0, region,
                lambda t, fc: fc <= fx - step_cfg.armijo * t * gnorm * gnorm,
            )
        if accepted is None:
            reason = "no_acceptable_step"
            break
        x, fx, _ = accepted
        if cfg.record_trajectory:
            trajectory.append(x)

    else:  # loop ran to completion without break
        k = cfg.max_iters

    if not converged and reason == "max_iters":
        # a final stationarity check: the last iterate may already be optimal
        try:
            if eval_differential(h, x).norm() <= cfg.grad_tol:
                converged, reason = True, "gradient_below_tol"
        except NonDifferentiable:
            pass

    return SolveResult(
        minimizer=x,
        value=eval_scalar(h, x),
        iterations=k,
        converged=converged,
        trajectory=tuple(trajectory) if cfg.record_trajectory else (),
        stop_reason=reason,
    )


def _feasible_seeds(scheme: SampleScheme, region, n_starts: int):
    sampler = scheme.sampler
    if isinstance(sampler, ExplicitList):
        pts = [p for p in sampler.points if _feasible(region, p)]
        return pts[:n_starts]
    rng = np.random.default_rng(scheme.rng_seed)
    seeds = []
    for _ in range(n_starts):
        try:
            seeds.append(draw_point(rng, sampler, domain=region))
        except _Exhausted:
            break
    return seeds


def multistart_local_global(
    h: ScalarField,
    maps: MapTriple,
    region: SetPredicate,
    n_starts: int,
    cfg: DescentConfig,
    scheme: SampleScheme,
    demonstration: bool = False,
    tol_spread: float = DEFAULT_TOLERANCES.spread,
    jobs: int = 1,
) -> CheckReport:
    """Every local solution of a chord-bounded objective is global: run many
    descents and demand their converged values agree within ``tol_spread``.

    The chord-bound premise is checked first; without it the harness is
    INCONCLUSIVE unless ``demonstration`` is set, in which case the descents
    still run so the spread of a premise-violating objective can be
    inspected (it is reported in the details, not graded as falsification).
    """
    premise = check_preinvex(h, maps, scheme, domain=region)
    col = _Collector("multistart_local_global", tol_spread, scheme.to_dict(), theorem=True)
    col.details["premise_preinvex"] = premise.verdict
    col.details["n_starts"] = n_starts
    if premise.verdict != HOLDS and not demonstration:
        col.note(f"premise_failed: preinvex verdict {premise.verdict}")
        rep = col.finish()
        rep.verdict = INCONCLUSIVE
        return rep

    seeds = _feasible_seeds(scheme, region, n_starts)
    if jobs > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda p: geodesic_descent(h, p, cfg, region), seeds))
    else:
        results = [geodesic_descent(h, p, cfg, region) for p in seeds]
    converged = [r for r in results if r.converged]
    col.details["n_seeds"] = len(seeds)
    col.details["n_converged"] = len(converged)
    values = [r.value for r in converged]
    if values:
        spread = max(values) - min(values)
        col.details["value_spread"] = spread
        col.details["best_value"] = min(values)
    else:
        spread = None

    if premise.verdict != HOLDS:
        col.note(f"premise_failed: preinvex verdict {premise.verdict} (demonstration mode)")
        rep = col.finish()
        rep.verdict = INCONCLUSIVE
        return rep
    if len(converged) <= 1:
        if n_starts <= 1 and converged:
            col.note("single start: spread is vacuously zero")
            col.details["value_spread"] = 0.0
            return col.finish()
        col.note("fewer than two descents converged; spread is undecidable")
        rep = col.finish()
        rep.verdict = INCONCLUSIVE
        return rep

    lo = min(converged, key=lambda r: r.value)
    hi = max(converged, key=lambda r: r.value)
    witness = Witness(
        index=0,
        first=tuple(float(t) for t in lo.minimizer.coords),
        second=tuple(float(t) for t in hi.minimizer.coords),
        param=math.nan,
        lhs=hi.value,
        rhs=lo.value,
        gap=spread,
        label="discordant_minimizers",
    )
    violated = col.record(witness, violated=bool(spread > tol_spread))
    rep = col.finish()
    if violated:
        rep.falsification = True
        rep.notes = tuple(list(rep.notes) + [
            "FALSIFICATION: converged descents disagree while the chord bound held on samples"
        ])
    return rep


def solution_set_invex(
    h: ScalarField,
    maps: MapTriple,
    region: SetPredicate,
    results,
    scheme: SampleScheme,
    strict: bool = False,
    tol_opt: float | None = None,
    tol_diam: float = DEFAULT_TOLERANCES.solution_diameter,
) -> CheckReport:
    """The near-optimal set is itself geodesic invex.

    ``results`` is a pool of solver results (or bare points).  The solution
    set is realized exactly as the sublevel predicate
    {x in region : value(x) <= best + tol_opt}, whose membership is
    decidable by evaluation, and the invex-set check runs over all ordered
    pool pairs.  For strict objectives the pool diameter must collapse
    below ``tol_diam`` (at most one solution); a wider pool flags a
    misconfigured tolerance rather than a falsification.
    """
    points = [r.minimizer if isinstance(r, SolveResult) else r for r in results]
    if not points:
        raise InfeasibleStart("solution_set_invex needs a nonempty result pool")
    values = [eval_scalar(h, p) for p in points]
    best = min(values)
    if tol_opt is None:
        tol_opt = DEFAULT_TOLERANCES.optimal_pool_rel * (1.0 + abs(best))
    pool = [p for p, v in zip(points, values) if v <= best + tol_opt]

    level_pred = Sublevel(IndicatorExtended(h, region), best + tol_opt)
    pool_scheme = SampleScheme(
        n_pairs=max(1, len(pool) ** 2),
        s_grid=scheme.s_grid,
        rng_seed=scheme.rng_seed,
        sampler=ExplicitList(tuple(pool)),
        tol=scheme.tol,
    )
    inner = check_geodesic_invex_set(level_pred, maps, pool_scheme)

    diameter = 0.0
    worst_pair = None
    for i, p in enumerate(pool):
        for q in pool[i + 1:]:
            d = distance(p, q)
            if d > diameter:
                diameter, worst_pair = d, (p, q)

    col = _Collector("solution_set_invex", scheme.tol, scheme.to_dict())
    col.note(SOLUTION_SET_NOTE)
    col.details["pool_size"] = len(pool)
    col.details["best_value"] = best
    col.details["pool_diameter"] = diameter
    col.details["invex_verdict"] = inner.verdict
    rep = col.finish()
    rep.n_evaluated = inner.n_evaluated
    rep.n_skipped = inner.n_skipped
    rep.n_inconclusive = inner.n_inconclusive
    rep.max_gap = inner.max_gap
    rep.witnesses = list(inner.witnesses)
    rep.verdict = inner.verdict
    if strict and diameter >= tol_diam and worst_pair is not None:
        rep.verdict = VIOLATED
        rep.witnesses.append(
            Witness(
                index=len(rep.witnesses),
                first=tuple(float(t) for t in worst_pair[0].coords),
                second=tuple(float(t) for t in worst_pair[1].coords),
                param=math.nan,
                lhs=diameter,
                rhs=tol_diam,
                gap=diameter - tol_diam,
                label="strict_pool_diameter",
            )
        )
        rep.notes = tuple(
            list(rep.notes)
            + ["strict objective: pool diameter exceeds tol_diam (check pool construction)"]
        )
    return rep
