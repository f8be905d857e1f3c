"""Deterministic sampling schemes for the predicate checkers.

A :class:`SampleScheme` fixes how many point pairs are drawn, the [0, 1]
parameter grid, the seed, and the violation slack; identical schemes replay
identically.  Points are drawn one at a time from a single generator stream,
so enlarging ``n_pairs`` extends a run without disturbing its prefix (the
monotone-refinement property relies on this).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, OutOfChart
from .geometry import Manifold, Point, TangentVector, exp_map

__all__ = [
    "UniformBall",
    "ExplicitList",
    "SampleScheme",
    "draw_point",
    "iter_pairs",
    "sample_ball_batch",
    "sampler_from_dict",
]

_MAX_REJECTS = 500


@dataclass(frozen=True, eq=False)
class UniformBall:
    """Geodesic ball sampler: exp_center(r * u), u uniform direction and
    r = radius * U^(1/dim), which is volume-uniform on the flat chart."""

    center: Point
    radius: float
    kind = "uniform_ball"

    def to_dict(self):
        return {
            "kind": self.kind,
            "center": [float(t) for t in self.center.coords],
            "radius": self.radius,
        }


@dataclass(frozen=True, eq=False)
class ExplicitList:
    """Fixed point list; pair iteration enumerates all ordered pairs."""

    points: tuple
    kind = "explicit_list"

    def to_dict(self):
        return {
            "kind": self.kind,
            "points": [[float(t) for t in p.coords] for p in self.points],
        }


@dataclass(frozen=True, eq=False)
class SampleScheme:
    n_pairs: int
    s_grid: int
    rng_seed: int
    sampler: object
    tol: float = 1e-8

    def __post_init__(self):
        if self.n_pairs < 1:
            raise ConfigError("n_pairs must be >= 1")
        if self.s_grid < 2:
            raise ConfigError("s_grid must be >= 2 (endpoints included)")
        if self.tol < 0.0:
            raise ConfigError("tol must be >= 0")

    def s_values(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.s_grid)

    def to_dict(self):
        return {
            "n_pairs": self.n_pairs,
            "s_grid": self.s_grid,
            "rng_seed": self.rng_seed,
            "tol": self.tol,
            "sampler": self.sampler.to_dict(),
        }


def _draw_in_ball(rng: np.random.Generator, ball: UniformBall) -> Point:
    man = ball.center.manifold
    basis = man.tangent_basis(ball.center.coords)
    z = rng.standard_normal(man.dim)
    n = np.linalg.norm(z)
    while n < 1e-12:  # pragma: no cover - probability ~0, deterministic retry
        z = rng.standard_normal(man.dim)
        n = np.linalg.norm(z)
    r = ball.radius * rng.random() ** (1.0 / man.dim)
    comps = (r / n) * (z @ basis)
    return exp_map(ball.center, TangentVector(ball.center, comps))


def draw_point(rng: np.random.Generator, sampler, domain=None) -> Point:
    """One accepted draw; rejection-filters against ``domain`` when given."""
    if isinstance(sampler, ExplicitList):
        raise ConfigError("draw_point needs a random sampler, not explicit_list")
    for _ in range(_MAX_REJECTS):
        try:
            p = _draw_in_ball(rng, sampler)
        except OutOfChart:
            continue
        if domain is None or domain.contains(p):
            return p
    raise _Exhausted()


class _Exhausted(Exception):
    """Internal: the rejection sampler could not hit the domain."""


def iter_pairs(scheme: SampleScheme, domain=None):
    """Yield (index, first, second) sample pairs.

    ``uniform_ball`` draws 2 * n_pairs fresh points (rejection-filtered by
    ``domain``); ``explicit_list`` enumerates all ordered pairs of its
    domain-passing points.  Stops early, without error, when rejection
    sampling exhausts: callers treat a truncated (possibly empty) stream as
    "what the scheme could see".
    """
    sampler = scheme.sampler
    if isinstance(sampler, ExplicitList):
        pts = [p for p in sampler.points if domain is None or domain.contains(p)]
        idx = 0
        for a in pts:
            for b in pts:
                yield idx, a, b
                idx += 1
        return
    rng = np.random.default_rng(scheme.rng_seed)
    for i in range(scheme.n_pairs):
        try:
            a = draw_point(rng, sampler, domain)
            b = draw_point(rng, sampler, domain)
        except _Exhausted:
            return
        yield i, a, b


def sample_ball_batch(
    man: Manifold,
    rng: np.random.Generator,
    center_coords: np.ndarray,
    radius: float,
    n: int,
) -> np.ndarray:
    """Vectorized ball sampling on raw arrays (bulk probe generation).

    Consumes the generator differently from :func:`draw_point`; use only
    where replay-compatibility with pair streams is not required.
    """
    basis = man.tangent_basis(center_coords)
    z = rng.standard_normal((n, man.dim))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms < 1e-12] = 1.0
    radii = radius * rng.random((n, 1)) ** (1.0 / man.dim)
    comps = (z / norms * radii) @ basis
    return man.exp(np.broadcast_to(center_coords, comps.shape), comps)


def sampler_from_dict(d: dict, manifold: Manifold, where: str = "sampler"):
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("sampler must be a dict with a 'kind' key", where)
    kind = d["kind"]
    if kind == "uniform_ball":
        try:
            radius = float(d["radius"])
            center = np.asarray(d["center"], dtype=float)
        except (KeyError, TypeError, ValueError):
            raise ConfigError("uniform_ball needs 'center' and numeric 'radius'", where)
        if radius <= 0:
            raise ConfigError("uniform_ball radius must be positive", where)
        return UniformBall(manifold.point(center, project=True), radius)
    if kind == "explicit_list":
        pts = d.get("points")
        if not pts:
            raise ConfigError("explicit_list needs a nonempty 'points' list", where)
        return ExplicitList(tuple(manifold.point(np.asarray(p, dtype=float), project=True) for p in pts))
    raise ConfigError(f"unknown sampler kind {kind!r}", where)


def scheme_from_dict(d: dict, manifold: Manifold, where: str = "scheme") -> SampleScheme:
    if not isinstance(d, dict):
        raise ConfigError("scheme must be a dict", where)
    try:
        return SampleScheme(
            n_pairs=int(d["n_pairs"]),
            s_grid=int(d["s_grid"]),
            rng_seed=int(d["rng_seed"]),
            sampler=sampler_from_dict(d["sampler"], manifold, where + ".sampler"),
            tol=float(d.get("tol", 1e-8)),
        )
    except KeyError as exc:
        raise ConfigError(f"scheme is missing {exc}", where)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scheme value: {exc}", where)
