"""Closed-form Riemannian kernels for three chart models.

All kernels work in ambient embedding coordinates: Cartesian vectors for the
flat chart, unit vectors in R^{n+1} for the open spherical cap, and
Minkowski-normalized vectors on the upper hyperboloid sheet.  Every operation
is pure; values are immutable after construction.  Tiny floating-point drift
off the embedded surface is re-projected, drift beyond
``Tolerances.reprojection_max`` raises :class:`NumericalDrift`.

The spherical cap is deliberately restricted to an open geodesic ball of
radius < pi/2 so that geodesics between any two chart points are unique and
extendable; motions that exit the cap raise :class:`OutOfChart` instead of
being clamped.  The hyperboloid is the nonpositively-curved (Hadamard)
instance: exp/log are global inverses there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    ChartMismatch,
    NumericalDrift,
    OutOfChart,
    TangencyViolation,
)

__all__ = [
    "Manifold",
    "Euclidean",
    "SphereCap",
    "Hyperboloid",
    "Point",
    "TangentVector",
    "GeodesicSegment",
    "exp_map",
    "log_map",
    "distance",
    "geodesic_eval",
    "geodesic_from_direction",
    "parallel_transport",
    "inverse_transport",
    "inner_product",
    "tangent_norm",
    "scale_tangent",
    "add_tangents",
    "zero_tangent",
    "manifold_from_dict",
]

_TINY = 1e-300


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


class Manifold:
    """Base chart model.  Subclasses provide vectorized raw-array kernels.

    Raw methods accept arrays whose last axis is the ambient dimension and
    broadcast over leading axes.  They perform no invariant checking; the
    wrapper operations below do.
    """

    kind: str = ""
    dim: int

    # -- embedding -----------------------------------------------------
    @property
    def ambient_dim(self) -> int:
        raise NotImplementedError

    def point_defect(self, x: np.ndarray) -> np.ndarray:
        """Distance of raw coordinates from the embedding constraint."""
        raise NotImplementedError

    def chart_defect(self, x: np.ndarray) -> np.ndarray:
        """> 0 when a (constraint-satisfying) point is outside the chart."""
        raise NotImplementedError

    def tangent_defect(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project_point(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project_tangent(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- metric --------------------------------------------------------
    def inner(self, x: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def norm(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        val = self.inner(x, v, v)
        return np.sqrt(np.clip(val, 0.0, None))

    # -- kernels ---------------------------------------------------------
    def exp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dist(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def transport_along(
        self,
        x: np.ndarray,
        v: np.ndarray,
        t0: float,
        t1: float,
        w: np.ndarray,
    ) -> np.ndarray:
        """Parallel transport of ``w`` along s -> exp(x, s v) from t0 to t1."""
        raise NotImplementedError

    def tangent_basis(self, x: np.ndarray) -> np.ndarray:
        """Rows: an orthonormal basis of the tangent space at ``x``."""
        raise NotImplementedError

    # -- conveniences ----------------------------------------------------
    def point(self, coords, project: bool = False, tol: Tolerances = DEFAULT_TOLERANCES) -> "Point":
        c = np.asarray(coords, dtype=float)
        if project:
            if c.shape != (self.ambient_dim,):
                raise OutOfChart(
                    f"expected {self.ambient_dim} coordinates on {self.kind}, got shape {c.shape}"
                )
            c = self.project_point(c)
        return Point(self, c, tol=tol)

    def tangent(self, base: "Point", comps, project: bool = False,
                tol: Tolerances = DEFAULT_TOLERANCES) -> "TangentVector":
        v = np.asarray(comps, dtype=float)
        if project:
            v = self.project_tangent(base.coords, v)
        return TangentVector(base, v, tol=tol)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Euclidean(Manifold):
    dim: int
    kind = "euclidean"

    def __post_init__(self):
        if self.dim < 1:
            raise OutOfChart("dim must be >= 1")

    @property
    def ambient_dim(self) -> int:
        return self.dim

    def point_defect(self, x):
        return np.zeros(x.shape[:-1])

    def chart_defect(self, x):
        return np.full(x.shape[:-1], -np.inf)

    def tangent_defect(self, x, v):
        return np.zeros(np.broadcast_shapes(x.shape[:-1], v.shape[:-1]))

    def project_point(self, x):
        return x

    def project_tangent(self, x, v):
        return v

    def inner(self, x, u, v):
        return _dot(u, v)

    def exp(self, x, v):
        return x + v

    def log(self, x, y):
        return y - x

    def dist(self, x, y):
        return np.linalg.norm(y - x, axis=-1)

    def transport_along(self, x, v, t0, t1, w):
        return w

    def tangent_basis(self, x):
        return np.eye(self.dim)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim}


@dataclass(frozen=True)
class SphereCap(Manifold):
    """Open geodesic ball of angular radius < pi/2 on the unit sphere S^dim."""

    dim: int
    cap_center: tuple = ()
    cap_radius: float = 1.2
    kind = "sphere_cap"

    def __post_init__(self):
        if self.dim < 1:
            raise OutOfChart("dim must be >= 1")
        if not (0.0 < self.cap_radius < math.pi / 2):
            raise OutOfChart("cap_radius must lie in (0, pi/2) for unique geodesics")
        c = np.asarray(self.cap_center, dtype=float)
        if c.shape != (self.dim + 1,):
            raise OutOfChart(
                f"cap_center needs {self.dim + 1} coordinates, got shape {c.shape}"
            )
        n = np.linalg.norm(c)
        if abs(n - 1.0) > 1e-9:
            raise OutOfChart("cap_center must be a unit vector")
        object.__setattr__(self, "cap_center", tuple(float(t) for t in c / n))

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    @property
    def center_array(self) -> np.ndarray:
        return np.asarray(self.cap_center, dtype=float)

    def point_defect(self, x):
        return np.abs(np.linalg.norm(x, axis=-1) - 1.0)

    def chart_defect(self, x):
        c = self.center_array
        cos_a = _dot(x, c)
        sin_a = np.linalg.norm(x - cos_a[..., None] * c, axis=-1)
        return np.arctan2(sin_a, cos_a) - self.cap_radius

    def tangent_defect(self, x, v):
        return np.abs(_dot(x, v))

    def project_point(self, x):
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    def project_tangent(self, x, v):
        return v - _dot(x, v)[..., None] * x

    def inner(self, x, u, v):
        return _dot(u, v)

    def exp(self, x, v):
        theta = np.linalg.norm(v, axis=-1, keepdims=True)
        # sinc(theta/pi) = sin(theta)/theta, finite at 0
        y = np.cos(theta) * x + np.sinc(theta / np.pi) * v
        return self.project_point(y)

    def log(self, x, y):
        cos_t = np.clip(_dot(x, y), -1.0, 1.0)[..., None]
        u = y - cos_t * x
        n = np.linalg.norm(u, axis=-1, keepdims=True)
        theta = np.arctan2(n, cos_t)
        factor = np.where(n > _TINY, theta / np.where(n > _TINY, n, 1.0), 1.0)
        return self.project_tangent(x, factor * u)

    def dist(self, x, y):
        cos_t = np.clip(_dot(x, y), -1.0, 1.0)
        sin_t = np.linalg.norm(y - cos_t[..., None] * x, axis=-1)
        return np.arctan2(sin_t, cos_t)

    def transport_along(self, x, v, t0, t1, w):
        speed = np.linalg.norm(v, axis=-1, keepdims=True)
        if np.all(speed < 1e-14):
            return w
        u = v / np.where(speed > _TINY, speed, 1.0)
        a0 = speed * t0
        a1 = speed * t1
        u_t0 = -np.sin(a0) * x + np.cos(a0) * u
        u_t1 = -np.sin(a1) * x + np.cos(a1) * u
        coeff = _dot(w, u_t0)[..., None]
        out = w + coeff * (u_t1 - u_t0)
        pos = np.cos(a1) * x + np.sin(a1) * u
        return self.project_tangent(self.project_point(pos), out)

    def tangent_basis(self, x):
        basis = []
        for i in range(self.ambient_dim):
            cand = np.zeros(self.ambient_dim)
            cand[i] = 1.0
            cand = cand - np.dot(x, cand) * x
            for b in basis:
                cand = cand - np.dot(b, cand) * b
            n = np.linalg.norm(cand)
            if n > 1e-6:
                basis.append(cand / n)
            if len(basis) == self.dim:
                break
        return np.array(basis)

    def to_dict(self):
        return {
            "kind": self.kind,
            "dim": self.dim,
            "cap_center": list(self.cap_center),
            "cap_radius": self.cap_radius,
        }


@dataclass(frozen=True)
class Hyperboloid(Manifold):
    """Upper sheet of <x,x>_M = -1 with the Minkowski form diag(1,..,1,-1).

    The timelike coordinate is the last one; chart points have positive last
    coordinate.  Complete, simply connected, curvature -1: the Hadamard model.
    """

    dim: int
    kind = "hyperboloid"

    def __post_init__(self):
        if self.dim < 1:
            raise OutOfChart("dim must be >= 1")

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    @property
    def signature(self) -> np.ndarray:
        sig = np.ones(self.ambient_dim)
        sig[-1] = -1.0
        return sig

    def minkowski(self, a, b):
        return np.sum(a * b * self.signature, axis=-1)

    def point_defect(self, x):
        return np.abs(self.minkowski(x, x) + 1.0)

    def chart_defect(self, x):
        # upper sheet: last coordinate must stay positive
        return -x[..., -1]

    def tangent_defect(self, x, v):
        return np.abs(self.minkowski(x, v))

    def project_point(self, x):
        q = -self.minkowski(x, x)
        scale = 1.0 / np.sqrt(np.clip(q, _TINY, None))
        return x * scale[..., None]

    def project_tangent(self, x, v):
        return v + self.minkowski(x, v)[..., None] * x

    def inner(self, x, u, v):
        return self.minkowski(u, v)

    def exp(self, x, v):
        sq = np.clip(self.minkowski(v, v), 0.0, None)
        theta = np.sqrt(sq)[..., None]
        factor = np.where(theta > _TINY, np.sinh(theta) / np.where(theta > _TINY, theta, 1.0), 1.0)
        y = np.cosh(theta) * x + factor * v
        return self.project_point(y)

    def log(self, x, y):
        c = -self.minkowski(x, y)[..., None]
        u = y - c * x
        n = np.sqrt(np.clip(self.minkowski(u, u), 0.0, None))[..., None]
        theta = np.arcsinh(n)
        factor = np.where(n > _TINY, theta / np.where(n > _TINY, n, 1.0), 1.0)
        return self.project_tangent(x, factor * u)

    def dist(self, x, y):
        c = -self.minkowski(x, y)[..., None]
        u = y - c * x
        n = np.sqrt(np.clip(self.minkowski(u, u), 0.0, None))
        return np.arcsinh(n)

    def transport_along(self, x, v, t0, t1, w):
        speed = np.sqrt(np.clip(self.minkowski(v, v), 0.0, None))[..., None]
        if np.all(speed < 1e-14):
            return w
        u = v / np.where(speed > _TINY, speed, 1.0)
        a0 = speed * t0
        a1 = speed * t1
        u_t0 = np.sinh(a0) * x + np.cosh(a0) * u
        u_t1 = np.sinh(a1) * x + np.cosh(a1) * u
        coeff = self.minkowski(w, u_t0)[..., None]
        out = w + coeff * (u_t1 - u_t0)
        pos = np.cosh(a1) * x + np.sinh(a1) * u
        return self.project_tangent(self.project_point(pos), out)

    def tangent_basis(self, x):
        basis = []
        for i in range(self.ambient_dim):
            cand = np.zeros(self.ambient_dim)
            cand[i] = 1.0
            cand = cand + self.minkowski(x, cand) * x
            for b in basis:
                cand = cand - self.minkowski(b, cand) * b
            sq = self.minkowski(cand, cand)
            if sq > 1e-12:
                basis.append(cand / math.sqrt(sq))
            if len(basis) == self.dim:
                break
        return np.array(basis)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim}


def manifold_from_dict(d: dict) -> Manifold:
    kind = d.get("kind")
    if kind == "euclidean":
        return Euclidean(dim=int(d["dim"]))
    if kind == "sphere_cap":
        return SphereCap(
            dim=int(d["dim"]),
            cap_center=tuple(d["cap_center"]),
            cap_radius=float(d["cap_radius"]),
        )
    if kind == "hyperboloid":
        return Hyperboloid(dim=int(d["dim"]))
    raise OutOfChart(f"unknown manifold kind {kind!r}")


# ---------------------------------------------------------------------------
# wrapped values


@dataclass(frozen=True, eq=False)
class Point:
    """A location on a chart, validated against the embedding invariants."""

    manifold: Manifold
    coords: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False, compare=False)

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        man = self.manifold
        if c.shape != (man.ambient_dim,):
            raise OutOfChart(
                f"expected {man.ambient_dim} coordinates on {man.kind}, got shape {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise OutOfChart("non-finite coordinates")
        defect = float(man.point_defect(c))
        if defect > self.tol.point_invariant:
            raise OutOfChart(
                f"point violates {man.kind} embedding constraint by {defect:.3e}"
            )
        if float(man.chart_defect(c)) >= 0.0:
            raise OutOfChart(f"point lies outside the {man.kind} chart")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __eq__(self, other):
        return (
            isinstance(other, Point)
            and self.manifold == other.manifold
            and np.array_equal(self.coords, other.coords)
        )

    def __repr__(self):
        return f"Point({self.manifold.kind}, {list(self.coords)})"


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A vector in the tangent space at ``base``."""

    base: Point
    comps: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.comps, dtype=float)
        man = self.base.manifold
        if v.shape != (man.ambient_dim,):
            raise TangencyViolation(
                f"expected {man.ambient_dim} components, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise TangencyViolation("non-finite components")
        defect = float(man.tangent_defect(self.base.coords, v))
        if defect > self.tol.tangency:
            raise TangencyViolation(
                f"vector fails {man.kind} tangency by {defect:.3e}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "comps", v)

    @property
    def manifold(self) -> Manifold:
        return self.base.manifold

    def norm(self) -> float:
        return float(self.manifold.norm(self.base.coords, self.comps))

    def __eq__(self, other):
        return (
            isinstance(other, TangentVector)
            and self.base == other.base
            and np.array_equal(self.comps, other.comps)
        )

    def __repr__(self):
        return f"TangentVector(at {list(self.base.coords)}, {list(self.comps)})"


@dataclass(frozen=True, eq=False)
class GeodesicSegment:
    """The geodesic s -> exp(start, s * velocity), parameterized on [0, 1]."""

    start: Point
    velocity: TangentVector

    def __post_init__(self):
        if self.velocity.base != self.start:
            raise TangencyViolation("segment velocity is not based at its start point")

    def point_at(self, s: float) -> Point:
        return exp_map(self.start, scale_tangent(self.velocity, s))

    def speed(self) -> float:
        return self.velocity.norm()


# ---------------------------------------------------------------------------
# wrapped operations


def _require_same_chart(a: Point, b: Point) -> Manifold:
    if a.manifold != b.manifold:
        raise ChartMismatch(f"{a.manifold.kind} point paired with {b.manifold.kind} point")
    return a.manifold


def _require_based(v: TangentVector, p: Point) -> None:
    if v.base.manifold != p.manifold:
        raise ChartMismatch("tangent vector lives on a different chart")
    if not np.array_equal(v.base.coords, p.coords):
        raise TangencyViolation("tangent vector is not based at the given point")


def _clean_point(man: Manifold, raw: np.ndarray, tol: Tolerances) -> np.ndarray:
    defect = float(man.point_defect(raw))
    if defect > tol.reprojection_max:
        raise NumericalDrift(
            f"{man.kind} point drifted {defect:.3e} off the embedding (> {tol.reprojection_max})"
        )
    return man.project_point(raw)


def _clean_tangent(man: Manifold, base: np.ndarray, raw: np.ndarray, tol: Tolerances) -> np.ndarray:
    defect = float(man.tangent_defect(base, raw))
    if defect > tol.reprojection_max:
        raise NumericalDrift(
            f"{man.kind} tangent drifted {defect:.3e} off tangency (> {tol.reprojection_max})"
        )
    return man.project_tangent(base, raw)


def exp_map(p: Point, v: TangentVector, tol: Tolerances = DEFAULT_TOLERANCES) -> Point:
    """Endpoint of the geodesic leaving ``p`` with initial velocity ``v``.

    On the spherical cap the speed must stay below pi (unique-geodesic
    regime) and the endpoint must stay inside the cap; violations raise
    :class:`OutOfChart` rather than clamping.
    """
    _require_based(v, p)
    man = p.manifold
    if isinstance(man, SphereCap):
        speed = float(man.norm(p.coords, v.comps))
        if speed >= math.pi:
            raise OutOfChart(f"velocity of length {speed:.6f} >= pi leaves the unique-geodesic regime")
    raw = man.exp(p.coords, v.comps)
    cleaned = _clean_point(man, raw, tol)
    if float(man.chart_defect(cleaned)) >= 0.0:
        raise OutOfChart(f"geodesic endpoint leaves the {man.kind} chart")
    return Point(man, cleaned, tol=tol)


def log_map(p: Point, q: Point, tol: Tolerances = DEFAULT_TOLERANCES) -> TangentVector:
    """The initial velocity at ``p`` of the geodesic reaching ``q`` at time 1."""
    man = _require_same_chart(p, q)
    raw = man.log(p.coords, q.coords)
    cleaned = _clean_tangent(man, p.coords, raw, tol)
    return TangentVector(p, cleaned, tol=tol)


def distance(p: Point, q: Point) -> float:
    man = _require_same_chart(p, q)
    return float(man.dist(p.coords, q.coords))


def geodesic_from_direction(p: Point, v: TangentVector) -> GeodesicSegment:
    _require_based(v, p)
    return GeodesicSegment(p, v)


def geodesic_eval(seg: GeodesicSegment, s: float) -> Point:
    """Evaluate the segment at parameter ``s`` (contract domain: [0, 1])."""
    return seg.point_at(s)


def parallel_transport(
    v: TangentVector,
    seg: GeodesicSegment,
    s: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> TangentVector:
    """Transport ``v`` (based at the segment start) to the point seg(s)."""
    _require_based(v, seg.start)
    man = seg.start.manifold
    dest = seg.point_at(s)
    raw = man.transport_along(seg.start.coords, seg.velocity.comps, 0.0, s, v.comps)
    cleaned = _clean_tangent(man, dest.coords, raw, tol)
    return TangentVector(dest, cleaned, tol=tol)


def inverse_transport(
    v: TangentVector,
    seg: GeodesicSegment,
    s: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> TangentVector:
    """Transport ``v`` (based at seg(s)) back to the segment start."""
    man = seg.start.manifold
    if v.base.manifold != man:
        raise ChartMismatch("tangent vector lives on a different chart")
    src = seg.point_at(s)
    if not np.allclose(v.base.coords, src.coords, rtol=0.0, atol=1e-9):
        raise TangencyViolation("tangent vector is not based at seg(s)")
    raw = man.transport_along(seg.start.coords, seg.velocity.comps, s, 0.0, v.comps)
    cleaned = _clean_tangent(man, seg.start.coords, raw, tol)
    return TangentVector(seg.start, cleaned, tol=tol)


# ---------------------------------------------------------------------------
# tangent-space arithmetic


def inner_product(u: TangentVector, v: TangentVector) -> float:
    if u.base != v.base:
        raise TangencyViolation("inner product needs a common base point")
    return float(u.manifold.inner(u.base.coords, u.comps, v.comps))


def tangent_norm(v: TangentVector) -> float:
    return v.norm()


def scale_tangent(v: TangentVector, c: float) -> TangentVector:
    return TangentVector(v.base, c * v.comps, tol=v.tol)


def add_tangents(u: TangentVector, v: TangentVector) -> TangentVector:
    if u.base != v.base:
        raise TangencyViolation("tangent sum needs a common base point")
    return TangentVector(u.base, u.comps + v.comps, tol=u.tol)


def zero_tangent(p: Point) -> TangentVector:
    return TangentVector(p, np.zeros(p.manifold.ambient_dim))
