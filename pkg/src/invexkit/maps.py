"""Descriptor catalog: point maps, direction bi-maps, scalar fields, sets.

Scenarios are assembled from a small closed vocabulary instead of arbitrary
user code, which keeps every run serializable and every counterexample
replayable.  Each descriptor (de)serializes to a ``{"kind": ...}`` dict; the
embedded points inside a descriptor are bound to a chart at parse time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ChartMismatch, ConfigError, NonDifferentiable
from .geometry import (
    Euclidean,
    Hyperboloid,
    Manifold,
    Point,
    SphereCap,
    TangentVector,
    add_tangents,
    distance,
    exp_map,
    log_map,
    scale_tangent,
    zero_tangent,
)

__all__ = [
    "PointMap",
    "IdentityMap",
    "ConstantMap",
    "GeodesicContraction",
    "CoordinateAffine",
    "BiMap",
    "LogBased",
    "ScaledLog",
    "EuclideanDifference",
    "CustomTable",
    "MapTriple",
    "identity_triple",
    "ScalarField",
    "SquaredDistance",
    "DistanceTo",
    "LinearHeight",
    "Negated",
    "Offset",
    "WeightedSum",
    "MinOf",
    "IndicatorExtended",
    "SetPredicate",
    "MetricBall",
    "Sublevel",
    "FiniteUnion",
    "eval_point_map",
    "eval_bimap",
    "eval_scalar",
    "eval_differential",
    "finite_difference_gradient",
    "point_map_from_dict",
    "bimap_from_dict",
    "scalar_field_from_dict",
    "set_predicate_from_dict",
]


def _coords(point: Point) -> list:
    return [float(t) for t in point.coords]


# ---------------------------------------------------------------------------
# point -> point maps


class PointMap:
    kind: str = ""

    def __call__(self, x: Point) -> Point:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class IdentityMap(PointMap):
    kind = "identity"

    def __call__(self, x: Point) -> Point:
        return x

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=False)
class ConstantMap(PointMap):
    value: Point
    kind = "constant"

    def __call__(self, x: Point) -> Point:
        if x.manifold != self.value.manifold:
            raise ChartMismatch("constant map applied on a different chart")
        return self.value

    def to_dict(self):
        return {"kind": self.kind, "point": _coords(self.value)}


@dataclass(frozen=True, eq=False)
class GeodesicContraction(PointMap):
    """x -> exp_center(factor * log_center(x)); factor in [0, 1]."""

    center: Point
    factor: float
    kind = "geodesic_contraction"

    def __post_init__(self):
        if not 0.0 <= self.factor <= 1.0:
            raise ConfigError(f"contraction factor {self.factor} outside [0, 1]")

    def __call__(self, x: Point) -> Point:
        return exp_map(self.center, scale_tangent(log_map(self.center, x), self.factor))

    def to_dict(self):
        return {"kind": self.kind, "center": _coords(self.center), "factor": self.factor}


@dataclass(frozen=True, eq=False)
class CoordinateAffine(PointMap):
    """x -> A x + b on the flat chart only."""

    matrix: tuple
    offset: tuple
    kind = "coordinate_affine"

    def __call__(self, x: Point) -> Point:
        if not isinstance(x.manifold, Euclidean):
            raise ChartMismatch("coordinate_affine is defined on the flat chart only")
        a = np.asarray(self.matrix, dtype=float)
        b = np.asarray(self.offset, dtype=float)
        return Point(x.manifold, a @ x.coords + b)

    def to_dict(self):
        return {
            "kind": self.kind,
            "matrix": [list(map(float, row)) for row in self.matrix],
            "offset": [float(t) for t in self.offset],
        }


# ---------------------------------------------------------------------------
# (point, point) -> tangent direction maps


class BiMap:
    """Direction map: outputs the initial velocity, tangent at the second
    argument, of the motion from the second argument toward the first."""

    kind: str = ""

    def __call__(self, a: Point, b: Point) -> TangentVector:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class LogBased(BiMap):
    kind = "log_based"

    def __call__(self, a: Point, b: Point) -> TangentVector:
        return log_map(b, a)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class ScaledLog(BiMap):
    factor: float
    kind = "scaled_log"

    def __call__(self, a: Point, b: Point) -> TangentVector:
        return scale_tangent(log_map(b, a), self.factor)

    def to_dict(self):
        return {"kind": self.kind, "factor": self.factor}


@dataclass(frozen=True)
class EuclideanDifference(BiMap):
    kind = "euclidean_difference"

    def __call__(self, a: Point, b: Point) -> TangentVector:
        if not isinstance(b.manifold, Euclidean):
            raise ChartMismatch("euclidean_difference is defined on the flat chart only")
        if a.manifold != b.manifold:
            raise ChartMismatch("direction map arguments live on different charts")
        return TangentVector(b, a.coords - b.coords)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=False)
class CustomTable(BiMap):
    """Finite lookup table for deliberately pathological directions.

    Entries match by coordinates within ``match_tol``; a lookup outside the
    table is a configuration error.
    """

    entries: tuple  # of (first_coords, second_coords, components) arrays
    match_tol: float = 1e-9
    kind = "custom_table"

    def __call__(self, a: Point, b: Point) -> TangentVector:
        for first, second, comps in self.entries:
            if (
                np.allclose(a.coords, first, rtol=0.0, atol=self.match_tol)
                and np.allclose(b.coords, second, rtol=0.0, atol=self.match_tol)
            ):
                return TangentVector(b, np.asarray(comps, dtype=float))
        raise ConfigError(
            f"custom_table has no entry for pair ({list(a.coords)}, {list(b.coords)})"
        )

    def to_dict(self):
        return {
            "kind": self.kind,
            "match_tol": self.match_tol,
            "entries": [
                {
                    "first": [float(t) for t in first],
                    "second": [float(t) for t in second],
                    "tangent": [float(t) for t in comps],
                }
                for first, second, comps in self.entries
            ],
        }


@dataclass(frozen=True, eq=False)
class MapTriple:
    """The two point maps and the direction map used by every checker.

    ``target`` is applied to the first point of each sampled pair, ``base``
    to the second; directions live in the tangent space at the base image.
    """

    target: PointMap
    base: PointMap
    direction: BiMap

    def to_dict(self):
        return {
            "target": self.target.to_dict(),
            "base": self.base.to_dict(),
            "direction": self.direction.to_dict(),
        }


def identity_triple(direction: BiMap) -> MapTriple:
    return MapTriple(IdentityMap(), IdentityMap(), direction)


# ---------------------------------------------------------------------------
# scalar fields


class ScalarField:
    """Extended-real objective with an optional analytic gradient.

    ``lsc`` records lower semicontinuity; the catalog descriptors are all
    lsc by construction (indicator domains are closed), but a scenario may
    declare the flag explicitly to exercise premise guards.
    """

    kind: str = ""
    _lsc_override = None

    @property
    def lsc(self) -> bool:
        if self._lsc_override is not None:
            return self._lsc_override
        return self._lsc_default()

    def _lsc_default(self) -> bool:
        return True

    def declare_lsc(self, flag: bool) -> "ScalarField":
        object.__setattr__(self, "_lsc_override", bool(flag))
        return self

    def value(self, x: Point) -> float:
        raise NotImplementedError

    def gradient(self, x: Point) -> TangentVector:
        raise NonDifferentiable(f"{self.kind} has no analytic gradient")

    @property
    def has_gradient(self) -> bool:
        return True

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class SquaredDistance(ScalarField):
    center: Point
    kind = "squared_distance"

    def value(self, x: Point) -> float:
        return distance(x, self.center) ** 2

    def gradient(self, x: Point) -> TangentVector:
        return scale_tangent(log_map(x, self.center), -2.0)

    def to_dict(self):
        return {"kind": self.kind, "center": _coords(self.center)}


@dataclass(frozen=True, eq=False)
class DistanceTo(ScalarField):
    center: Point
    kind = "distance"

    def value(self, x: Point) -> float:
        return distance(x, self.center)

    def gradient(self, x: Point) -> TangentVector:
        d = distance(x, self.center)
        if d < 1e-12:
            raise NonDifferentiable("distance field has no gradient at its center")
        return scale_tangent(log_map(x, self.center), -1.0 / d)

    def to_dict(self):
        return {"kind": self.kind, "center": _coords(self.center)}


@dataclass(frozen=True, eq=False)
class LinearHeight(ScalarField):
    """Last ambient coordinate on the hyperboloid; <x, vector> elsewhere."""

    vector: tuple = ()
    kind = "linear_height"

    def value(self, x: Point) -> float:
        if isinstance(x.manifold, Hyperboloid):
            return float(x.coords[-1])
        if not self.vector:
            raise ConfigError("linear_height needs a fixed vector off the hyperboloid")
        return float(np.dot(x.coords, np.asarray(self.vector, dtype=float)))

    def gradient(self, x: Point) -> TangentVector:
        man = x.manifold
        if isinstance(man, Hyperboloid):
            e_last = np.zeros(man.ambient_dim)
            e_last[-1] = 1.0
            return TangentVector(x, float(x.coords[-1]) * x.coords - e_last)
        w = np.asarray(self.vector, dtype=float)
        if isinstance(man, SphereCap):
            return TangentVector(x, w - float(np.dot(x.coords, w)) * x.coords)
        return TangentVector(x, w)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.vector:
            d["vector"] = [float(t) for t in self.vector]
        return d


@dataclass(frozen=True, eq=False)
class Negated(ScalarField):
    inner: ScalarField
    kind = "negated"

    def _lsc_default(self):  # -f is lsc only when f is continuous; catalog fields are
        return self.inner.lsc

    def value(self, x: Point) -> float:
        return -self.inner.value(x)

    def gradient(self, x: Point) -> TangentVector:
        return scale_tangent(self.inner.gradient(x), -1.0)

    @property
    def has_gradient(self):
        return self.inner.has_gradient

    def to_dict(self):
        return {"kind": self.kind, "inner": self.inner.to_dict()}


@dataclass(frozen=True, eq=False)
class Offset(ScalarField):
    inner: ScalarField
    shift: float
    kind = "offset"

    def value(self, x: Point) -> float:
        return self.inner.value(x) + self.shift

    def gradient(self, x: Point) -> TangentVector:
        return self.inner.gradient(x)

    @property
    def has_gradient(self):
        return self.inner.has_gradient

    def to_dict(self):
        return {"kind": self.kind, "inner": self.inner.to_dict(), "shift": self.shift}


@dataclass(frozen=True, eq=False)
class WeightedSum(ScalarField):
    """Nonnegative combination sum_i weight_i * field_i.

    Zero-weight terms are skipped entirely, so a (0, f) term neither
    evaluates f nor propagates its kinks.
    """

    terms: tuple  # of (weight, ScalarField)
    kind = "weighted_sum"

    def __post_init__(self):
        for w, _ in self.terms:
            if w < 0.0:
                raise ConfigError(f"weighted_sum weight {w} must be nonnegative")

    def value(self, x: Point) -> float:
        total = 0.0
        for w, f in self.terms:
            if w == 0.0:
                continue
            total += w * f.value(x)
        return total

    def gradient(self, x: Point) -> TangentVector:
        out = zero_tangent(x)
        for w, f in self.terms:
            if w == 0.0:
                continue
            out = add_tangents(out, scale_tangent(f.gradient(x), w))
        return out

    @property
    def has_gradient(self):
        return all(f.has_gradient for w, f in self.terms if w != 0.0)

    def to_dict(self):
        return {
            "kind": self.kind,
            "terms": [{"weight": float(w), "field": f.to_dict()} for w, f in self.terms],
        }


@dataclass(frozen=True, eq=False)
class MinOf(ScalarField):
    """Pointwise minimum; the gradient follows the active branch (ties pick
    the first), so it is defined away from the switching locus."""

    first: ScalarField
    second: ScalarField
    kind = "min_of"

    def value(self, x: Point) -> float:
        return min(self.first.value(x), self.second.value(x))

    def gradient(self, x: Point) -> TangentVector:
        if self.first.value(x) <= self.second.value(x):
            return self.first.gradient(x)
        return self.second.gradient(x)

    def to_dict(self):
        return {"kind": self.kind, "first": self.first.to_dict(), "second": self.second.to_dict()}


@dataclass(frozen=True, eq=False)
class IndicatorExtended(ScalarField):
    """inner(x) on the domain, +inf outside: the (-inf, inf]-valued wrapper."""

    inner: ScalarField
    domain: "SetPredicate"
    kind = "indicator_extended"

    def value(self, x: Point) -> float:
        if self.domain.violation(x) > 0.0:
            return math.inf
        return self.inner.value(x)

    def gradient(self, x: Point) -> TangentVector:
        if self.domain.violation(x) > 0.0:
            raise NonDifferentiable("point outside the indicator domain")
        return self.inner.gradient(x)

    @property
    def has_gradient(self):
        return self.inner.has_gradient

    def to_dict(self):
        return {
            "kind": self.kind,
            "inner": self.inner.to_dict(),
            "domain": self.domain.to_dict(),
        }


# ---------------------------------------------------------------------------
# set predicates


class SetPredicate:
    """Region with an exact, signed membership margin.

    ``violation(x) <= 0`` means x belongs to the region; positive values
    measure how badly the point misses it.
    """

    kind: str = ""

    def violation(self, x: Point) -> float:
        raise NotImplementedError

    def contains(self, x: Point) -> bool:
        return self.violation(x) <= 0.0

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class MetricBall(SetPredicate):
    center: Point
    radius: float
    kind = "metric_ball"

    def violation(self, x: Point) -> float:
        return distance(x, self.center) - self.radius

    def to_dict(self):
        return {"kind": self.kind, "center": _coords(self.center), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Sublevel(SetPredicate):
    field: ScalarField
    level: float
    kind = "sublevel"

    def violation(self, x: Point) -> float:
        return self.field.value(x) - self.level

    def to_dict(self):
        return {"kind": self.kind, "field": self.field.to_dict(), "level": self.level}


@dataclass(frozen=True, eq=False)
class FiniteUnion(SetPredicate):
    members: tuple
    kind = "finite_union"

    def violation(self, x: Point) -> float:
        return min(m.violation(x) for m in self.members)

    def to_dict(self):
        return {"kind": self.kind, "members": [m.to_dict() for m in self.members]}


# ---------------------------------------------------------------------------
# evaluation entry points


def eval_point_map(m: PointMap, x: Point) -> Point:
    return m(x)


def eval_bimap(g: BiMap, a: Point, b: Point) -> TangentVector:
    if a.manifold != b.manifold:
        raise ChartMismatch("direction map arguments live on different charts")
    return g(a, b)


def eval_scalar(h: ScalarField, x: Point) -> float:
    return h.value(x)


def finite_difference_gradient(
    h: ScalarField, x: Point, step: float = DEFAULT_TOLERANCES.fd_step
) -> TangentVector:
    """Chart-free central differences along geodesic probes.

    Probes are exp_x(+-step e_i) over an orthonormal tangent basis, so the
    same code serves all three chart models.
    """
    man = x.manifold
    basis = man.tangent_basis(x.coords)
    comps = np.zeros(man.ambient_dim)
    for row in basis:
        t = TangentVector(x, row)
        f_plus = h.value(exp_map(x, scale_tangent(t, step)))
        f_minus = h.value(exp_map(x, scale_tangent(t, -step)))
        if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
            raise NonDifferentiable("finite-difference probe left the domain")
        comps += ((f_plus - f_minus) / (2.0 * step)) * row
    return TangentVector(x, man.project_tangent(x.coords, comps))


def eval_differential(
    h: ScalarField,
    x: Point,
    fd_fallback: bool = True,
    step: float = DEFAULT_TOLERANCES.fd_step,
) -> TangentVector:
    """Metric gradient of ``h`` at ``x``: the tangent g with dH_x(v) = <g, v>.

    Analytic gradients raise :class:`NonDifferentiable` at genuine kinks
    (e.g. the distance field at its center); that propagates, because
    central differences would silently average across the kink.  The
    finite-difference fallback serves fields with no analytic gradient.
    """
    if h.has_gradient:
        return h.gradient(x)
    if not fd_fallback:
        raise NonDifferentiable(f"{h.kind} has no analytic gradient and fallback is off")
    return finite_difference_gradient(h, x, step=step)


# ---------------------------------------------------------------------------
# descriptor parsing


def _parse_point(data, manifold: Manifold, where: str) -> Point:
    try:
        coords = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad coordinates: {exc}", where)
    if coords.shape != (manifold.ambient_dim,):
        raise ConfigError(
            f"expected {manifold.ambient_dim} coordinates, got shape {coords.shape}", where
        )
    defect = float(manifold.point_defect(coords))
    if defect > 1e-6:
        raise ConfigError(
            f"coordinates violate the {manifold.kind} embedding by {defect:.3e}", where
        )
    try:
        return manifold.point(coords, project=True)
    except Exception as exc:  # noqa: BLE001 - surface as config diagnostics
        raise ConfigError(str(exc), where)


def _require_kind(d, where: str) -> str:
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("descriptor must be a dict with a 'kind' key", where)
    return d["kind"]


def point_map_from_dict(d: dict, manifold: Manifold, where: str = "point_map") -> PointMap:
    kind = _require_kind(d, where)
    if kind == "identity":
        return IdentityMap()
    if kind == "constant":
        return ConstantMap(_parse_point(d.get("point"), manifold, where + ".point"))
    if kind == "geodesic_contraction":
        try:
            factor = float(d["factor"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("geodesic_contraction needs a numeric 'factor'", where)
        return GeodesicContraction(
            _parse_point(d.get("center"), manifold, where + ".center"), factor
        )
    if kind == "coordinate_affine":
        try:
            matrix = tuple(tuple(float(v) for v in row) for row in d["matrix"])
            offset = tuple(float(v) for v in d["offset"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("coordinate_affine needs 'matrix' and 'offset'", where)
        return CoordinateAffine(matrix, offset)
    raise ConfigError(f"unknown point map kind {kind!r}", where)


def bimap_from_dict(d: dict, manifold: Manifold, where: str = "direction") -> BiMap:
    kind = _require_kind(d, where)
    if kind == "log_based":
        return LogBased()
    if kind == "scaled_log":
        try:
            return ScaledLog(float(d["factor"]))
        except (KeyError, TypeError, ValueError):
            raise ConfigError("scaled_log needs a numeric 'factor'", where)
    if kind == "euclidean_difference":
        return EuclideanDifference()
    if kind == "custom_table":
        entries = []
        for i, e in enumerate(d.get("entries", [])):
            try:
                entries.append(
                    (
                        np.asarray(e["first"], dtype=float),
                        np.asarray(e["second"], dtype=float),
                        np.asarray(e["tangent"], dtype=float),
                    )
                )
            except (KeyError, TypeError, ValueError):
                raise ConfigError(
                    "table entry needs 'first', 'second', 'tangent'",
                    f"{where}.entries[{i}]",
                )
        return CustomTable(tuple(entries), match_tol=float(d.get("match_tol", 1e-9)))
    raise ConfigError(f"unknown direction map kind {kind!r}", where)


def scalar_field_from_dict(d: dict, manifold: Manifold, where: str = "field") -> ScalarField:
    return _apply_lsc_flag(_scalar_field_from_dict(d, manifold, where), d)


def _scalar_field_from_dict(d: dict, manifold: Manifold, where: str) -> ScalarField:
    kind = _require_kind(d, where)
    if kind == "squared_distance":
        return SquaredDistance(_parse_point(d.get("center"), manifold, where + ".center"))
    if kind == "distance":
        return DistanceTo(_parse_point(d.get("center"), manifold, where + ".center"))
    if kind == "linear_height":
        vec = d.get("vector")
        return LinearHeight(tuple(float(v) for v in vec) if vec else ())
    if kind == "negated":
        return Negated(scalar_field_from_dict(d.get("inner"), manifold, where + ".inner"))
    if kind == "offset":
        try:
            shift = float(d["shift"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("offset needs a numeric 'shift'", where)
        return Offset(scalar_field_from_dict(d.get("inner"), manifold, where + ".inner"), shift)
    if kind == "weighted_sum":
        terms = []
        for i, t in enumerate(d.get("terms", [])):
            try:
                w = float(t["weight"])
            except (KeyError, TypeError, ValueError):
                raise ConfigError("term needs a numeric 'weight'", f"{where}.terms[{i}]")
            terms.append(
                (w, scalar_field_from_dict(t.get("field"), manifold, f"{where}.terms[{i}].field"))
            )
        return WeightedSum(tuple(terms))
    if kind == "min_of":
        return MinOf(
            scalar_field_from_dict(d.get("first"), manifold, where + ".first"),
            scalar_field_from_dict(d.get("second"), manifold, where + ".second"),
        )
    if kind == "indicator_extended":
        return IndicatorExtended(
            scalar_field_from_dict(d.get("inner"), manifold, where + ".inner"),
            set_predicate_from_dict(d.get("domain"), manifold, where + ".domain"),
        )
    raise ConfigError(f"unknown scalar field kind {kind!r}", where)


def _apply_lsc_flag(field: ScalarField, d: dict) -> ScalarField:
    if isinstance(d, dict) and "lsc" in d:
        field.declare_lsc(bool(d["lsc"]))
    return field


def set_predicate_from_dict(d: dict, manifold: Manifold, where: str = "set") -> SetPredicate:
    kind = _require_kind(d, where)
    if kind == "metric_ball":
        try:
            radius = float(d["radius"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("metric_ball needs a numeric 'radius'", where)
        return MetricBall(_parse_point(d.get("center"), manifold, where + ".center"), radius)
    if kind == "sublevel":
        try:
            level = float(d["level"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("sublevel needs a numeric 'level'", where)
        return Sublevel(scalar_field_from_dict(d.get("field"), manifold, where + ".field"), level)
    if kind == "finite_union":
        members = d.get("members", [])
        if not members:
            raise ConfigError("finite_union needs at least one member", where)
        return FiniteUnion(
            tuple(
                set_predicate_from_dict(m, manifold, f"{where}.members[{i}]")
                for i, m in enumerate(members)
            )
        )
    raise ConfigError(f"unknown set predicate kind {kind!r}", where)
