"""Kernel tests: closed forms vs independent ODE/quadrature oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invexkit.errors import (
    ChartMismatch,
    OutOfChart,
    TangencyViolation,
)
from invexkit.geometry import (
    Euclidean,
    GeodesicSegment,
    Hyperboloid,
    Point,
    SphereCap,
    distance,
    exp_map,
    geodesic_eval,
    inner_product,
    inverse_transport,
    log_map,
    parallel_transport,
    scale_tangent,
    zero_tangent,
)

from oracles import integrate_geodesic, integrate_transport, curve_length

# cap centered halfway between the north pole and (1,0,0): both test points
# sit at angle pi/4 from the center, well inside radius 1.55 < pi/2
WIDE_CAP = SphereCap(2, tuple(np.array([1.0, 0.0, 1.0]) / math.sqrt(2)), 1.55)
POLAR_CAP = SphereCap(2, (0.0, 0.0, 1.0), 0.9)
H2 = Hyperboloid(2)
E2 = Euclidean(2)


def _rand_hyper_point(rng, spread=1.0):
    sp = spread * rng.normal(size=2)
    last = math.sqrt(1.0 + sp @ sp)
    return H2.point([sp[0], sp[1], last])


def _rand_cap_point(rng, cap=POLAR_CAP, radius=0.7):
    center = cap.point(cap.center_array)
    v = cap.project_tangent(center.coords, rng.normal(size=3))
    n = np.linalg.norm(v)
    r = radius * rng.random()
    return exp_map(center, cap.tangent(center, v * (r / n)))


class TestPointInvariants:
    def test_sphere_point_norm_enforced(self):
        with pytest.raises(OutOfChart):
            WIDE_CAP.point([0.0, 0.0, 1.0 + 1e-6])

    def test_sphere_cap_membership_enforced(self):
        with pytest.raises(OutOfChart):
            POLAR_CAP.point([1.0, 0.0, 0.0])  # angle pi/2 > 0.9

    def test_hyperboloid_sheet_enforced(self):
        with pytest.raises(OutOfChart):
            H2.point([0.0, 0.0, -1.0])
        with pytest.raises(OutOfChart):
            H2.point([0.1, 0.0, 1.0])  # Minkowski defect

    def test_tangency_enforced(self):
        apex = H2.point([0.0, 0.0, 1.0])
        with pytest.raises(TangencyViolation):
            H2.tangent(apex, [0.0, 0.0, 0.5])
        north = POLAR_CAP.point([0.0, 0.0, 1.0])
        with pytest.raises(TangencyViolation):
            POLAR_CAP.tangent(north, [0.0, 0.1, 0.2])

    def test_cap_radius_bound(self):
        with pytest.raises(OutOfChart):
            SphereCap(2, (0.0, 0.0, 1.0), math.pi / 2)

    def test_coords_read_only(self):
        p = E2.point([1.0, 2.0])
        with pytest.raises(ValueError):
            p.coords[0] = 5.0


class TestExpMap:
    def test_euclidean_is_addition(self):
        p = E2.point([1.0, 2.0])
        v = E2.tangent(p, [0.5, -1.0])
        assert np.allclose(exp_map(p, v).coords, [1.5, 1.0])

    def test_sphere_quarter_turn(self):
        # frozen oracle: RK4 geodesic ODE gives (1, 0, 2.98e-14)
        p = WIDE_CAP.point([0.0, 0.0, 1.0])
        v = WIDE_CAP.tangent(p, [math.pi / 2, 0.0, 0.0])
        got = exp_map(p, v).coords
        assert np.abs(got - np.array([1.0, 0.0, 0.0])).max() < 1e-12
        oracle, _ = integrate_geodesic("sphere", p.coords, v.comps)
        assert np.abs(got - oracle).max() < 1e-12

    def test_zero_velocity_fixed_point(self):
        for man, coords in [
            (E2, [0.3, -0.7]),
            (POLAR_CAP, [0.0, 0.0, 1.0]),
            (H2, [0.0, 0.0, 1.0]),
        ]:
            p = man.point(coords)
            assert exp_map(p, zero_tangent(p)) == p

    def test_hyperboloid_exp_matches_ode_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            p = _rand_hyper_point(rng)
            v = H2.tangent(p, rng.normal(size=3), project=True)
            v = scale_tangent(v, 1.2 / max(v.norm(), 1.2))  # RK4 oracle accuracy regime
            got = exp_map(p, v).coords
            oracle, _ = integrate_geodesic("hyperboloid", p.coords, v.comps, steps=4000)
            assert np.abs(got - oracle).max() < 1e-11

    def test_sphere_cap_exit_raises(self):
        p = POLAR_CAP.point([0.0, 0.0, 1.0])
        v = POLAR_CAP.tangent(p, [1.2, 0.0, 0.0])  # 1.2 > cap radius 0.9
        with pytest.raises(OutOfChart):
            exp_map(p, v)

    def test_sphere_speed_cap(self):
        p = POLAR_CAP.point([0.0, 0.0, 1.0])
        v = POLAR_CAP.tangent(p, [3.5, 0.0, 0.0])
        with pytest.raises(OutOfChart):
            exp_map(p, v)

    def test_base_point_mismatch(self):
        p = E2.point([0.0, 0.0])
        q = E2.point([1.0, 0.0])
        v = E2.tangent(q, [1.0, 0.0])
        with pytest.raises(TangencyViolation):
            exp_map(p, v)


class TestLogMap:
    def test_euclidean(self):
        p = E2.point([0.0, 0.0])
        q = E2.point([3.0, 4.0])
        assert np.allclose(log_map(p, q).comps, [3.0, 4.0])

    def test_log_of_self_is_zero(self):
        rng = np.random.default_rng(3)
        for p in [E2.point([1.0, -2.0]), _rand_cap_point(rng), _rand_hyper_point(rng)]:
            assert log_map(p, p).norm() == pytest.approx(0.0, abs=1e-15)

    def test_hyperboloid_unit_norm_example(self):
        H1 = Hyperboloid(1)
        p = H1.point([0.0, 1.0])
        q = H1.point([math.sinh(1.0), math.cosh(1.0)])
        v = log_map(p, q)
        assert np.allclose(v.comps, [1.0, 0.0], atol=1e-14)
        assert v.norm() == pytest.approx(1.0, abs=1e-14)
        assert np.abs(exp_map(p, v).coords - q.coords).max() < 1e-12

    def test_chart_mismatch(self):
        with pytest.raises(ChartMismatch):
            log_map(E2.point([0.0, 0.0]), Euclidean(3).point([0.0, 0.0, 0.0]))

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_exp_log_roundtrip_all_models(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(40):
            pe = E2.point(rng.normal(size=2))
            qe = E2.point(rng.normal(size=2))
            ps = _rand_cap_point(rng)
            qs = _rand_cap_point(rng)
            ph = _rand_hyper_point(rng)
            qh = _rand_hyper_point(rng)
            for p, q in [(pe, qe), (ps, qs), (ph, qh)]:
                back = exp_map(p, log_map(p, q))
                assert distance(back, q) < 1e-9
                assert log_map(p, q).norm() == pytest.approx(distance(p, q), abs=1e-12)


class TestDistance:
    def test_euclidean_3_4_5(self):
        assert distance(E2.point([0.0, 0.0]), E2.point([3.0, 4.0])) == 5.0

    def test_identity_of_indiscernibles(self):
        p = H2.point([0.0, 0.0, 1.0])
        assert distance(p, p) == 0.0

    def test_sphere_great_circle_formula(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            p, q = _rand_cap_point(rng), _rand_cap_point(rng)
            assert distance(p, q) == pytest.approx(
                math.acos(float(np.clip(np.dot(p.coords, q.coords), -1, 1))), abs=1e-12
            )

    def test_sphere_distance_matches_length_quadrature(self):
        # frozen oracle: Simpson length of the pole->center geodesic is
        # 0.7853981633968004 (= pi/4 up to 6.5e-13 quadrature error)
        p = WIDE_CAP.point([0.0, 0.0, 1.0])
        q = WIDE_CAP.point(WIDE_CAP.center_array)
        seg = GeodesicSegment(p, log_map(p, q))
        L = curve_length("sphere", lambda s: geodesic_eval(seg, s).coords)
        assert distance(p, q) == pytest.approx(L, abs=1e-9)
        assert distance(p, q) == pytest.approx(math.pi / 4, abs=1e-12)

    def test_hyperboloid_distance_matches_length_quadrature(self):
        p = H2.point([0.0, 0.0, 1.0])
        q = exp_map(p, H2.tangent(p, [0.9, -0.4, 0.0]))
        seg = GeodesicSegment(p, log_map(p, q))
        L = curve_length("hyperboloid", lambda s: geodesic_eval(seg, s).coords)
        assert distance(p, q) == pytest.approx(L, abs=1e-9)

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(5)
        for factory in [
            lambda: E2.point(rng.normal(size=2)),
            lambda: _rand_cap_point(rng),
            lambda: _rand_hyper_point(rng),
        ]:
            for _ in range(20):
                a, b, c = factory(), factory(), factory()
                assert distance(a, b) == pytest.approx(distance(b, a), abs=1e-12)
                assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


class TestGeodesicEval:
    def test_endpoints(self):
        p = E2.point([1.0, 1.0])
        v = E2.tangent(p, [2.0, 0.0])
        seg = GeodesicSegment(p, v)
        assert geodesic_eval(seg, 0.0) == p
        assert geodesic_eval(seg, 1.0) == exp_map(p, v)

    def test_euclidean_midpoint_is_mean(self):
        p = E2.point([1.0, 1.0])
        q = E2.point([3.0, -5.0])
        seg = GeodesicSegment(p, log_map(p, q))
        assert np.allclose(geodesic_eval(seg, 0.5).coords, [2.0, -2.0])

    def test_speed_constancy(self):
        # central differences, h=1e-5: metric speed constant along s
        rng = np.random.default_rng(9)
        h = 1e-5
        cases = []
        p = _rand_cap_point(rng)
        cases.append((POLAR_CAP, p, POLAR_CAP.tangent(p, rng.normal(size=3), project=True)))
        p = _rand_hyper_point(rng)
        cases.append((H2, p, H2.tangent(p, rng.normal(size=3), project=True)))
        for man, p, v in cases:
            seg = GeodesicSegment(p, v)
            speeds = []
            for s in np.linspace(0.05, 0.95, 7):
                a = geodesic_eval(seg, s - h).coords
                b = geodesic_eval(seg, s + h).coords
                diff = (b - a) / (2 * h)
                mid = geodesic_eval(seg, s).coords
                speeds.append(math.sqrt(abs(float(man.inner(mid, diff, diff)))))
            assert max(speeds) - min(speeds) < 1e-6

    def test_distance_consistency_along_segment(self):
        rng = np.random.default_rng(21)
        p = _rand_hyper_point(rng)
        v = H2.tangent(p, rng.normal(size=3), project=True)
        seg = GeodesicSegment(p, v)
        for s in np.linspace(0.0, 1.0, 9):
            assert distance(p, geodesic_eval(seg, s)) == pytest.approx(
                s * v.norm(), abs=1e-8
            )


class TestParallelTransport:
    def test_euclidean_components_unchanged(self):
        p = E2.point([0.0, 0.0])
        seg = GeodesicSegment(p, E2.tangent(p, [1.0, 2.0]))
        v = E2.tangent(p, [-3.0, 0.5])
        assert np.array_equal(parallel_transport(v, seg, 0.77).comps, v.comps)

    def test_sphere_quarter_turn_frozen(self):
        # frozen oracle (RK4 transport ODE): e2 -> e2, e1 -> -e3
        p = WIDE_CAP.point([0.0, 0.0, 1.0])
        vel = WIDE_CAP.tangent(p, [math.pi / 2, 0.0, 0.0])
        seg = GeodesicSegment(p, vel)
        e2 = WIDE_CAP.tangent(p, [0.0, 1.0, 0.0])
        e1 = WIDE_CAP.tangent(p, [1.0, 0.0, 0.0])
        assert np.abs(parallel_transport(e2, seg, 1.0).comps - [0, 1, 0]).max() < 1e-12
        assert np.abs(parallel_transport(e1, seg, 1.0).comps - [0, 0, -1]).max() < 1e-12

    def test_transport_matches_ode_oracle(self):
        rng = np.random.default_rng(13)
        p = _rand_hyper_point(rng)
        vel = H2.tangent(p, rng.normal(size=3), project=True)
        vel = scale_tangent(vel, 1.2 / max(vel.norm(), 1.2))
        w = H2.tangent(p, rng.normal(size=3), project=True)
        seg = GeodesicSegment(p, vel)
        got = parallel_transport(w, seg, 1.0)
        _, oracle = integrate_transport("hyperboloid", p.coords, vel.comps, w.comps, steps=4000)
        assert np.abs(got.comps - oracle).max() < 1e-10

    def test_transport_by_zero_is_identity(self):
        rng = np.random.default_rng(17)
        p = _rand_cap_point(rng)
        vel = POLAR_CAP.tangent(p, rng.normal(size=3), project=True)
        w = POLAR_CAP.tangent(p, rng.normal(size=3), project=True)
        seg = GeodesicSegment(p, vel)
        assert np.abs(parallel_transport(w, seg, 0.0).comps - w.comps).max() < 1e-12

    def test_metric_preservation(self):
        rng = np.random.default_rng(19)
        for _ in range(10):
            p = _rand_hyper_point(rng)
            vel = H2.tangent(p, rng.normal(size=3), project=True)
            u = H2.tangent(p, rng.normal(size=3), project=True)
            w = H2.tangent(p, rng.normal(size=3), project=True)
            seg = GeodesicSegment(p, vel)
            pu = parallel_transport(u, seg, 1.0)
            pw = parallel_transport(w, seg, 1.0)
            assert inner_product(pu, pw) == pytest.approx(inner_product(u, w), abs=1e-9)

    def test_velocity_is_parallel(self):
        rng = np.random.default_rng(23)
        p = _rand_cap_point(rng)
        vel = POLAR_CAP.tangent(p, 0.5 * rng.normal(size=3), project=True)
        seg = GeodesicSegment(p, vel)
        s = 0.6
        moved = parallel_transport(vel, seg, s)
        # compare against the analytic velocity at s via central differences
        h = 1e-6
        fd = (geodesic_eval(seg, s + h).coords - geodesic_eval(seg, s - h).coords) / (2 * h)
        assert np.abs(moved.comps - fd).max() < 1e-8


class TestInverseTransport:
    def test_euclidean_identity(self):
        p = E2.point([0.0, 0.0])
        seg = GeodesicSegment(p, E2.tangent(p, [1.0, 0.0]))
        dest = geodesic_eval(seg, 0.4)
        v = E2.tangent(dest, [5.0, 6.0])
        assert np.array_equal(inverse_transport(v, seg, 0.4).comps, [5.0, 6.0])

    def test_round_trip_random_sphere_tangents(self):
        rng = np.random.default_rng(29)
        for _ in range(15):
            p = _rand_cap_point(rng)
            vel = POLAR_CAP.tangent(p, 0.3 * rng.normal(size=3), project=True)
            w = POLAR_CAP.tangent(p, rng.normal(size=3), project=True)
            seg = GeodesicSegment(p, vel)
            s = float(rng.random())
            back = inverse_transport(parallel_transport(w, seg, s), seg, s)
            assert np.abs(back.comps - w.comps).max() < 1e-9

    def test_hyperboloid_scaled_velocity_pullback(self):
        # velocity is parallel along its own geodesic, so pulling back
        # (1-s) * velocity-at-s must give (1-s) * velocity-at-0
        rng = np.random.default_rng(31)
        p = _rand_hyper_point(rng)
        vel = H2.tangent(p, rng.normal(size=3), project=True)
        seg = GeodesicSegment(p, vel)
        s = 0.35
        vel_at_s = parallel_transport(vel, seg, s)
        back = inverse_transport(scale_tangent(vel_at_s, 1.0 - s), seg, s)
        assert np.abs(back.comps - (1.0 - s) * vel.comps).max() < 1e-12

    def test_wrong_base_rejected(self):
        p = E2.point([0.0, 0.0])
        seg = GeodesicSegment(p, E2.tangent(p, [1.0, 0.0]))
        v = E2.tangent(E2.point([9.0, 9.0]), [1.0, 1.0])
        with pytest.raises(TangencyViolation):
            inverse_transport(v, seg, 0.5)


@st.composite
def _hyper_pair(draw):
    xs = draw(st.lists(st.floats(-1.5, 1.5), min_size=4, max_size=4))
    a = np.array([xs[0], xs[1], math.sqrt(1 + xs[0] ** 2 + xs[1] ** 2)])
    b = np.array([xs[2], xs[3], math.sqrt(1 + xs[2] ** 2 + xs[3] ** 2)])
    return a, b


class TestHypothesisInvariants:
    @settings(max_examples=60, deadline=None)
    @given(_hyper_pair())
    def test_exp_log_inverse_hyperboloid(self, pair):
        a, b = pair
        p, q = H2.point(a), H2.point(b)
        assert distance(exp_map(p, log_map(p, q)), q) < 1e-9

    @settings(max_examples=60, deadline=None)
    @given(_hyper_pair(), st.floats(0.0, 1.0))
    def test_transport_isometry_hyperboloid(self, pair, s):
        a, b = pair
        p, q = H2.point(a), H2.point(b)
        seg = GeodesicSegment(p, log_map(p, q))
        w = H2.tangent(p, [1.0, -0.5, 0.0], project=True)
        moved = parallel_transport(w, seg, s)
        assert abs(moved.norm() - w.norm()) < 1e-9
