"""Descent solver tests: analytic minimizers, trajectory invariants,
multistart spread, and solution-set checks."""

import math

import numpy as np
import pytest

from invexkit.errors import InfeasibleStart
from invexkit.geometry import Euclidean, Hyperboloid, distance, exp_map
from invexkit.maps import (
    DistanceTo,
    EuclideanDifference,
    LogBased,
    MetricBall,
    MinOf,
    Offset,
    SquaredDistance,
    WeightedSum,
    identity_triple,
)
from invexkit.optimize import (
    Backtracking,
    DescentConfig,
    FixedStep,
    geodesic_descent,
    multistart_local_global,
    solution_set_invex,
)
from invexkit.report import HOLDS, INCONCLUSIVE, VIOLATED
from invexkit.sampling import ExplicitList, SampleScheme, UniformBall

E2 = Euclidean(2)
H2 = Hyperboloid(2)
ORIGIN = E2.point([0.0, 0.0])
APEX = H2.point([0.0, 0.0, 1.0])
CFG = DescentConfig(step=Backtracking(eta0=1.0), max_iters=300, grad_tol=1e-9)

TWO_WELL = MinOf(
    SquaredDistance(E2.point([-1.5, 0.0])),
    Offset(SquaredDistance(E2.point([1.5, 0.0])), 0.5),
)


class TestGeodesicDescent:
    def test_flat_quadratic_reaches_analytic_argmin(self):
        h = SquaredDistance(E2.point([1.0, 1.0]))
        res = geodesic_descent(h, E2.point([5.0, -3.0]), CFG)
        assert res.converged
        assert np.abs(res.minimizer.coords - [1.0, 1.0]).max() < 1e-6
        assert res.value == h.value(res.minimizer)

    def test_hyperboloid_squared_distance_reaches_center(self):
        p0 = exp_map(APEX, H2.tangent(APEX, [0.4, -0.7, 0.0]))
        h = SquaredDistance(p0)
        for vec in [[-1.0, 0.5, 0.0], [0.9, 0.9, 0.0]]:
            start = exp_map(APEX, H2.tangent(APEX, vec))
            res = geodesic_descent(h, start, CFG)
            assert res.converged
            assert distance(res.minimizer, p0) < 1e-6

    def test_stationary_start_converges_at_iteration_zero(self):
        h = SquaredDistance(E2.point([1.0, 1.0]))
        res = geodesic_descent(h, E2.point([1.0, 1.0]), CFG)
        assert res.converged and res.iterations == 0
        assert res.minimizer == E2.point([1.0, 1.0])

    def test_infeasible_start_raises(self):
        with pytest.raises(InfeasibleStart):
            geodesic_descent(
                SquaredDistance(ORIGIN), E2.point([5.0, 0.0]), CFG, MetricBall(ORIGIN, 1.0)
            )

    def test_monotone_and_feasible_trajectory(self):
        region = MetricBall(ORIGIN, 2.0)
        h = SquaredDistance(E2.point([1.5, 0.0]))
        res = geodesic_descent(h, E2.point([-1.9, 0.0]), CFG, region)
        vals = [h.value(p) for p in res.trajectory]
        assert all(b <= a for a, b in zip(vals, vals[1:]))  # exact non-increase
        assert all(region.contains(p) for p in res.trajectory)  # exact membership

    def test_fixed_step_policy(self):
        h = SquaredDistance(ORIGIN)
        res = geodesic_descent(
            h, E2.point([2.0, 1.0]), DescentConfig(step=FixedStep(0.25), max_iters=400, grad_tol=1e-9)
        )
        assert res.converged
        assert np.abs(res.minimizer.coords).max() < 1e-6

    def test_deterministic_trajectories(self):
        h = SquaredDistance(E2.point([0.3, -0.8]))
        a = geodesic_descent(h, E2.point([2.0, 2.0]), CFG)
        b = geodesic_descent(h, E2.point([2.0, 2.0]), CFG)
        assert len(a.trajectory) == len(b.trajectory)
        for p, q in zip(a.trajectory, b.trajectory):
            assert np.array_equal(p.coords, q.coords)

    def test_nonsmooth_without_subgradient_mode_stalls_at_kink(self):
        h = DistanceTo(ORIGIN)
        res = geodesic_descent(h, ORIGIN, DescentConfig(max_iters=50, grad_tol=1e-9))
        assert not res.converged
        assert res.stop_reason == "nondifferentiable_iterate"

    def test_subgradient_mode_at_kink_minimum(self):
        # start exactly at the nonsmooth minimum: a verified certificate
        # direction exists (sigma ~ 0) and the run terminates there
        h = DistanceTo(ORIGIN)
        cfg = DescentConfig(
            step=FixedStep(0.5), max_iters=60, grad_tol=1e-3, subgradient_mode=True
        )
        res = geodesic_descent(h, ORIGIN, cfg)
        assert res.converged
        assert np.abs(res.minimizer.coords).max() < 0.05

    def test_subgradient_mode_diminishing_steps(self):
        h = DistanceTo(ORIGIN)
        cfg = DescentConfig(
            step=FixedStep(0.5), max_iters=200, grad_tol=1e-3, subgradient_mode=True
        )
        res = geodesic_descent(h, E2.point([1.7, -0.9]), cfg)
        vals = [h.value(p) for p in res.trajectory]
        assert all(b <= a for a, b in zip(vals, vals[1:]))
        assert h.value(res.minimizer) < 0.05


class TestMultistart:
    def _scheme(self, center, radius, seed=77):
        return SampleScheme(n_pairs=30, s_grid=5, rng_seed=seed, sampler=UniformBall(center, radius))

    def test_hyperboloid_unique_minimum_tight_spread(self):
        h = SquaredDistance(exp_map(APEX, H2.tangent(APEX, [0.4, -0.7, 0.0])))
        rep = multistart_local_global(
            h, identity_triple(LogBased()), MetricBall(APEX, 2.0), 32, CFG,
            self._scheme(APEX, 1.3),
        )
        assert rep.verdict == HOLDS
        assert rep.details["value_spread"] < 1e-6
        assert rep.details["n_converged"] == 32

    def test_two_well_demonstration_mode(self):
        rep = multistart_local_global(
            TWO_WELL, identity_triple(EuclideanDifference()), MetricBall(ORIGIN, 3.0),
            32, CFG, self._scheme(ORIGIN, 2.2, seed=78), demonstration=True,
        )
        assert rep.verdict == INCONCLUSIVE
        assert rep.details["premise_preinvex"] == VIOLATED
        assert rep.details["value_spread"] > 1e-1

    def test_two_well_without_demonstration_is_gated(self):
        rep = multistart_local_global(
            TWO_WELL, identity_triple(EuclideanDifference()), MetricBall(ORIGIN, 3.0),
            32, CFG, self._scheme(ORIGIN, 2.2, seed=78),
        )
        assert rep.verdict == INCONCLUSIVE
        assert "value_spread" not in rep.details

    def test_single_start_vacuous(self):
        h = SquaredDistance(ORIGIN)
        rep = multistart_local_global(
            h, identity_triple(EuclideanDifference()), MetricBall(ORIGIN, 3.0), 1, CFG,
            self._scheme(ORIGIN, 1.5),
        )
        assert rep.verdict == HOLDS
        assert rep.details["value_spread"] == 0.0

    def test_jobs_parameter_is_deterministic(self):
        h = SquaredDistance(E2.point([0.5, -0.25]))
        args = (h, identity_triple(EuclideanDifference()), MetricBall(ORIGIN, 3.0), 16, CFG,
                self._scheme(ORIGIN, 2.0, seed=79))
        serial = multistart_local_global(*args, jobs=1)
        threaded = multistart_local_global(*args, jobs=4)
        assert serial.to_dict() == threaded.to_dict()


class TestSolutionSet:
    def test_unique_minimizer_pool_has_zero_diameter(self):
        h = SquaredDistance(exp_map(APEX, H2.tangent(APEX, [0.4, -0.7, 0.0])))
        rng = np.random.default_rng(5)
        pool = [
            geodesic_descent(h, exp_map(APEX, H2.tangent(APEX, rng.normal(size=3), project=True)), CFG)
            for _ in range(8)
        ]
        sch = SampleScheme(n_pairs=8, s_grid=5, rng_seed=1, sampler=UniformBall(APEX, 1.3))
        rep = solution_set_invex(
            h, identity_triple(LogBased()), MetricBall(APEX, 2.5), pool, sch, strict=True
        )
        assert rep.verdict == HOLDS
        assert rep.details["pool_diameter"] < 1e-9

    def test_constant_plateau_pool_is_invex(self):
        zero = WeightedSum(())
        rng = np.random.default_rng(7)
        pts = []
        for _ in range(6):
            v = H2.project_tangent(APEX.coords, rng.normal(size=3))
            v = v / math.sqrt(float(H2.minkowski(v, v))) * rng.random()
            pts.append(exp_map(APEX, H2.tangent(APEX, v)))
        sch = SampleScheme(n_pairs=36, s_grid=7, rng_seed=2, sampler=UniformBall(APEX, 1.0))
        rep = solution_set_invex(
            zero, identity_triple(LogBased()), MetricBall(APEX, 2.0), pts, sch
        )
        assert rep.verdict == HOLDS
        assert rep.details["pool_size"] == 6

    def test_strict_with_distant_pool_flags_misconfiguration(self):
        sch = SampleScheme(n_pairs=4, s_grid=5, rng_seed=3, sampler=UniformBall(ORIGIN, 3.0))
        rep = solution_set_invex(
            TWO_WELL,
            identity_triple(EuclideanDifference()),
            MetricBall(ORIGIN, 3.0),
            [E2.point([-1.5, 0.0]), E2.point([1.5, 0.0])],
            sch,
            strict=True,
            tol_opt=1.0,
        )
        assert rep.verdict == VIOLATED
        assert any(w.label == "strict_pool_diameter" for w in rep.witnesses)
        assert not rep.falsification
