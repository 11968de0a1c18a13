import numpy as np
import pytest

from arisbh.errors import ConvergenceError, RegimeError
from arisbh.placement import (
    PlacementProblem,
    consensus_placement,
    kappa,
    kappa_grid_argmin,
    per_uav_placement,
    placement_cost,
    weiszfeld,
)


def median_grid_oracle(points, window=None, fine_step=0.01):
    """Two-stage grid minimizer of the sum of distances, 1 cm final resolution."""
    pts = np.asarray(points, dtype=float)
    if window is None:
        lo = pts.min(axis=0) - 1.0
        hi = pts.max(axis=0) + 1.0
    else:
        lo, hi = window

    def argmin_on(xs, ys):
        xx, yy = np.meshgrid(xs, ys, indexing="ij")
        grid = np.stack([xx.ravel(), yy.ravel()], axis=1)
        obj = np.sum(
            np.linalg.norm(grid[:, None, :] - pts[None, :, :], axis=2), axis=1
        )
        return grid[np.argmin(obj)]

    coarse = argmin_on(np.linspace(lo[0], hi[0], 201), np.linspace(lo[1], hi[1], 201))
    span = max((hi[0] - lo[0]) / 200, (hi[1] - lo[1]) / 200) + fine_step
    nfine = int(2 * span / fine_step) + 1
    return argmin_on(
        np.linspace(coarse[0] - span, coarse[0] + span, nfine),
        np.linspace(coarse[1] - span, coarse[1] + span, nfine),
    )


class TestKappa:
    def test_degenerate_boundary_root_is_zero(self):
        assert kappa(0.0, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_reference_geometry_value(self):
        # H=180, h=45, ||w||=1000 -> zeta (0.18, 0.135); grid-verified root
        k = kappa(0.18, 0.135)
        assert k == pytest.approx(0.03407985349, rel=1e-9)
        assert k == pytest.approx(kappa_grid_argmin(0.18, 0.135), abs=0.5 / 100000)

    def test_matches_constrained_grid_argmin_with_regularizers(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            z1 = rng.uniform(0.08, 0.25)
            z2 = rng.uniform(0.02, 0.2)
            o1 = rng.uniform(0.0, 0.03)
            o2 = rng.uniform(0.0, 0.001)
            k = kappa(z1, z2, o1, o2)
            assert abs(k - kappa_grid_argmin(z1, z2, o1, o2)) <= 0.5 / 100000

    def test_stationarity_of_root(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            z1 = rng.uniform(0.05, 0.3)
            z2 = rng.uniform(0.01, 0.25)
            k = kappa(z1, z2)
            h = 1e-6
            deriv = (placement_cost(k + h, z1, z2, 0, 0) - placement_cost(k - h, z1, z2, 0, 0)) / (2 * h)
            assert abs(deriv) < 1e-8

    def test_out_of_regime_raises(self):
        with pytest.raises(RegimeError):
            kappa(0.9, 0.2)  # short ground range: small-parameter assumptions fail

    def test_grid_fallback_flag(self):
        k = kappa(0.9, 0.2, grid_fallback=True)
        assert k == pytest.approx(kappa_grid_argmin(0.9, 0.2), abs=1e-5)

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            kappa(-0.1, 0.1)

    def test_monotone_in_altitude_and_range(self):
        # platform higher -> optimum moves out; UAV farther -> fraction shrinks
        ks_h = [kappa(h / 1000.0, abs(h - 45.0) / 1000.0) for h in np.linspace(150, 200, 6)]
        assert all(a < b for a, b in zip(ks_h, ks_h[1:]))
        ks_w = [kappa(180.0 / w, 135.0 / w) for w in np.linspace(800, 1600, 6)]
        assert all(a > b for a, b in zip(ks_w, ks_w[1:]))


class TestPerUavPlacement:
    def test_single_uav_reference_point(self):
        prob = PlacementProblem(
            uav_xy=np.array([[1000.0, 0.0]]), uav_alt=np.array([45.0]), ris_altitude=180.0
        )
        kappas, q = per_uav_placement(prob)
        np.testing.assert_allclose(q[0], [34.07985349, 0.0], rtol=1e-8)
        assert kappas[0] == pytest.approx(kappa_grid_argmin(0.18, 0.135), abs=1e-5)

    def test_rotation_equivariance(self):
        phi = 0.7
        rot = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
        base = np.array([[1200.0, -300.0]])
        alt = np.array([50.0])
        _, q1 = per_uav_placement(PlacementProblem(base, alt, 180.0))
        _, q2 = per_uav_placement(PlacementProblem(base @ rot.T, alt, 180.0))
        np.testing.assert_allclose(q2[0], rot @ q1[0], rtol=1e-10)

    def test_equal_altitudes_branch(self):
        prob = PlacementProblem(
            uav_xy=np.array([[900.0, 100.0]]), uav_alt=np.array([180.0]), ris_altitude=180.0
        )
        kappas, _ = per_uav_placement(prob)
        assert kappas[0] > 0

    def test_error_carries_uav_index(self):
        prob = PlacementProblem(
            uav_xy=np.array([[1000.0, 0.0], [120.0, 0.0]]),
            uav_alt=np.array([45.0, 45.0]),
            ris_altitude=180.0,
        )
        with pytest.raises(RegimeError, match="UAV 1"):
            per_uav_placement(prob)


class TestWeiszfeld:
    def test_single_point(self):
        res = weiszfeld(np.array([[3.0, 4.0]]))
        np.testing.assert_allclose(res.point, [3.0, 4.0])

    def test_two_points_returns_midpoint(self):
        res = weiszfeld(np.array([[0.0, 0.0], [10.0, 2.0]]))
        np.testing.assert_allclose(res.point, [5.0, 1.0])

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(0, 60, size=(5, 2))
        res = weiszfeld(pts)
        oracle = median_grid_oracle(pts)
        assert np.linalg.norm(res.point - oracle) <= 0.02

    def test_objective_non_increasing(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            pts = rng.uniform(-50, 50, size=(rng.integers(3, 9), 2))
            res = weiszfeld(pts, collect_trace=True)
            assert all(a >= b - 1e-12 for a, b in zip(res.trace, res.trace[1:]))

    def test_vertex_optimum_returned(self):
        # heavy center: the median coincides with the repeated data point
        pts = np.array([[0, 0], [0, 0], [0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
        res = weiszfeld(pts)
        np.testing.assert_allclose(res.point, [0.0, 0.0], atol=1e-9)

    def test_iteration_budget_error_carries_best(self):
        pts = np.random.default_rng(1).uniform(0, 100, size=(6, 2))
        with pytest.raises(ConvergenceError) as err:
            weiszfeld(pts, tol=1e-16, max_iter=2)
        assert err.value.best_point is not None
        assert np.all(np.isfinite(err.value.best_point))


class TestConsensusPlacement:
    def _problem(self, uav_xy, alts=45.0):
        uav_xy = np.asarray(uav_xy, dtype=float)
        return PlacementProblem(
            uav_xy=uav_xy,
            uav_alt=np.broadcast_to(np.asarray(alts, dtype=float), (uav_xy.shape[0],)),
            ris_altitude=180.0,
        )

    def test_single_uav_consensus_is_its_optimum(self):
        sol = consensus_placement(self._problem([[1000.0, 0.0]]))
        np.testing.assert_allclose(sol.q_star, sol.q_per_uav[0])

    def test_collinear_symmetric_layout(self):
        # three UAVs on the x-axis: the median of collinear points is the middle one
        sol = consensus_placement(self._problem([[900.0, 0.0], [1000.0, 0.0], [1100.0, 0.0]]))
        mid = sorted(sol.q_per_uav[:, 0])[1]
        assert sol.q_star[0] == pytest.approx(mid, abs=1e-6)
        assert sol.q_star[1] == pytest.approx(0.0, abs=1e-9)

    def test_matches_grid_oracle_four_uavs(self):
        rng = np.random.default_rng(11)
        uav_xy = np.column_stack([rng.uniform(800, 1300, 4), rng.uniform(-250, 250, 4)])
        sol = consensus_placement(self._problem(uav_xy))
        oracle = median_grid_oracle(sol.q_per_uav)
        assert np.linalg.norm(sol.q_star - oracle) <= 0.02

    def test_platform_stays_near_source(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            m0 = int(rng.integers(2, 10))
            uav_xy = np.column_stack([rng.uniform(800, 1600, m0), rng.uniform(-250, 250, m0)])
            sol = consensus_placement(self._problem(uav_xy, alts=rng.uniform(30, 60)))
            assert sol.proximity_ratio < 0.1

    def test_reports_consensus_objective(self):
        sol = consensus_placement(self._problem([[900.0, 100.0], [1000.0, -80.0], [1200.0, 30.0]]))
        want = np.sum(np.linalg.norm(sol.q_per_uav - sol.q_star, axis=1))
        assert sol.consensus_objective == pytest.approx(want, rel=1e-9)
