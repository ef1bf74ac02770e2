"""Coordinate-descent solver: state caches, scalar updates, full solves."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskbudgeting import (
    CcdState,
    CovarianceModel,
    InputError,
    RiskBudgets,
    RiskMeasureSpec,
    SolverSettings,
    apply_update,
    ccd_update_weight,
    ccd_update_weight_stddev,
    convergence_gap,
    initial_state,
    normalize,
    portfolio_volatility,
    refresh_state,
    solve_ccd,
)
from riskbudgeting.ccd import warm_up

from helpers import random_instance, two_asset_cov


def lagrangian(x, cov, b):
    return portfolio_volatility(x, cov) - float(b.b @ np.log(x))


def run_cycle(state, cov, b):
    for i in range(cov.n):
        state = apply_update(i, ccd_update_weight(i, state, cov, b), state, cov)
    return state


class TestInitialState:
    def test_defaults_to_equal_weights_with_dense_caches(self):
        cov = random_instance(5, seed=3)
        state = initial_state(cov)
        np.testing.assert_allclose(state.x, 0.2, atol=0.0)
        np.testing.assert_array_equal(state.sigma_x, cov.matrix @ state.x)
        assert state.sigma_port == pytest.approx(
            math.sqrt(state.x @ cov.matrix @ state.x), rel=1e-15
        )
        assert state.cycle == 0

    def test_copies_caller_vector(self):
        cov = CovarianceModel.from_correlation(np.eye(3))
        x0 = np.array([1.0, 2.0, 3.0])
        state = initial_state(cov, x0)
        x0[0] = 99.0
        assert state.x[0] == 1.0

    def test_rejects_wrong_length(self):
        cov = CovarianceModel.from_correlation(np.eye(3))
        with pytest.raises(InputError, match="shape"):
            initial_state(cov, [1.0, 2.0])

    @pytest.mark.parametrize("bad", [[1.0, 0.0, 1.0], [1.0, -2.0, 1.0], [1.0, np.nan, 1.0]])
    def test_rejects_nonpositive_or_nonfinite(self, bad):
        cov = CovarianceModel.from_correlation(np.eye(3))
        with pytest.raises(InputError, match="positive"):
            initial_state(cov, bad)


class TestCoordinateUpdate:
    def test_single_asset_is_already_stationary(self):
        cov = CovarianceModel.from_correlation(np.eye(1))
        state = initial_state(cov, [1.0])
        assert ccd_update_weight(0, state, cov, RiskBudgets.uniform(1)) == 1.0

    def test_identity_equal_start_value(self):
        cov = CovarianceModel.from_correlation(np.eye(4))
        state = initial_state(cov)
        t = ccd_update_weight(0, state, cov, RiskBudgets.uniform(4))
        assert t == pytest.approx(0.3535533905932738, abs=1e-15)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_solution_scaled_to_unit_volatility_is_a_fixed_point(self, seed):
        n = 3 + seed
        cov = random_instance(n, seed)
        b = RiskBudgets.uniform(n)
        out = solve_ccd(cov, b, SolverSettings(tolerance=1e-13))
        assert out.converged
        y = out.weights.x / portfolio_volatility(out.weights, cov)
        state = initial_state(cov, y)
        for i in range(n):
            t = ccd_update_weight(i, state, cov, b)
            assert t == pytest.approx(y[i], rel=1e-11)

    @pytest.mark.parametrize("i", [-1, 4])
    def test_rejects_index_out_of_range(self, i):
        cov = CovarianceModel.from_correlation(np.eye(4))
        state = initial_state(cov)
        with pytest.raises(InputError, match="out of range"):
            ccd_update_weight(i, state, cov, RiskBudgets.uniform(4))


class TestApplyUpdate:
    def test_unchanged_weight_leaves_state_put(self):
        cov = random_instance(6, seed=9)
        state = initial_state(cov)
        after = apply_update(2, state.x[2], state, cov)
        np.testing.assert_array_equal(after.x, state.x)
        np.testing.assert_allclose(after.sigma_x, state.sigma_x, rtol=1e-15)
        assert after.sigma_port == pytest.approx(state.sigma_port, rel=1e-15)

    def test_two_asset_caches_after_doubling_first_weight(self):
        cov = CovarianceModel.from_correlation(np.eye(2))
        state = initial_state(cov, [1.0, 1.0])
        after = apply_update(0, 2.0, state, cov)
        np.testing.assert_array_equal(after.x, [2.0, 1.0])
        np.testing.assert_array_equal(after.sigma_x, [2.0, 1.0])
        assert after.sigma_port == pytest.approx(math.sqrt(5.0), rel=1e-15)

    def test_caches_track_dense_recomputation_over_many_updates(self):
        cov = random_instance(20, seed=11)
        state = initial_state(cov)
        rng = np.random.default_rng(7)
        for _ in range(300):
            i = int(rng.integers(20))
            state = apply_update(i, state.x[i] * rng.uniform(0.5, 2.0), state, cov)
        dense_sx = cov.matrix @ state.x
        dense_port = math.sqrt(state.x @ dense_sx)
        np.testing.assert_allclose(state.sigma_x, dense_sx, rtol=1e-10)
        assert state.sigma_port == pytest.approx(dense_port, rel=1e-10)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_rejects_nonpositive_or_nonfinite_weight(self, bad):
        cov = CovarianceModel.from_correlation(np.eye(2))
        state = initial_state(cov)
        with pytest.raises(InputError, match="positive"):
            apply_update(0, bad, state, cov)

    def test_rejects_index_out_of_range(self):
        cov = CovarianceModel.from_correlation(np.eye(2))
        state = initial_state(cov)
        with pytest.raises(InputError, match="out of range"):
            apply_update(2, 1.0, state, cov)

    def test_refresh_recomputes_caches_densely(self):
        cov = random_instance(8, seed=2)
        state = initial_state(cov)
        drifted = CcdState(
            x=state.x, sigma_x=state.sigma_x + 1e-3, sigma_port=state.sigma_port * 2, cycle=4
        )
        fresh = refresh_state(drifted, cov)
        np.testing.assert_array_equal(fresh.sigma_x, cov.matrix @ state.x)
        assert fresh.sigma_port == pytest.approx(state.sigma_port, rel=1e-15)
        assert fresh.cycle == 4


class TestStdDevUpdate:
    def setup_method(self):
        self.cov = two_asset_cov(0.5)
        self.state = initial_state(self.cov, [0.5, 0.5])
        self.b = RiskBudgets.uniform(2)

    def test_mean_adjusted_root_matches_polynomial_oracle(self):
        measure = RiskMeasureSpec.std_dev_based(mu=[0.01, 0.02], c=2.0)
        t = ccd_update_weight_stddev(0, self.state, self.cov, self.b, measure)
        assert t == pytest.approx(1.6145322221453196, abs=1e-12)

    def test_plain_root_on_same_state_differs(self):
        t = ccd_update_weight(0, self.state, self.cov, self.b)
        assert t == pytest.approx(2.3339656107737725, abs=1e-12)

    def test_zero_drift_unit_penalty_reduces_to_plain_update(self):
        measure = RiskMeasureSpec.std_dev_based(mu=[0.0, 0.0], c=1.0)
        for i in range(2):
            assert ccd_update_weight_stddev(
                i, self.state, self.cov, self.b, measure
            ) == ccd_update_weight(i, self.state, self.cov, self.b)

    def test_rejects_plain_volatility_measure(self):
        with pytest.raises(InputError, match="standard deviation"):
            ccd_update_weight_stddev(
                0, self.state, self.cov, self.b, RiskMeasureSpec.volatility()
            )

    def test_rejects_drift_length_mismatch(self):
        measure = RiskMeasureSpec.std_dev_based(mu=[0.01, 0.02, 0.03], c=2.0)
        with pytest.raises(InputError, match="length"):
            ccd_update_weight_stddev(0, self.state, self.cov, self.b, measure)

    def test_rejects_index_out_of_range(self):
        measure = RiskMeasureSpec.std_dev_based(mu=[0.0, 0.0], c=1.0)
        with pytest.raises(InputError, match="out of range"):
            ccd_update_weight_stddev(5, self.state, self.cov, self.b, measure)


class TestSolveCcd:
    def test_identity_gives_equal_weights(self):
        cov = CovarianceModel.from_correlation(np.eye(5))
        out = solve_ccd(cov, RiskBudgets.uniform(5))
        assert out.converged
        assert out.final_gap <= 1e-8
        np.testing.assert_allclose(out.weights.x, 0.2, atol=1e-7)

    @pytest.mark.parametrize("rho", [-0.5, 0.0, 0.5, 0.9])
    def test_two_assets_equal_budgets_weight_inverse_to_vol(self, rho):
        cov = two_asset_cov(rho)
        out = solve_ccd(cov, RiskBudgets.uniform(2), SolverSettings(tolerance=1e-12))
        assert out.converged
        np.testing.assert_allclose(out.weights.x, [2.0 / 3.0, 1.0 / 3.0], atol=1e-9)

    def test_three_asset_uneven_budgets_match_frozen_solution(self):
        corr = np.full((3, 3), 0.5)
        np.fill_diagonal(corr, 1.0)
        cov = CovarianceModel.from_correlation(corr, vols=[0.1, 0.2, 0.3])
        b = RiskBudgets([0.5, 0.3, 0.2])
        out = solve_ccd(cov, b, SolverSettings(tolerance=1e-12))
        assert out.converged
        expected = [0.6689682285756251, 0.2241657175287311, 0.10686605389564391]
        np.testing.assert_allclose(out.weights.x, expected, atol=1e-9)
        assert convergence_gap(out.weights, cov, b) <= 1e-12

    def test_rejects_budget_length_mismatch(self):
        cov = CovarianceModel.from_correlation(np.eye(3))
        with pytest.raises(InputError, match="length"):
            solve_ccd(cov, RiskBudgets.uniform(4))

    def test_exhausted_cycle_budget_reports_not_converged(self):
        cov = random_instance(8, seed=21)
        out = solve_ccd(
            cov, RiskBudgets.uniform(8), SolverSettings(tolerance=1e-12, max_cycles=1)
        )
        assert not out.converged
        assert out.cycles == 1
        assert out.final_gap > 1e-12

    def test_covariance_space_route_agrees(self):
        cov = random_instance(6, seed=4)
        b = RiskBudgets.uniform(6)
        st8 = SolverSettings(tolerance=1e-11)
        out_corr = solve_ccd(cov, b, st8, space="corr")
        out_cov = solve_ccd(cov, b, st8, space="cov")
        assert out_corr.converged and out_cov.converged
        np.testing.assert_allclose(out_corr.weights.x, out_cov.weights.x, atol=1e-9)

    def test_rejects_unknown_space(self):
        cov = CovarianceModel.from_correlation(np.eye(2))
        with pytest.raises(InputError, match="space"):
            solve_ccd(cov, RiskBudgets.uniform(2), space="bogus")

    def test_zero_drift_unit_penalty_measure_matches_plain_run(self):
        cov = random_instance(5, seed=13)
        b = RiskBudgets.uniform(5)
        measure = RiskMeasureSpec.std_dev_based(mu=np.zeros(5), c=1.0)
        plain = solve_ccd(cov, b)
        adjusted = solve_ccd(cov, b, measure=measure)
        np.testing.assert_array_equal(plain.weights.x, adjusted.weights.x)

    def test_overwhelming_drift_reports_ill_posed_measure(self):
        cov = two_asset_cov(0.0)
        measure = RiskMeasureSpec.std_dev_based(mu=[0.3, 0.3], c=0.5)
        out = solve_ccd(
            cov,
            RiskBudgets.uniform(2),
            SolverSettings(max_cycles=25),
            measure=measure,
        )
        assert not out.converged
        assert out.final_gap == math.inf
        assert out.diagnostic is not None and "nonpositive" in out.diagnostic

    def test_repeat_runs_are_bitwise_identical(self):
        cov = random_instance(7, seed=5)
        b = RiskBudgets.uniform(7)
        first = solve_ccd(cov, b)
        second = solve_ccd(cov, b)
        np.testing.assert_array_equal(first.weights.x, second.weights.x)
        assert first.cycles == second.cycles
        assert first.final_gap == second.final_gap


class TestSolveProperties:
    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(2, 8))
    def test_updates_keep_weights_positive_and_descend(self, seed, n):
        cov = random_instance(n, seed)
        rng = np.random.default_rng(seed)
        b = RiskBudgets(np.clip(rng.dirichlet(np.full(n, 2.0)), 1e-3, None))
        state = initial_state(cov)
        level = lagrangian(state.x, cov, b)
        for _ in range(10):
            for i in range(n):
                state = apply_update(i, ccd_update_weight(i, state, cov, b), state, cov)
                assert np.all(state.x > 0.0)
                new_level = lagrangian(state.x, cov, b)
                assert new_level <= level + 1e-12 * (1.0 + abs(level))
                level = new_level

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_caches_stay_coherent_under_random_updates(self, seed):
        cov = random_instance(10, seed)
        state = initial_state(cov)
        rng = np.random.default_rng(seed)
        for _ in range(60):
            i = int(rng.integers(10))
            state = apply_update(i, state.x[i] * rng.uniform(0.5, 2.0), state, cov)
        dense_sx = cov.matrix @ state.x
        np.testing.assert_allclose(state.sigma_x, dense_sx, rtol=1e-10)
        assert state.sigma_port == pytest.approx(math.sqrt(state.x @ dense_sx), rel=1e-10)

    @pytest.mark.parametrize("seed", [0, 3, 7, 12, 19, 25])
    def test_extra_cycle_moves_weights_at_most_ten_tolerances(self, seed):
        n = 2 + seed % 7
        tol = 1e-10
        cov = random_instance(n, seed)
        b = RiskBudgets.uniform(n)
        out = solve_ccd(cov, b, SolverSettings(tolerance=tol))
        assert out.converged
        y = out.weights.x / portfolio_volatility(out.weights, cov)
        state = run_cycle(initial_state(cov, y), cov, b)
        drift = np.abs(normalize(state.x).x - out.weights.x).max()
        assert drift <= 10 * tol


def test_warm_up_is_idempotent():
    warm_up()
    warm_up()
