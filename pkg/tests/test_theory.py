import math

import numpy as np
import pytest

from lookahead_sim.errors import FeasibilityError
from lookahead_sim.experiments import linear_fit
from lookahead_sim.theory import (
    GapInstance,
    clairvoyant_policy,
    concavity_helper_check,
    fixed_rate_policy,
    full_lookahead_utility,
    k_delay_policy,
    measure_gap,
    table_agent_policy,
    undiscounted_utility,
)


class TestGapInstance:
    def test_income_layout(self):
        inst = GapInstance(k=6, income_scale=2.0, hidden_draw=0.25)
        assert np.array_equal(inst.incomes(), [2.0, 2.0, 2.0, 0.5, 0.5, 0.5])

    @pytest.mark.parametrize("kwargs", [
        dict(k=3, income_scale=1.0, hidden_draw=0.5),   # odd
        dict(k=0, income_scale=1.0, hidden_draw=0.5),
        dict(k=4, income_scale=-1.0, hidden_draw=0.5),
        dict(k=4, income_scale=1.0, hidden_draw=1.5),
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            GapInstance(**kwargs)


class TestFullLookaheadUtility:
    def test_constant_income(self):
        assert full_lookahead_utility(GapInstance(4, 1.0, 1.0)) == pytest.approx(4.0, abs=1e-12)

    def test_zero_draw(self):
        expect = 4.0 * math.sqrt(0.5)
        assert full_lookahead_utility(GapInstance(4, 1.0, 0.0)) == pytest.approx(expect, abs=1e-12)

    def test_scaled_instance_matches_simulated_uniform_policy(self):
        inst = GapInstance(6, 4.0, 0.5)
        expect = 6.0 * math.sqrt(3.0)
        got = full_lookahead_utility(inst)
        assert got == pytest.approx(expect, abs=1e-9)
        # simulate the uniform plan directly
        rate = 0.5 * 1.5 * 4.0
        assets = 0.0
        total = 0.0
        for y in inst.incomes():
            available = assets + y
            assert rate <= available + 1e-12
            total += math.sqrt(rate)
            assets = available - rate
        assert got == pytest.approx(total, abs=1e-9)


class TestKDelayPolicy:
    def test_zero_delay_identity(self):
        c = np.array([1.0, 2.0, 3.0])
        assert np.array_equal(k_delay_policy(c, 0), c)

    def test_full_delay_zeros(self):
        c = np.array([1.0, 2.0, 3.0])
        z = k_delay_policy(c, 3)
        assert np.array_equal(z, np.zeros(3))
        assert undiscounted_utility(z) == 0.0

    def test_beyond_horizon_zeros(self):
        assert undiscounted_utility(k_delay_policy(np.ones(4), 9)) == 0.0

    def test_documented_example(self):
        z = k_delay_policy(np.ones(6), 2)
        assert undiscounted_utility(z) == 4.0

    def test_delayed_utility_equals_truncated_sum_exactly(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            T = int(rng.integers(2, 30))
            k = int(rng.integers(0, T + 1))
            c = rng.uniform(0, 10, T)
            z = k_delay_policy(c, k)
            assert undiscounted_utility(z) == undiscounted_utility(c[: T - k])

    def test_delayed_schedule_respects_running_budget(self):
        rng = np.random.default_rng(29)
        for _ in range(200):
            T = int(rng.integers(2, 20))
            k = int(rng.integers(0, T + 1))
            incomes = rng.uniform(0, 5, T)
            # feasible original: consume a random fraction of available budget
            assets = 0.0
            c = np.empty(T)
            for t in range(T):
                available = assets + incomes[t]
                c[t] = rng.uniform(0, available)
                assets = available - c[t]
            z = k_delay_policy(c, k)
            assets = 0.0
            for t in range(T):
                available = assets + incomes[t]
                assert z[t] <= available + 1e-12
                assets = available - z[t]


class TestConcavityHelper:
    def test_equality_point(self):
        assert concavity_helper_check(0.75, 0.75)

    def test_documented_points(self):
        assert concavity_helper_check(0.6, 0.1)
        assert concavity_helper_check(0.99, 0.01)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            concavity_helper_check(0.4, 0.5)
        with pytest.raises(ValueError):
            concavity_helper_check(0.75, 1.0)

    def test_grid_and_random_sample(self):
        a_grid = np.linspace(0.5, 1.0, 102)[1:-1]
        w_grid = np.linspace(0.0, 1.0, 102)[1:-1]
        assert all(concavity_helper_check(a, w) for a in a_grid for w in w_grid)
        rng = np.random.default_rng(4)
        for _ in range(10_000):
            a = float(rng.uniform(0.5, 1.0))
            w = float(rng.uniform(0.0, 1.0))
            if 0.5 < a < 1.0 and 0.0 < w < 1.0:
                assert concavity_helper_check(a, w)


class TestMeasureGap:
    def test_clairvoyant_self_gap_near_zero(self):
        stats = measure_gap(8, 1.0, 64, clairvoyant_policy, seed=1)
        se = stats.standard_error()
        assert abs(stats.mean) <= 2 * se + 1e-9

    def test_gaps_never_negative(self):
        for policy in (clairvoyant_policy, fixed_rate_policy):
            stats = measure_gap(10, 1.0, 100, policy, seed=2)
            assert np.all(stats.gaps >= -1e-9)

    def test_antithetic_draws(self):
        stats = measure_gap(4, 1.0, 10, fixed_rate_policy, seed=3)
        assert np.allclose(stats.draws[0::2] + stats.draws[1::2], 1.0)

    def test_scale_homogeneity_exact(self):
        lo = measure_gap(8, 1.0, 32, clairvoyant_policy, seed=4)
        hi = measure_gap(8, 4.0, 32, clairvoyant_policy, seed=4)
        assert np.array_equal(lo.draws, hi.draws)
        u_lo = lo.policy_utilities + lo.gaps  # clairvoyant utilities
        u_hi = hi.policy_utilities + hi.gaps
        assert np.array_equal(u_hi, 2.0 * u_lo)

    def test_fixed_rate_gap_grows_with_k(self):
        ks = (8, 16, 32, 64)
        means = [measure_gap(k, 1.0, 400, fixed_rate_policy, seed=5).mean for k in ks]
        slope, _, r2 = linear_fit(ks, means)
        assert slope > 0
        assert r2 > 0.9

    def test_infeasible_policy_names_trial(self):
        def greedy(instance):
            def consume(t, incomes_so_far, available):
                return available + 1.0
            return consume
        with pytest.raises(FeasibilityError, match="trial 0"):
            measure_gap(4, 1.0, 4, greedy, seed=6)


class TestTableAgentPolicy:
    def test_runs_feasibly_and_underperforms_clairvoyant(self):
        policy = table_agent_policy(n_grid=129)
        stats = measure_gap(8, 1.0, 40, policy, seed=7)
        assert np.all(stats.gaps >= -1e-9)

    def test_gap_grows_roughly_linearly(self):
        policy = table_agent_policy(n_grid=129)
        ks = (8, 16, 32)
        means = [measure_gap(k, 1.0, 120, policy, seed=8).mean for k in ks]
        slope, _, _ = linear_fit(ks, means)
        assert slope > 0
