import math

import numpy as np
import pytest

from lookahead_sim.core import (
    AgentState,
    AssetGrid,
    ModelParams,
    ScheduleRealization,
    UtilityFn,
    discounted_total,
    step_assets,
    utility,
)
from lookahead_sim.errors import FeasibilityError


def test_step_assets_consume_everything():
    assert step_assets(100.0, 100.0, 1.1, 50.0) == 50.0


def test_step_assets_identity():
    assert step_assets(100.0, 0.0, 1.0, 0.0) == 100.0


def test_step_assets_hand_arithmetic():
    # 0.9 * 120 + 40
    assert step_assets(200.0, 80.0, 0.9, 40.0) == pytest.approx(148.0, abs=1e-12)


@pytest.mark.parametrize("args", [
    (100.0, 101.0, 1.0, 0.0),   # consumption above assets
    (100.0, -1.0, 1.0, 0.0),    # negative consumption
    (100.0, 10.0, 0.0, 0.0),    # non-positive return
    (100.0, 10.0, 1.0, -5.0),   # negative income
])
def test_step_assets_rejects_infeasible(args):
    with pytest.raises(FeasibilityError):
        step_assets(*args)


def test_step_assets_nonnegative_property():
    rng = np.random.default_rng(7)
    for _ in range(500):
        a = rng.uniform(0, 1000)
        c = rng.uniform(0, a)
        r = rng.uniform(0.01, 3.0)
        y = rng.uniform(0, 100)
        assert step_assets(a, c, r, y) >= 0.0


def test_utility_values():
    assert utility(0.0) == 0.0
    assert utility(1.0) == 1.0
    assert utility(2.25) == 1.5


def test_utility_rejects_negative():
    with pytest.raises(FeasibilityError):
        utility(-0.5)
    with pytest.raises(FeasibilityError):
        utility(np.array([1.0, -2.0]))


def test_utility_monotone_and_concave():
    rng = np.random.default_rng(11)
    c = rng.uniform(0, 1e6, (1000, 2))
    lo, hi = c.min(axis=1), c.max(axis=1)
    keep = lo < hi
    lo, hi = lo[keep], hi[keep]
    assert np.all(utility(lo) < utility(hi))
    mid = utility((lo + hi) / 2.0)
    assert np.all(mid >= (utility(lo) + utility(hi)) / 2.0 - 1e-12)


def test_utility_fn_enum():
    assert UtilityFn().evaluate(4.0) == 2.0


def test_discounted_total_matches_streamed_accumulation():
    rng = np.random.default_rng(3)
    consumption = rng.uniform(0, 5000, 26)
    beta = 0.95
    total = 0.0
    weight = 1.0
    for c in consumption:
        total += weight * math.sqrt(c)
        weight *= beta
    recomputed = discounted_total(beta, consumption)
    assert abs(total - recomputed) <= 1e-12 * (1.0 + abs(total))


class TestAssetGrid:
    def test_linear(self):
        g = AssetGrid.from_bounds(100.0, 11)
        assert g.points[0] == 0.0 and g.max == 100.0 and g.n_points == 11
        assert g.is_uniform

    def test_geometric_starts_at_zero(self):
        g = AssetGrid.from_bounds(100.0, 16, spacing="geometric")
        assert g.points[0] == 0.0 and g.max == 100.0
        assert np.all(np.diff(g.points) > 0)
        assert not g.is_uniform

    def test_rejects_bad_grids(self):
        with pytest.raises(ValueError):
            AssetGrid.from_bounds(-1.0, 8)
        with pytest.raises(ValueError):
            AssetGrid.from_bounds(10.0, 1)
        with pytest.raises(ValueError):
            AssetGrid(points=np.array([1.0, 2.0]))  # must start at 0
        with pytest.raises(ValueError):
            AssetGrid(points=np.array([0.0, 2.0, 2.0]))
        with pytest.raises(ValueError):
            AssetGrid.from_bounds(10.0, 8, spacing="quadratic")


class TestModelParams:
    def test_fractions_cover_unit_interval(self):
        p = ModelParams(horizon=5, discount=0.95, grid=AssetGrid.from_bounds(10, 4),
                        consumption_choices=5)
        assert np.array_equal(p.consumption_fractions(), [0.0, 0.25, 0.5, 0.75, 1.0])

    @pytest.mark.parametrize("kwargs", [
        {"horizon": 0}, {"discount": 0.0}, {"discount": 1.5}, {"consumption_choices": 1},
    ])
    def test_validation(self, kwargs):
        base = dict(horizon=5, discount=0.95, grid=AssetGrid.from_bounds(10, 4))
        base.update(kwargs)
        with pytest.raises(ValueError):
            ModelParams(**base)


class TestScheduleRealization:
    def _make(self, **overrides):
        base = dict(
            incomes=np.array([100.0, 130.0, 100.0]),
            returns=np.array([1.0, 0.9, 1.1]),
            shock_flags=np.array([False, True, False]),
            shock_sizes=np.array([0.2, 0.3, -0.1]),
            base_income=100.0,
        )
        base.update(overrides)
        return ScheduleRealization(**base)

    def test_consistent(self):
        r = self._make()
        assert len(r) == 3

    def test_rejects_income_shock_mismatch(self):
        with pytest.raises(ValueError):
            self._make(incomes=np.array([100.0, 120.0, 100.0]))

    def test_rejects_negative_income(self):
        with pytest.raises(ValueError):
            self._make(incomes=np.array([-1.0, 130.0, 100.0]))

    def test_rejects_nonpositive_return(self):
        with pytest.raises(ValueError):
            self._make(returns=np.array([0.0, 0.9, 1.1]))

    def test_replace_incomes_keeps_other_fields(self):
        r = self._make()
        r2 = r.replace_incomes(r.incomes + 10.0)
        assert np.array_equal(r2.returns, r.returns)
        assert np.array_equal(r2.incomes, r.incomes + 10.0)


def test_agent_state_validation():
    AgentState(assets=0.0, time=0, lookahead=0)
    with pytest.raises(FeasibilityError):
        AgentState(assets=-1.0, time=0, lookahead=0)
    with pytest.raises(ValueError):
        AgentState(assets=1.0, time=0, lookahead=-1)
    with pytest.raises(ValueError):
        AgentState(assets=1.0, time=0, lookahead=0, subsistence=-2.0)
