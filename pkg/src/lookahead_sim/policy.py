"""Online consumption loop for one agent and cohort fan-out.

Each step reveals the next lookahead window from the realization, solves the
window DP (or the stochastic Bellman choice at zero lookahead), applies the
subsistence floor-attempt rule, consumes, and advances assets with the
realized income and return.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import AgentState, ModelParams, ScheduleRealization
from .dp import LookaheadWindow, ValueTable, _window_solution
from .errors import FeasibilityError

#: documented column order of a serialized trajectory (one row per step)
TRAJECTORY_COLUMNS = (
    "step", "assets_before", "consumption", "income_realized",
    "return_realized", "discounted_utility_increment", "hardship_flag",
)


@dataclass(frozen=True)
class TrajectoryRecord:
    """Per-step record of one simulated agent path."""

    times: np.ndarray
    assets_before: np.ndarray
    consumption: np.ndarray
    income_realized: np.ndarray
    return_realized: np.ndarray
    discounted_utility_increment: np.ndarray
    hardship_flag: np.ndarray
    discount: float
    total_utility: float
    hardship_count: int
    lookahead: int
    subsistence: float

    def __len__(self) -> int:
        return int(self.times.size)

    def validate(self, atol: float = 1e-9) -> None:
        """Assert the trajectory invariants: consumption within budget, the
        asset-evolution identity, and the discounted-utility accounting."""
        a, c = self.assets_before, self.consumption
        y, r = self.income_realized, self.return_realized
        if np.any(c < -atol) or np.any(c > a * (1 + atol) + atol):
            raise FeasibilityError("consumption outside [0, assets]")
        nxt = r[:-1] * (a[:-1] - c[:-1]) + y[:-1]
        if not np.allclose(a[1:], nxt, rtol=0.0, atol=atol * (1.0 + np.abs(a[1:]).max(initial=0.0))):
            raise FeasibilityError("asset-evolution identity violated")
        if abs(self.recompute_total_utility() - self.total_utility) \
                > 1e-12 * (1.0 + abs(self.total_utility)):
            raise FeasibilityError("total utility does not match the logged path")

    def recompute_total_utility(self) -> float:
        """Discounted utility re-derived from the logged consumption path,
        accumulated in the same left-to-right order as the simulation."""
        total = 0.0
        weight = 1.0
        for c in self.consumption:
            total += weight * math.sqrt(c)
            weight *= self.discount
        return total

    def rows(self):
        """Serialized rows in TRAJECTORY_COLUMNS order."""
        for t in range(len(self)):
            yield (int(self.times[t]), float(self.assets_before[t]),
                   float(self.consumption[t]), float(self.income_realized[t]),
                   float(self.return_realized[t]),
                   float(self.discounted_utility_increment[t]),
                   int(self.hardship_flag[t]))


def run_agent(params: ModelParams,
              realization: ScheduleRealization,
              lookahead: int,
              table: ValueTable,
              subsistence: float = 0.0,
              initial_assets: float = 0.0,
              *,
              floor_attempt: bool = True) -> TrajectoryRecord:
    """Simulate one agent over the horizon.

    Consumption at step r is the lookahead-window DP solution. With the
    floor-attempt rule enabled, a choice below the subsistence level is
    raised to it when assets suffice; when assets themselves fall below
    subsistence the agent consumes everything and the step is flagged as a
    hardship event (hardship is recorded in either mode). Assets always
    advance with the realized income and return, even beyond the window.
    """
    T = params.horizon
    if len(realization) != T:
        raise ValueError(f"realization length {len(realization)} != horizon {T}")
    if table.horizon != T or table.discount != params.discount:
        raise ValueError("value table was built for different parameters")
    if initial_assets < 0:
        raise FeasibilityError(f"initial assets {initial_assets} < 0")

    assets = np.empty(T)
    consumption = np.empty(T)
    increments = np.empty(T)
    hardship = np.zeros(T, dtype=bool)

    a = float(initial_assets)
    total = 0.0
    weight = 1.0
    hardship_count = 0
    for r in range(T):
        state = AgentState(assets=a, time=r, lookahead=lookahead,
                           subsistence=subsistence, total_utility=total,
                           hardship_count=hardship_count)
        window = LookaheadWindow.from_realization(realization, r, lookahead, T)
        c, _ = _window_solution(state, window, table)

        if subsistence > 0.0 and a < subsistence:
            hardship[r] = True
            hardship_count += 1
            if floor_attempt:
                c = a
        elif floor_attempt and c < subsistence:
            c = subsistence

        if c < 0.0 or c > a * (1 + 1e-12) + 1e-12:
            raise FeasibilityError(f"step {r}: consumption {c} outside [0, {a}]")
        c = min(c, a)

        assets[r] = a
        consumption[r] = c
        inc = weight * math.sqrt(c)
        increments[r] = inc
        total += inc
        weight *= params.discount
        a = realization.returns[r] * (a - c) + realization.incomes[r]

    return TrajectoryRecord(
        times=np.arange(T),
        assets_before=assets,
        consumption=consumption,
        income_realized=realization.incomes.copy(),
        return_realized=realization.returns.copy(),
        discounted_utility_increment=increments,
        hardship_flag=hardship,
        discount=params.discount,
        total_utility=total,
        hardship_count=hardship_count,
        lookahead=lookahead,
        subsistence=subsistence,
    )


def run_cohort(configs, params: ModelParams, table: ValueTable,
               *, floor_attempt: bool = True) -> list[TrajectoryRecord]:
    """Run a list of (realization, lookahead, subsistence, initial_assets)
    agent configs against one shared value table, preserving order.

    Any agent failure aborts the cohort with the failing index attached.
    """
    records = []
    for idx, (realization, lookahead, subsistence, initial_assets) in enumerate(configs):
        try:
            records.append(run_agent(params, realization, lookahead, table,
                                      subsistence, initial_assets,
                                      floor_attempt=floor_attempt))
        except Exception as exc:
            raise type(exc)(f"agent {idx}: {exc}") from exc
    return records
