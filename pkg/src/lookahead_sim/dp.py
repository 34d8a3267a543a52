"""Stochastic value table and per-step deterministic lookahead solver.

The value table is built by backward induction over the asset grid under
discretized income/return distributions. At simulation time each step solves
a deterministic dynamic program over the exactly-known window of upcoming
(income, return) values, with the stochastic table as terminal value. A
lookahead of 0 degenerates to the pure stochastic Bellman policy.

Consumption is discretized as fractions {0, 1/(m-1), ..., 1} of current
assets; ties in the argmax resolve to the smallest consumption. Off-grid
value lookups use piecewise-linear interpolation, clamped (and counted) above
the grid top.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .core import AssetGrid, AgentState, ModelParams
from .errors import FeasibilityError, GridTooSmallError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite distribution with sorted support and weights summing to 1."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        sup = np.asarray(self.support, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if sup.ndim != 1 or sup.size == 0 or sup.shape != w.shape:
            raise ValueError("support and weights must be matching 1-d arrays")
        if not np.all(np.isfinite(sup)):
            raise ValueError("support must be finite")
        if np.any(np.diff(sup) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "weights", w)

    @classmethod
    def merged(cls, support, weights) -> "DiscreteDistribution":
        """Build from possibly unsorted/duplicated atoms, merging duplicates."""
        sup = np.asarray(support, dtype=float)
        w = np.asarray(weights, dtype=float)
        order = np.argsort(sup, kind="stable")
        sup, w = sup[order], w[order]
        keep_sup, keep_w = [sup[0]], [w[0]]
        for v, p in zip(sup[1:], w[1:]):
            if v == keep_sup[-1]:
                keep_w[-1] += p
            else:
                keep_sup.append(v)
                keep_w.append(p)
        return cls(np.array(keep_sup), np.array(keep_w))

    def mean(self) -> float:
        return float(self.support @ self.weights)

    def sha256(self) -> str:
        payload = ",".join(repr(float(v)) for v in self.support)
        payload += ";" + ",".join(repr(float(v)) for v in self.weights)
        return hashlib.sha256(payload.encode()).hexdigest()


def discretize_uniform(lo: float, hi: float, n_nodes: int) -> DiscreteDistribution:
    """Equal-weight midpoint discretization of uniform[lo, hi]."""
    if not lo < hi:
        raise ValueError(f"degenerate interval [{lo}, {hi}]")
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    width = (hi - lo) / n_nodes
    nodes = lo + (np.arange(n_nodes) + 0.5) * width
    weights = np.full(n_nodes, 1.0 / n_nodes)
    return DiscreteDistribution(nodes, weights)


# ---------------------------------------------------------------------------
# numba kernels
#
# All kernels share one interpolation rule: piecewise-linear on the grid,
# clamped to the top value above the grid (clamps are counted and surfaced).
# `step > 0` marks a uniform grid and enables direct index arithmetic; any
# other spacing falls back to binary search. Strict IEEE semantics (no
# fastmath) keep results deterministic and oracle-comparable.
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _lerp_clamped(points, values, step, x):
    n = points.shape[0]
    if x >= points[n - 1]:
        return values[n - 1], x > points[n - 1]
    if step > 0.0:
        i0 = int(x / step)
        if i0 > n - 2:
            i0 = n - 2
        if x < points[i0]:
            i0 -= 1
    else:
        i0 = np.searchsorted(points, x, side="right") - 1
        if i0 > n - 2:
            i0 = n - 2
        if i0 < 0:
            i0 = 0
    w = (x - points[i0]) / (points[i0 + 1] - points[i0])
    return (1.0 - w) * values[i0] + w * values[i0 + 1], False


@njit(cache=True)
def _build_table_kernel(points, step, fracs, discount, horizon,
                        y_nodes, y_weights, r_nodes, r_weights):
    nx = points.shape[0]
    m = fracs.shape[0]
    n_y = y_nodes.shape[0]
    n_r = r_nodes.shape[0]
    V = np.zeros((horizon + 1, nx))
    clamped = 0
    for t in range(horizon - 1, -1, -1):
        nxt = V[t + 1]
        for i in range(nx):
            x = points[i]
            best = -np.inf
            for j in range(m):
                c = fracs[j] * x
                s = x - c
                expected = 0.0
                for a in range(n_r):
                    rs = r_nodes[a] * s
                    wr = r_weights[a]
                    for b in range(n_y):
                        val, hit = _lerp_clamped(points, nxt, step, rs + y_nodes[b])
                        if hit:
                            clamped += 1
                        expected += wr * y_weights[b] * val
                total = np.sqrt(c) + discount * expected
                if total > best:  # first maximizer = smallest consumption
                    best = total
            V[t, i] = best
    return V, clamped


@njit(cache=True)
def _stochastic_choice_kernel(points, step, fracs, discount, next_col,
                              y_nodes, y_weights, r_nodes, r_weights, assets):
    m = fracs.shape[0]
    n_y = y_nodes.shape[0]
    n_r = r_nodes.shape[0]
    best = -np.inf
    best_c = 0.0
    clamped = 0
    for j in range(m):
        c = fracs[j] * assets
        s = assets - c
        expected = 0.0
        for a in range(n_r):
            rs = r_nodes[a] * s
            wr = r_weights[a]
            for b in range(n_y):
                val, hit = _lerp_clamped(points, next_col, step, rs + y_nodes[b])
                if hit:
                    clamped += 1
                expected += wr * y_weights[b] * val
        total = np.sqrt(c) + discount * expected
        if total > best:
            best = total
            best_c = c
    return best_c, best, clamped


@njit(cache=True)
def _window_kernel(points, step, fracs, u_tab, save_tab, discount,
                   term_col, y_exact, r_exact, assets):
    """Deterministic backward induction over the exactly-known window.

    Slices are restricted to the grid prefix reachable from `assets`
    (forward bound via zero consumption); covered values are identical to
    full-grid induction since interpolation targets never leave the prefix.
    Returns (first consumption, window value in time-r units, clamp count).
    """
    nx = points.shape[0]
    m = fracs.shape[0]
    L = y_exact.shape[0]

    # points needed at each slice s = 1..L
    n_eff = np.empty(L + 1, dtype=np.int64)
    reach = r_exact[0] * assets + y_exact[0]
    for s in range(1, L + 1):
        if reach >= points[nx - 1]:
            idx = nx - 1
        elif step > 0.0:
            idx = int(reach / step)
            if reach > points[idx]:
                idx += 1
        else:
            idx = np.searchsorted(points, reach, side="left")
        n_eff[s] = idx + 1
        if s < L:
            reach = r_exact[s] * points[idx] + y_exact[s]

    clamped = 0
    cur = np.empty(nx)
    nxt = np.empty(nx)
    for i in range(n_eff[L]):
        cur[i] = term_col[i]
    for s in range(L - 1, 0, -1):
        rr = r_exact[s]
        yy = y_exact[s]
        ns = n_eff[s]
        top = n_eff[s + 1]
        for i in range(ns):
            best = -np.inf
            for j in range(m):
                val, hit = _lerp_clamped(points[:top], cur[:top], step,
                                         rr * save_tab[i, j] + yy)
                if hit:
                    clamped += 1
                total = u_tab[i, j] + discount * val
                if total > best:
                    best = total
            nxt[i] = best
        tmp = cur
        cur = nxt
        nxt = tmp

    top = n_eff[1]
    best = -np.inf
    best_c = 0.0
    for j in range(m):
        c = fracs[j] * assets
        val, hit = _lerp_clamped(points[:top], cur[:top], step,
                                 r_exact[0] * (assets - c) + y_exact[0])
        if hit:
            clamped += 1
        total = np.sqrt(c) + discount * val
        if total > best:
            best = total
            best_c = c
    return best_c, best, clamped


def _lerp_py(points: np.ndarray, values: np.ndarray, x: float) -> tuple[float, bool]:
    """Python twin of the kernel interpolation (same arithmetic order)."""
    n = points.size
    if x >= points[n - 1]:
        return float(values[n - 1]), bool(x > points[n - 1])
    i0 = int(np.searchsorted(points, x, side="right")) - 1
    i0 = min(max(i0, 0), n - 2)
    w = (x - points[i0]) / (points[i0 + 1] - points[i0])
    return float((1.0 - w) * values[i0] + w * values[i0 + 1]), False


# ---------------------------------------------------------------------------
# value table
# ---------------------------------------------------------------------------


@dataclass
class ValueTable:
    """Maximum expected discounted utility per (asset grid point, time).

    values[i, t] is the optimum from assets grid.points[i] at time t under
    purely stochastic future information; values[:, horizon] is 0. Immutable
    after build apart from the interpolation clamp counter.
    """

    grid: AssetGrid
    horizon: int
    discount: float
    values: np.ndarray
    income_dist: DiscreteDistribution
    return_dist: DiscreteDistribution
    consumption_choices: int
    build_clamp_count: int = 0
    clamp_count: int = 0
    _u_tab: np.ndarray | None = field(default=None, repr=False)
    _save_tab: np.ndarray | None = field(default=None, repr=False)
    _values_tm: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        expected = (self.grid.n_points, self.horizon + 1)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != {expected}")

    @property
    def _step(self) -> float:
        if self.grid.is_uniform:
            return float(self.grid.points[1] - self.grid.points[0])
        return 0.0

    def fractions(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.consumption_choices)

    def _choice_tables(self) -> tuple[np.ndarray, np.ndarray]:
        if self._u_tab is None:
            fr = self.fractions()
            self._u_tab = np.sqrt(np.outer(self.grid.points, fr))
            self._save_tab = np.outer(self.grid.points, 1.0 - fr)
        return self._u_tab, self._save_tab

    def column(self, t: int) -> np.ndarray:
        if self._values_tm is None:
            self._values_tm = np.ascontiguousarray(self.values.T)
        return self._values_tm[t]


def build_value_table(params: ModelParams,
                      income_dist: DiscreteDistribution,
                      return_dist: DiscreteDistribution,
                      *,
                      max_overshoot: float | None = None) -> ValueTable:
    """Backward induction of the stochastic value table.

    With `max_overshoot` set, raises GridTooSmallError when the worst-case
    next-period assets exceed the grid top by more than that relative
    tolerance; otherwise overshoot is clamped to the top grid cell and
    counted (scenario grids are sized analytically so residual overshoot is
    structural, not an error).
    """
    grid = params.grid
    y_max = float(income_dist.support[-1])
    r_max = float(return_dist.support[-1])
    if income_dist.support[0] < 0:
        raise ValueError("income support must be nonnegative")
    if return_dist.support[0] <= 0:
        raise ValueError("return support must be positive")
    if max_overshoot is not None:
        worst = r_max * grid.max + y_max
        if worst > grid.max * (1.0 + max_overshoot):
            raise GridTooSmallError(
                "grid max {:.6g} cannot absorb reachable assets {:.6g} "
                "(from x={:.6g}, c=0, y={:.6g}, R={:.6g})".format(
                    grid.max, worst, grid.max, y_max, r_max))

    step = float(grid.points[1] - grid.points[0]) if grid.is_uniform else 0.0
    values_tm, clamped = _build_table_kernel(
        grid.points, step, params.consumption_fractions(), params.discount,
        params.horizon, income_dist.support, income_dist.weights,
        return_dist.support, return_dist.weights)
    if clamped:
        log.debug("value table build clamped %d next-asset lookups to the grid top", clamped)
    return ValueTable(
        grid=grid,
        horizon=params.horizon,
        discount=params.discount,
        values=np.ascontiguousarray(values_tm.T),
        income_dist=income_dist,
        return_dist=return_dist,
        consumption_choices=params.consumption_choices,
        build_clamp_count=int(clamped),
    )


def interpolate_value(table: ValueTable, assets: float, t: int) -> float:
    """Piecewise-linear value lookup; clamps (and counts) above the grid top."""
    if assets < 0:
        raise FeasibilityError(f"assets {assets} < 0")
    if not 0 <= t <= table.horizon:
        raise ValueError(f"time {t} outside [0, {table.horizon}]")
    val, hit = _lerp_py(table.grid.points, table.values[:, t], float(assets))
    if hit:
        table.clamp_count += 1
        log.debug("value lookup clamped: assets %.6g above grid top %.6g", assets, table.grid.max)
    return val


def stochastic_choice(table: ValueTable, assets: float, t: int) -> float:
    """Consumption chosen by the pure stochastic Bellman policy at (assets, t).

    This is the zero-lookahead policy: expectation over the discretized
    income/return laws with the table as continuation value.
    """
    if assets < 0:
        raise FeasibilityError(f"assets {assets} < 0")
    if not 0 <= t < table.horizon:
        raise ValueError(f"decision time {t} outside [0, {table.horizon})")
    c, _value, clamped = _stochastic_choice_kernel(
        table.grid.points, table._step, table.fractions(), table.discount,
        table.column(t + 1), table.income_dist.support, table.income_dist.weights,
        table.return_dist.support, table.return_dist.weights, float(assets))
    table.clamp_count += int(clamped)
    return float(c)


@dataclass(frozen=True)
class LookaheadWindow:
    """Exactly-known (income, return) values for the next `len(incomes)`
    steps starting at `start`, in materialization order. A depth-0 window is
    empty and the solver falls back to the stochastic policy."""

    start: int
    depth: int
    incomes: np.ndarray
    returns: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.incomes, dtype=float)
        r = np.asarray(self.returns, dtype=float)
        if y.shape != r.shape or y.ndim != 1:
            raise ValueError("window incomes/returns must be matching 1-d arrays")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(r))):
            raise ValueError("window entries must be finite")
        if np.any(y < 0):
            raise ValueError("window incomes must be nonnegative")
        if np.any(r <= 0):
            raise ValueError("window returns must be positive")
        if self.start < 0 or self.depth < 0:
            raise ValueError("window start/depth must be nonnegative")
        if y.size > self.depth:
            raise ValueError("window holds more entries than its depth")
        object.__setattr__(self, "incomes", y)
        object.__setattr__(self, "returns", r)

    def __len__(self) -> int:
        return int(self.incomes.size)

    @classmethod
    def from_realization(cls, realization, start: int, depth: int, horizon: int) -> "LookaheadWindow":
        """Reveal the realized outcomes for steps start..start+depth-1,
        truncated at the horizon."""
        n = max(0, min(depth, horizon - start))
        return cls(start=start, depth=depth,
                   incomes=realization.incomes[start:start + n],
                   returns=realization.returns[start:start + n])


def _window_solution(state: AgentState, window: LookaheadWindow,
                     table: ValueTable) -> tuple[float, float]:
    """Window-DP consumption and objective value at the agent's state."""
    if state.assets < 0:
        raise FeasibilityError(f"assets {state.assets} below grid min")
    if window.start != state.time:
        raise ValueError(f"window starts at {window.start}, state at t={state.time}")
    L = len(window)
    if state.time + L > table.horizon:
        raise ValueError("window runs past the horizon")
    if L == 0:
        c, value, clamped = _stochastic_choice_kernel(
            table.grid.points, table._step, table.fractions(), table.discount,
            table.column(state.time + 1),
            table.income_dist.support, table.income_dist.weights,
            table.return_dist.support, table.return_dist.weights,
            float(state.assets))
        table.clamp_count += int(clamped)
        return float(c), float(value)
    u_tab, save_tab = table._choice_tables()
    c, value, clamped = _window_kernel(
        table.grid.points, table._step, table.fractions(), u_tab, save_tab,
        table.discount, table.column(state.time + L),
        window.incomes, window.returns, float(state.assets))
    table.clamp_count += int(clamped)
    return float(c), float(value)


def solve_lookahead_dp(state: AgentState, window: LookaheadWindow,
                       table: ValueTable) -> float:
    """First consumption of the sequence maximizing within-window discounted
    utility plus the interpolated table value at the window's end."""
    c, _value = _window_solution(state, window, table)
    return c
