"""Executable oracles for the lookahead-advantage results.

The adversarial instance: undiscounted utility, unit returns, zero starting
assets, horizon k; income is the full scale Y for the first half of the
horizon and x*Y afterwards, with x drawn uniformly on [0, 1] and hidden from
no-lookahead agents. Feasibility here follows the instance's convention that
income is usable within its step: assets after step t are
x_{t+1} = x_t + y_t - c_t and must stay nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dp import discretize_uniform
from .errors import FeasibilityError


@dataclass(frozen=True)
class GapInstance:
    """One draw of the adversarial income schedule."""

    k: int
    income_scale: float
    hidden_draw: float

    def __post_init__(self):
        if self.k < 2 or self.k % 2 != 0:
            raise ValueError(f"k must be even and >= 2, got {self.k}")
        if self.income_scale <= 0:
            raise ValueError("income scale must be positive")
        if not 0.0 <= self.hidden_draw <= 1.0:
            raise ValueError("hidden draw must lie in [0, 1]")

    def incomes(self) -> np.ndarray:
        y = np.full(self.k, self.income_scale)
        y[self.k // 2:] = self.hidden_draw * self.income_scale
        return y


def full_lookahead_utility(instance: GapInstance) -> float:
    """Utility of the informed agent consuming (1+x)/2 * Y every step.

    Verifies step-by-step feasibility of the uniform plan (running assets
    never go negative) and returns k * sqrt((1+x)/2) * sqrt(Y).
    """
    k, scale, x = instance.k, instance.income_scale, instance.hidden_draw
    c = 0.5 * (1.0 + x) * scale
    assets = 0.0
    for y in instance.incomes():
        assets = assets + y - c
        if assets < -1e-9 * scale:
            raise FeasibilityError("uniform consumption infeasible; instance is malformed")
    return k * math.sqrt(0.5 * (1.0 + x)) * math.sqrt(scale)


def k_delay_policy(consumptions, k: int) -> np.ndarray:
    """Replay a lookahead agent's consumption shifted k steps later.

    The first k steps consume nothing, so the schedule stays feasible for any
    nonnegative income sequence; with no discounting its total utility is the
    original utility minus the last k terms.
    """
    c = np.asarray(consumptions, dtype=float)
    if k < 0:
        raise ValueError("delay must be nonnegative")
    z = np.zeros_like(c)
    if k < c.size:
        z[k:] = c[: c.size - k]
    return z


def undiscounted_utility(consumptions) -> float:
    total = 0.0
    for c in np.asarray(consumptions, dtype=float):
        total += math.sqrt(c)
    return total


def concavity_helper_check(a: float, w: float) -> bool:
    """Check sqrt(w) <= sqrt(a) + (w-a)/(2 sqrt(a)) - (w-a)^2 / 8 on the
    domain a in (1/2, 1), w in (0, 1).

    A 1e-12 guard absorbs float rounding near the w = a equality point; the
    inequality's true margin exceeds it everywhere else on the domain.
    """
    if not 0.5 < a < 1.0:
        raise ValueError(f"a must lie in (1/2, 1), got {a}")
    if not 0.0 < w < 1.0:
        raise ValueError(f"w must lie in (0, 1), got {w}")
    lhs = math.sqrt(w)
    rhs = math.sqrt(a) + (w - a) / (2.0 * math.sqrt(a)) - (w - a) ** 2 / 8.0
    return lhs <= rhs + 1e-12


# ---------------------------------------------------------------------------
# no-lookahead policies and the gap harness
# ---------------------------------------------------------------------------
#
# A policy is a factory: policy(instance) -> consume(t, incomes_so_far,
# available) -> consumption. Honest no-lookahead policies must decide from
# past incomes and the known distribution only; instance.hidden_draw is
# passed so that the clairvoyant upper-bound policy can exist, and nothing
# enforces that a policy ignores it.


def clairvoyant_policy(instance: GapInstance):
    """Upper bound: consumes the informed uniform rate (reads the draw)."""
    rate = 0.5 * (1.0 + instance.hidden_draw) * instance.income_scale

    def consume(t, incomes_so_far, available):
        return min(rate, available)

    return consume


def fixed_rate_policy(instance: GapInstance):
    """Distribution-optimal fixed rate (1 + E[x])/2 * Y, capped by budget."""
    rate = 0.75 * instance.income_scale

    def consume(t, incomes_so_far, available):
        return min(rate, available)

    return consume


class _ShiftedStochasticAgent:
    """Algorithm's zero-lookahead agent bridged onto the instance timing.

    With unit returns the instance state x_t + y_t equals the assets of a
    strict-budget agent whose incomes arrive one step early, so the agent
    runs a stochastic Bellman policy against a time-varying value table of
    that shifted process (first-half incomes are a known atom at Y, later
    ones uniform on [0, Y], nothing after the horizon).
    """

    def __init__(self, k: int, scale: float, n_grid: int = 257,
                 n_income_nodes: int = 9, choices: int = 65):
        self.k = k
        self.scale = scale
        self.fracs = np.linspace(0.0, 1.0, choices)
        self.points = np.linspace(0.0, k * scale, n_grid)
        atom = (np.array([scale]), np.array([1.0]))
        tail = discretize_uniform(0.0, scale, n_income_nodes)
        nothing = (np.array([0.0]), np.array([1.0]))
        self.step_dists = []
        for t in range(k):
            if t < k // 2 - 1:
                self.step_dists.append(atom)
            elif t < k - 1:
                self.step_dists.append((tail.support, tail.weights))
            else:
                self.step_dists.append(nothing)
        self.values = self._build()

    def _build(self) -> np.ndarray:
        V = np.zeros((self.k + 1, self.points.size))
        save = np.outer(self.points, 1.0 - self.fracs)
        u_tab = np.sqrt(np.outer(self.points, self.fracs))
        for t in range(self.k - 1, -1, -1):
            nodes, weights = self.step_dists[t]
            nxt = save[:, :, None] + nodes[None, None, :]
            cont = np.interp(nxt, self.points, V[t + 1]) @ weights
            V[t] = (u_tab + cont).max(axis=1)
        return V

    def consume(self, t, incomes_so_far, available):
        cands = self.fracs * available
        nodes, weights = self.step_dists[t]
        nxt = (available - cands)[:, None] + nodes[None, :]
        cont = np.interp(nxt, self.points, self.values[t + 1]) @ weights
        return float(cands[int(np.argmax(np.sqrt(cands) + cont))])


def table_agent_policy(n_grid: int = 257):
    """Factory for the zero-lookahead table agent (tables cached per (k, Y))."""
    cache: dict[tuple[int, float], _ShiftedStochasticAgent] = {}

    def policy(instance: GapInstance):
        key = (instance.k, instance.income_scale)
        if key not in cache:
            cache[key] = _ShiftedStochasticAgent(instance.k, instance.income_scale, n_grid)
        return cache[key].consume

    return policy


@dataclass(frozen=True)
class GapStats:
    """Empirical distribution of clairvoyant minus policy utility."""

    k: int
    income_scale: float
    n_trials: int
    mean: float
    std: float
    gaps: np.ndarray
    draws: np.ndarray
    policy_utilities: np.ndarray

    def standard_error(self) -> float:
        return self.std / math.sqrt(self.n_trials)


def measure_gap(k: int, income_scale: float, n_trials: int, policy,
                *, seed: int = 0, antithetic: bool = True) -> GapStats:
    """Gap between full-lookahead utility and a no-lookahead policy's utility
    over repeated hidden draws (antithetic pairs x, 1-x by default).

    Raises FeasibilityError naming the trial if the policy overconsumes.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    rng = np.random.default_rng(seed)
    if antithetic:
        base = rng.random((n_trials + 1) // 2)
        draws = np.empty(2 * base.size)
        draws[0::2] = base
        draws[1::2] = 1.0 - base
        draws = draws[:n_trials]
    else:
        draws = rng.random(n_trials)

    gaps = np.empty(n_trials)
    totals = np.empty(n_trials)
    for i, x in enumerate(draws):
        instance = GapInstance(k=k, income_scale=income_scale, hidden_draw=float(x))
        incomes = instance.incomes()
        consume = policy(instance)
        assets = 0.0
        total = 0.0
        for t in range(k):
            available = assets + incomes[t]
            c = float(consume(t, incomes[: t + 1], available))
            if c < -1e-12 or c > available + 1e-9 * (1.0 + available):
                raise FeasibilityError(
                    f"trial {i}: policy consumed {c} with only {available} available at step {t}")
            c = min(max(c, 0.0), available)
            total += math.sqrt(c)
            assets = available - c
        totals[i] = total
        gaps[i] = full_lookahead_utility(instance) - total

    std = float(np.std(gaps, ddof=1)) if n_trials > 1 else 0.0
    return GapStats(k=k, income_scale=income_scale, n_trials=n_trials,
                    mean=float(np.mean(gaps)), std=std, gaps=gaps,
                    draws=draws, policy_utilities=totals)
