"""Independent plain-Python implementations of the DP quantities.

These mirror the mathematical definitions directly (scalar loops, no numba,
no sub-grid shortcuts) and share only the interpolation rule and accumulation
order, so agreement to 1e-9 checks the production path end to end.
"""

import math

import numpy as np


def lerp_clamped(points, values, x):
    """Piecewise-linear lookup clamped above the grid top."""
    n = len(points)
    if x >= points[n - 1]:
        return float(values[n - 1])
    i = 0
    while i < n - 2 and points[i + 1] <= x:
        i += 1
    w = (x - points[i]) / (points[i + 1] - points[i])
    return float((1.0 - w) * values[i] + w * values[i + 1])


def table_oracle(points, fracs, discount, horizon, y_nodes, y_weights, r_nodes, r_weights):
    """Backward-induction value table by direct recursion (returns shape
    (n_points, horizon+1) like the production table)."""
    nx = len(points)
    V = np.zeros((nx, horizon + 1))
    for t in range(horizon - 1, -1, -1):
        nxt = V[:, t + 1]
        for i in range(nx):
            x = points[i]
            best = -math.inf
            for f in fracs:
                c = f * x
                expected = 0.0
                for rv, rw in zip(r_nodes, r_weights):
                    rs = rv * (x - c)
                    for yv, yw in zip(y_nodes, y_weights):
                        expected += rw * yw * lerp_clamped(points, nxt, rs + yv)
                total = math.sqrt(c) + discount * expected
                if total > best:
                    best = total
            V[i, t] = best
    return V


def stochastic_choice_oracle(points, next_col, fracs, discount,
                             y_nodes, y_weights, r_nodes, r_weights, assets):
    """One-step stochastic Bellman argmax at exact assets (c, value)."""
    best = -math.inf
    best_c = 0.0
    for f in fracs:
        c = f * assets
        expected = 0.0
        for rv, rw in zip(r_nodes, r_weights):
            rs = rv * (assets - c)
            for yv, yw in zip(y_nodes, y_weights):
                expected += rw * yw * lerp_clamped(points, next_col, rs + yv)
        total = math.sqrt(c) + discount * expected
        if total > best:
            best = total
            best_c = c
    return best_c, best


def window_oracle(points, term_col, fracs, discount, y_exact, r_exact, assets):
    """Deterministic window DP on the full grid (c, value)."""
    L = len(y_exact)
    cur = [float(v) for v in term_col]
    for s in range(L - 1, 0, -1):
        nxt = []
        for x in points:
            best = -math.inf
            for f in fracs:
                c = f * x
                val = lerp_clamped(points, cur, r_exact[s] * (x - c) + y_exact[s])
                total = math.sqrt(c) + discount * val
                if total > best:
                    best = total
            nxt.append(best)
        cur = nxt
    best = -math.inf
    best_c = 0.0
    for f in fracs:
        c = f * assets
        val = lerp_clamped(points, cur, r_exact[0] * (assets - c) + y_exact[0])
        total = math.sqrt(c) + discount * val
        if total > best:
            best = total
            best_c = c
    return best_c, best


def agent_oracle(table, realization, lookahead, subsistence, initial_assets,
                 floor_attempt=True):
    """Step-by-step online loop composed from the plain-Python solvers;
    returns the consumption sequence."""
    points = table.grid.points
    fracs = table.fractions()
    horizon = table.horizon
    a = float(initial_assets)
    consumptions = []
    for r in range(horizon):
        L = min(lookahead, horizon - r)
        if L == 0:
            c, _ = stochastic_choice_oracle(
                points, table.values[:, r + 1], fracs, table.discount,
                table.income_dist.support, table.income_dist.weights,
                table.return_dist.support, table.return_dist.weights, a)
        else:
            c, _ = window_oracle(points, table.values[:, r + L], fracs, table.discount,
                                 realization.incomes[r:r + L],
                                 realization.returns[r:r + L], a)
        if subsistence > 0 and a < subsistence:
            if floor_attempt:
                c = a
        elif floor_attempt and c < subsistence:
            c = subsistence
        c = min(c, a)
        consumptions.append(c)
        a = realization.returns[r] * (a - c) + realization.incomes[r]
    return np.array(consumptions)


def random_micro_instance(rng):
    """Random small DP instance within the oracle-equivalence bounds
    (horizon <= 4, <= 16 grid points, <= 8 consumption choices)."""
    horizon = int(rng.integers(2, 5))
    n_points = int(rng.integers(8, 17))
    m = int(rng.integers(4, 9))
    grid_max = float(10.0 ** rng.uniform(0.5, 2.0))
    discount = float(rng.uniform(0.9, 1.0))
    n_y = int(rng.integers(1, 4))
    y_nodes = np.sort(rng.uniform(0.0, grid_max / 6.0, n_y))
    y_nodes += np.arange(n_y) * 1e-9 * grid_max  # keep support strictly increasing
    y_weights = rng.dirichlet(np.ones(n_y))
    n_r = int(rng.integers(1, 4))
    r_nodes = np.sort(rng.uniform(0.7, 1.3, n_r))
    r_nodes += np.arange(n_r) * 1e-9
    r_weights = rng.dirichlet(np.ones(n_r))
    return dict(horizon=horizon, n_points=n_points, m=m, grid_max=grid_max,
                discount=discount, y_nodes=y_nodes, y_weights=y_weights,
                r_nodes=r_nodes, r_weights=r_weights)
