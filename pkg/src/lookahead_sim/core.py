"""Domain types shared by every other module.

Defines the utility function, the asset-evolution law, the asset grid, the
per-agent realized schedule, and the mutable per-agent simulation state.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FeasibilityError


class UtilityKind(enum.Enum):
    SQUARE_ROOT = "square_root"


def utility(consumption):
    """Per-step utility u(c) = sqrt(c). Rejects negative consumption.

    Accepts scalars or arrays; returns the same shape.
    """
    c = np.asarray(consumption, dtype=float)
    if np.any(c < 0):
        raise FeasibilityError(f"negative consumption not allowed: {consumption}")
    out = np.sqrt(c)
    return float(out) if np.isscalar(consumption) or out.ndim == 0 else out


@dataclass(frozen=True)
class UtilityFn:
    """Utility function selector. Only the square-root member exists today;
    the enum leaves room for other isoelastic members later."""

    kind: UtilityKind = UtilityKind.SQUARE_ROOT

    def evaluate(self, consumption):
        if self.kind is not UtilityKind.SQUARE_ROOT:
            raise NotImplementedError(self.kind)
        return utility(consumption)


def step_assets(assets: float, consumption: float, growth: float, income: float) -> float:
    """Advance assets one step: next = growth * (assets - consumption) + income.

    Feasibility (0 <= consumption <= assets, growth > 0, income >= 0) is
    enforced; the result is then nonnegative by construction.
    """
    if consumption < 0:
        raise FeasibilityError(f"consumption {consumption} < 0")
    if consumption > assets:
        raise FeasibilityError(f"consumption {consumption} exceeds assets {assets}")
    if growth <= 0:
        raise FeasibilityError(f"return multiplier must be positive, got {growth}")
    if income < 0:
        raise FeasibilityError(f"income {income} < 0")
    return growth * (assets - consumption) + income


def discounted_total(discount: float, consumptions) -> float:
    """Total discounted utility of a consumption path, summed left to right.

    Accumulation order matches run_agent's accumulator so recomputation from a
    logged path reproduces the accumulated value to float precision.
    """
    total = 0.0
    weight = 1.0
    for c in np.asarray(consumptions, dtype=float):
        total += weight * math.sqrt(c)
        weight *= discount
    return total


@dataclass(frozen=True)
class AssetGrid:
    """Sorted asset levels used as the state axis of the value table.

    points[0] is always 0 and points[-1] == max. Linear spacing is the
    default; geometric spacing (point 0 prepended to a geometric progression)
    is available for heavy-tailed asset ranges.
    """

    points: np.ndarray
    spacing: str = "linear"

    GEOMETRIC_ANCHOR_RATIO = 1e-6  # first positive point = max * this

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("asset grid needs at least two points")
        if pts[0] != 0.0:
            raise ValueError("asset grid must start at 0")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("asset grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_bounds(cls, max_assets: float, n_points: int, spacing: str = "linear") -> "AssetGrid":
        if max_assets <= 0:
            raise ValueError(f"grid max must be positive, got {max_assets}")
        if n_points < 2:
            raise ValueError("n_points must be >= 2")
        if spacing == "linear":
            pts = np.linspace(0.0, max_assets, n_points)
        elif spacing == "geometric":
            anchor = max_assets * cls.GEOMETRIC_ANCHOR_RATIO
            pts = np.concatenate([[0.0], np.geomspace(anchor, max_assets, n_points - 1)])
        else:
            raise ValueError(f"unknown grid spacing {spacing!r}")
        pts[-1] = max_assets
        return cls(points=pts, spacing=spacing)

    @property
    def n_points(self) -> int:
        return int(self.points.size)

    @property
    def min(self) -> float:
        return 0.0

    @property
    def max(self) -> float:
        return float(self.points[-1])

    @property
    def is_uniform(self) -> bool:
        return self.spacing == "linear"


@dataclass(frozen=True)
class ModelParams:
    """Horizon, discount factor, state grid, and consumption discretization."""

    horizon: int
    discount: float
    grid: AssetGrid
    consumption_choices: int = 65

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not 0.0 < self.discount <= 1.0:
            raise ValueError(f"discount must be in (0, 1], got {self.discount}")
        if self.consumption_choices < 2:
            raise ValueError("need at least 2 consumption choices")

    def consumption_fractions(self) -> np.ndarray:
        """Candidate consumptions as fractions {0, 1/(m-1), ..., 1} of assets."""
        return np.linspace(0.0, 1.0, self.consumption_choices)


@dataclass(frozen=True)
class ScheduleRealization:
    """One agent's realized incomes and returns over the horizon, plus the
    shock events that generated the incomes."""

    incomes: np.ndarray
    returns: np.ndarray
    shock_flags: np.ndarray
    shock_sizes: np.ndarray
    base_income: float

    def __post_init__(self):
        incomes = np.asarray(self.incomes, dtype=float)
        returns = np.asarray(self.returns, dtype=float)
        flags = np.asarray(self.shock_flags, dtype=bool)
        sizes = np.asarray(self.shock_sizes, dtype=float)
        n = incomes.size
        if not (returns.size == flags.size == sizes.size == n):
            raise ValueError("realization arrays must share one length")
        if np.any(incomes < 0):
            raise ValueError("incomes must be nonnegative")
        if np.any(returns <= 0):
            raise ValueError("returns must be positive")
        expected = np.where(flags, self.base_income * (1.0 + sizes), self.base_income)
        if not np.allclose(incomes, expected, rtol=0, atol=1e-9):
            raise ValueError("incomes inconsistent with base income and shocks")
        object.__setattr__(self, "incomes", incomes)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "shock_flags", flags)
        object.__setattr__(self, "shock_sizes", sizes)

    def __len__(self) -> int:
        return int(self.incomes.size)

    def replace_incomes(self, incomes: np.ndarray, base_income: float | None = None) -> "ScheduleRealization":
        """Copy with modified incomes (used by interventions). Skips the
        base-income consistency check since compensation breaks it on purpose."""
        new = object.__new__(ScheduleRealization)
        object.__setattr__(new, "incomes", np.asarray(incomes, dtype=float))
        object.__setattr__(new, "returns", self.returns)
        object.__setattr__(new, "shock_flags", self.shock_flags)
        object.__setattr__(new, "shock_sizes", self.shock_sizes)
        object.__setattr__(new, "base_income", self.base_income if base_income is None else base_income)
        if np.any(new.incomes < 0):
            raise ValueError("incomes must be nonnegative")
        return new


@dataclass
class AgentState:
    """Mutable per-agent state; confined to a single simulation worker."""

    assets: float
    time: int
    lookahead: int
    subsistence: float = 0.0
    total_utility: float = 0.0
    hardship_count: int = 0

    def __post_init__(self):
        if self.assets < 0:
            raise FeasibilityError(f"assets {self.assets} < 0")
        if self.time < 0:
            raise ValueError("time must be >= 0")
        if self.lookahead < 0:
            raise ValueError("lookahead must be >= 0")
        if self.subsistence < 0:
            raise ValueError("subsistence must be >= 0")
