"""Experiment world construction: income cohorts, shock and return processes,
interventions, asset endowments, scenario files, and the seed-splitting
scheme.

Cohort brackets reproduce the published weekly-income boundaries from a
synthetic sample shipped with the package (no survey microdata): outliers are
removed by the 1.5*IQR proximity rule and the remaining range is split into
four equal-width segments.
"""

from __future__ import annotations

import importlib.resources
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import AssetGrid, ModelParams, ScheduleRealization
from .dp import DiscreteDistribution, ValueTable, build_value_table, discretize_uniform
from .errors import ConfigError

COHORT_NAMES = ("low", "low-middle", "high-middle", "high")

#: fraction of the cohort midpoint income used as the default weekly
#: subsistence level (monotone across cohorts; survey dollar values are not
#: published)
DEFAULT_SUBSISTENCE_FRACTION = 0.3

DEFAULT_INITIAL_ASSETS = 123_840.0

# seed-splitting realms: a cell's seed is SeedSequence((master, realm, *key))
# so adding sweep values never perturbs existing cells
REALM_REALIZATION = 1
REALM_THEORY = 2
REALM_INCOME_SAMPLE = 3


def cell_seed(master_seed: int, realm: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((int(master_seed), int(realm)) + tuple(int(k) for k in key))


@dataclass(frozen=True)
class Cohort:
    """Income bracket group; agents differ only in lookahead."""

    name: str
    income_range: tuple[float, float]
    subsistence: float
    n_agents: int

    def __post_init__(self):
        lo, hi = self.income_range
        if not 0 <= lo < hi:
            raise ValueError(f"bad income range {self.income_range}")
        if self.subsistence < 0:
            raise ValueError("subsistence must be nonnegative")
        if self.n_agents < 0:
            raise ValueError("n_agents must be nonnegative")

    def midpoint(self) -> float:
        lo, hi = self.income_range
        return 0.5 * (lo + hi)

    def sample_base_income(self, rng: np.random.Generator) -> float:
        lo, hi = self.income_range
        return float(rng.uniform(lo, hi))


def build_cohorts(raw_incomes, n_total: int,
                  subsistence_fraction: float = DEFAULT_SUBSISTENCE_FRACTION) -> list[Cohort]:
    """IQR-filter raw incomes and partition the surviving range into four
    equal-width cohorts, splitting n_total agents evenly."""
    raw = np.asarray(raw_incomes, dtype=float)
    if raw.size == 0:
        raise ConfigError("empty income sample")
    if np.any(raw < 0):
        raise ConfigError("raw incomes must be nonnegative")
    q1, q3 = np.percentile(raw, [25.0, 75.0])
    iqr = q3 - q1
    kept = raw[(raw >= q1 - 1.5 * iqr) & (raw <= q3 + 1.5 * iqr)]
    if np.unique(kept).size < 4:
        raise ConfigError("fewer than 4 distinct incomes after outlier filtering")
    lo, hi = float(kept.min()), float(kept.max())
    width = (hi - lo) / 4.0
    per_cohort = n_total // 4
    cohorts = []
    for i, name in enumerate(COHORT_NAMES):
        lo_i = lo + i * width
        hi_i = lo + (i + 1) * width if i < 3 else hi
        midpoint = 0.5 * (lo_i + hi_i)
        cohorts.append(Cohort(name=name, income_range=(lo_i, hi_i),
                              subsistence=subsistence_fraction * midpoint,
                              n_agents=per_cohort))
    return cohorts


def synthesize_income_sample(n: int = 10_000, seed: int = 20190117) -> np.ndarray:
    """Deterministic synthetic weekly-income sample that reproduces the
    published cohort bracket boundaries after IQR filtering.

    The bulk is uniform over the published overall range with the exact range
    endpoints planted, plus a handful of extreme values beyond the upper IQR
    fence that the filter must remove.
    """
    lo, hi = 1.22, 4498.29
    rng = np.random.default_rng(cell_seed(seed, REALM_INCOME_SAMPLE))
    n_outliers = 8
    body = rng.uniform(lo, hi, n - 2 - n_outliers)
    outliers = rng.uniform(20_000.0, 500_000.0, n_outliers)
    sample = np.concatenate([[lo, hi], body, outliers])
    rng.shuffle(sample)
    return sample


def load_income_sample(path: str | Path | None = None) -> np.ndarray:
    """Load an income sample CSV (one value per line); defaults to the
    synthetic sample shipped with the package."""
    if path is None:
        ref = importlib.resources.files("lookahead_sim").joinpath("data/income_sample.csv")
        text = ref.read_text()
    else:
        text = Path(path).read_text()
    return np.array([float(line) for line in text.splitlines() if line.strip()])


@dataclass(frozen=True)
class ShockProcess:
    """Bernoulli schedule shocks with uniform multiplicative sizes."""

    probability: float = 0.5
    size_range: tuple[float, float] = (-0.4, 0.4)
    n_nodes: int = 7

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("shock probability must lie in [0, 1]")
        lo, hi = self.size_range
        if not -1.0 < lo < hi:
            raise ValueError(f"bad shock size range {self.size_range}")
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be >= 1")

    def income_distribution(self, base_income: float) -> DiscreteDistribution:
        """Discretized per-step income law: a no-shock atom at the base income
        mixed with midpoint nodes of base*(1+size)."""
        p = self.probability
        if p == 0.0:
            return DiscreteDistribution(np.array([base_income]), np.array([1.0]))
        nodes = discretize_uniform(*self.size_range, self.n_nodes)
        support = base_income * (1.0 + nodes.support)
        weights = p * nodes.weights
        if p < 1.0:
            support = np.concatenate([support, [base_income]])
            weights = np.concatenate([weights, [1.0 - p]])
        return DiscreteDistribution.merged(support, weights)

    def sample(self, rng: np.random.Generator, horizon: int) -> tuple[np.ndarray, np.ndarray]:
        flags = rng.random(horizon) < self.probability
        sizes = rng.uniform(*self.size_range, horizon)
        return flags, sizes


@dataclass(frozen=True)
class ReturnRegime:
    """Per-step asset return law. The baseline draws uniform[0.9, 1.1] plus a
    uniform[-0.05, 0.05] variance band (clamped positive); the negative and
    positive regimes are plain uniforms."""

    kind: str = "baseline"

    CORE = {"baseline": (0.9, 1.1), "negative": (0.75, 0.95), "positive": (1.05, 1.25)}
    BAND = {"baseline": 0.05, "negative": 0.0, "positive": 0.0}

    def __post_init__(self):
        if self.kind not in self.CORE:
            raise ValueError(f"unknown return regime {self.kind!r}")

    def bounds(self) -> tuple[float, float]:
        lo, hi = self.CORE[self.kind]
        band = self.BAND[self.kind]
        return lo - band, hi + band

    def distribution(self, n_nodes: int = 5) -> DiscreteDistribution:
        return discretize_uniform(*self.bounds(), n_nodes)

    def sample(self, rng: np.random.Generator, horizon: int) -> np.ndarray:
        lo, hi = self.CORE[self.kind]
        draws = rng.uniform(lo, hi, horizon)
        band = self.BAND[self.kind]
        if band:
            draws = draws + rng.uniform(-band, band, horizon)
        return np.maximum(draws, 1e-9)


@dataclass(frozen=True)
class Intervention:
    """Policy modification: predictability-pay compensation on negative
    shocks, or a mandated minimum lookahead."""

    kind: str = "none"
    min_lookahead_weeks: int = 0
    compensation_multiplier: float = 2.0
    compensation_rule: str = "shortfall"

    KINDS = ("none", "compensation", "min_lookahead")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown intervention kind {self.kind!r}")
        if self.kind == "min_lookahead" and self.min_lookahead_weeks < 1:
            raise ValueError("min_lookahead intervention needs min_lookahead_weeks >= 1")
        if self.compensation_rule not in ("shortfall", "earnings"):
            raise ValueError(f"unknown compensation rule {self.compensation_rule!r}")


def generate_realization(cohort, shocks: ShockProcess, regime: ReturnRegime,
                         horizon: int, seed) -> ScheduleRealization:
    """Sample one agent's realized schedule. `cohort` is a Cohort (base income
    at its midpoint) or an explicit base income.

    Incomes and returns come from independent child streams of the seed, so
    the same seed under a different return regime keeps the income path.
    """
    base = cohort.midpoint() if isinstance(cohort, Cohort) else float(cohort)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    child_inc, child_ret = ss.spawn(2)
    flags, sizes = shocks.sample(np.random.default_rng(child_inc), horizon)
    returns = regime.sample(np.random.default_rng(child_ret), horizon)
    incomes = np.where(flags, base * (1.0 + sizes), base)
    return ScheduleRealization(incomes=incomes, returns=returns,
                               shock_flags=flags, shock_sizes=sizes,
                               base_income=base)


def apply_intervention(realization: ScheduleRealization, lookahead: int,
                       intervention: Intervention) -> tuple[ScheduleRealization, int]:
    """Transform (realization, lookahead) under an intervention.

    Compensation adds, on each negative-shock step, twice the shortfall
    relative to the base income (or twice the shocked earnings under the
    alternative rule). Minimum lookahead never lowers the agent's own level.
    """
    if intervention.kind == "none":
        return realization, lookahead
    if intervention.kind == "min_lookahead":
        return realization, max(lookahead, intervention.min_lookahead_weeks)
    negative = realization.shock_flags & (realization.shock_sizes < 0)
    if intervention.compensation_rule == "shortfall":
        extra = intervention.compensation_multiplier * (realization.base_income - realization.incomes)
    else:
        extra = intervention.compensation_multiplier * realization.incomes
    incomes = np.where(negative, realization.incomes + extra, realization.incomes)
    return realization.replace_incomes(incomes), lookahead


def assign_assets(cohorts: list[Cohort], override: float | None = None) -> dict[str, np.ndarray]:
    """Initial assets per agent: the median population asset value unless
    overridden (e.g. the working-class median, or 0)."""
    if override is not None and override < 0:
        raise ConfigError(f"initial assets override must be nonnegative, got {override}")
    value = DEFAULT_INITIAL_ASSETS if override is None else float(override)
    return {c.name: np.full(c.n_agents, value) for c in cohorts}


def reachable_assets_bound(initial_assets: float, max_income: float,
                           max_return: float, horizon: int) -> float:
    """Analytic upper bound on assets reachable over the horizon:
    a0 * R^T + y_max * sum_{i<T} R^i."""
    if max_return == 1.0:
        geo = float(horizon)
    else:
        geo = (max_return ** horizon - 1.0) / (max_return - 1.0)
    return initial_assets * max_return ** horizon + max_income * geo


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

SCHEMA_VERSION = 1

_SCENARIO_DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "horizon": 26,
    "discount": 0.95,
    "grid": {"n_points": 512, "spacing": "linear"},
    "consumption_choices": 65,
    "initial_assets": DEFAULT_INITIAL_ASSETS,
    "n_agents_per_cohort": 27,
    "base_income_mode": "midpoint",
    "subsistence_fraction": DEFAULT_SUBSISTENCE_FRACTION,
    "subsistence_floor": True,
    "shocks": {"probability": 0.5, "size_range": [-0.4, 0.4], "n_nodes": 7},
    "returns": {"regime": "baseline", "n_nodes": 5},
    "compensation_rule": "shortfall",
    "income_sample": "builtin",
    "master_seed": 20240117,
}


def _check_keys(section: dict, allowed: dict, path: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key '{path}{key}'")
        if isinstance(allowed[key], dict):
            if not isinstance(section[key], dict):
                raise ConfigError(f"{path}{key} must be a table of keys")
            _check_keys(section[key], allowed[key], f"{path}{key}.")


def _merged(defaults: dict, overrides: dict) -> dict:
    out = {}
    for key, default in defaults.items():
        if key in overrides and isinstance(default, dict):
            out[key] = _merged(default, overrides[key])
        elif key in overrides:
            out[key] = overrides[key]
        else:
            out[key] = default
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario: world parameters plus the derived cohorts."""

    horizon: int
    discount: float
    grid_points: int
    grid_spacing: str
    consumption_choices: int
    initial_assets: float
    n_agents_per_cohort: int
    base_income_mode: str
    subsistence_floor: bool
    shocks: ShockProcess
    return_regime: ReturnRegime
    return_nodes: int
    compensation_rule: str
    master_seed: int
    cohorts: list[Cohort] = field(default_factory=list)

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("scenario must be a table of keys")
        _check_keys(raw, _SCENARIO_DEFAULTS, "")
        doc = _merged(_SCENARIO_DEFAULTS, raw)
        if doc["schema_version"] != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {doc['schema_version']!r}")
        try:
            shocks = ShockProcess(probability=float(doc["shocks"]["probability"]),
                                  size_range=tuple(doc["shocks"]["size_range"]),
                                  n_nodes=int(doc["shocks"]["n_nodes"]))
            regime = ReturnRegime(kind=doc["returns"]["regime"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if doc["base_income_mode"] not in ("midpoint", "sampled"):
            raise ConfigError(f"unknown base_income_mode {doc['base_income_mode']!r}")
        if doc["horizon"] < 1:
            raise ConfigError("horizon must be >= 1")
        if not 0 < doc["discount"] <= 1:
            raise ConfigError("discount must be in (0, 1]")
        if doc["initial_assets"] < 0:
            raise ConfigError("initial_assets must be nonnegative")
        if doc["compensation_rule"] not in ("shortfall", "earnings"):
            raise ConfigError(f"unknown compensation_rule {doc['compensation_rule']!r}")
        sample = doc["income_sample"]
        raw_incomes = load_income_sample(None if sample == "builtin" else sample)
        try:
            cohorts = build_cohorts(raw_incomes, 4 * int(doc["n_agents_per_cohort"]),
                                    float(doc["subsistence_fraction"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(
            horizon=int(doc["horizon"]),
            discount=float(doc["discount"]),
            grid_points=int(doc["grid"]["n_points"]),
            grid_spacing=str(doc["grid"]["spacing"]),
            consumption_choices=int(doc["consumption_choices"]),
            initial_assets=float(doc["initial_assets"]),
            n_agents_per_cohort=int(doc["n_agents_per_cohort"]),
            base_income_mode=doc["base_income_mode"],
            subsistence_floor=bool(doc["subsistence_floor"]),
            shocks=shocks,
            return_regime=regime,
            return_nodes=int(doc["returns"]["n_nodes"]),
            compensation_rule=doc["compensation_rule"],
            master_seed=int(doc["master_seed"]),
            cohorts=cohorts,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ScenarioConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        except OSError as exc:
            raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
        try:
            return cls.from_dict(raw)
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    def model_params(self, cohort: Cohort, regime: ReturnRegime | None = None) -> ModelParams:
        regime = regime or self.return_regime
        y_max = cohort.income_range[1] * (1.0 + self.shocks.size_range[1])
        r_max = regime.bounds()[1]
        bound = reachable_assets_bound(self.initial_assets, y_max, r_max, self.horizon)
        grid = AssetGrid.from_bounds(bound, self.grid_points, self.grid_spacing)
        return ModelParams(horizon=self.horizon, discount=self.discount, grid=grid,
                           consumption_choices=self.consumption_choices)

    def build_table(self, cohort: Cohort, regime: ReturnRegime | None = None) -> ValueTable:
        """Value table for one cohort under a return regime, using the
        cohort-midpoint income mixture as the agent's belief."""
        regime = regime or self.return_regime
        params = self.model_params(cohort, regime)
        income_dist = self.shocks.income_distribution(cohort.midpoint())
        return build_value_table(params, income_dist, regime.distribution(self.return_nodes))

    def with_regime(self, kind: str) -> "ScenarioConfig":
        return replace(self, return_regime=ReturnRegime(kind=kind))
