"""Experiment recipes: lookahead sweep, return regimes, interventions, and
the theory gap, each emitting tidy CSV (raw per-cell rows plus a summary).

Rows are assembled in deterministic cell-key order regardless of worker
completion, and floats are written via repr, so a fixed master seed yields
byte-identical files. No chart rendering here: the CSV is the interface.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from . import theory
from .errors import ConfigError
from .policy import TRAJECTORY_COLUMNS, run_agent
from .scenario import (
    REALM_REALIZATION,
    REALM_THEORY,
    Intervention,
    ReturnRegime,
    ScenarioConfig,
    apply_intervention,
    cell_seed,
    generate_realization,
)

RAW_SWEEP_COLUMNS = ("cohort", "tau", "seed", "total_utility", "hardship_count")
SUMMARY_COLUMNS = ("cohort", "tau", "n", "mean", "median", "std", "q1", "q3", "ci_lo", "ci_hi")
RAW_REGIME_COLUMNS = ("regime",) + RAW_SWEEP_COLUMNS
SUMMARY_REGIME_COLUMNS = ("regime",) + SUMMARY_COLUMNS
RAW_INTERVENTION_COLUMNS = ("intervention", "agent", "cohort", "tau_effective", "seed",
                            "total_utility", "baseline_utility", "additional_utility")
SUMMARY_INTERVENTION_COLUMNS = ("intervention", "n", "mean", "median", "std", "q1", "q3",
                                "ci_lo", "ci_hi")
RAW_THEORY_COLUMNS = ("k", "trial", "hidden_draw", "clairvoyant_utility", "policy_utility", "gap")
SUMMARY_THEORY_COLUMNS = ("k", "gap_mean", "gap_std", "n_trials")

INTERVENTION_ARMS = ("L0+Money", "L2", "L5")

THEORY_POLICIES = {
    "fixed_rate": theory.fixed_rate_policy,
    "clairvoyant": theory.clairvoyant_policy,
    "table_agent": None,  # built per run; keeps a per-k table cache
}


@dataclass(frozen=True)
class SummaryStats:
    """Location/spread summary of one group's total utilities."""

    n: int
    mean: float
    median: float
    std: float
    q1: float
    q3: float
    ci_lo: float
    ci_hi: float

    @classmethod
    def from_samples(cls, samples, confidence: float = 0.95) -> "SummaryStats":
        x = np.asarray(samples, dtype=float)
        n = x.size
        if n == 0:
            raise ValueError("empty sample")
        mean = float(np.mean(x))
        std = float(np.std(x, ddof=1)) if n > 1 else 0.0
        q1, med, q3 = (float(v) for v in np.percentile(x, [25.0, 50.0, 75.0]))
        if n > 1 and std > 0:
            half = float(stats.t.ppf(0.5 + confidence / 2.0, n - 1)) * std / math.sqrt(n)
        else:
            half = 0.0
        return cls(n=n, mean=mean, median=med, std=std, q1=q1, q3=q3,
                   ci_lo=mean - half, ci_hi=mean + half)

    def row(self) -> tuple:
        return (self.n, self.mean, self.median, self.std, self.q1, self.q3,
                self.ci_lo, self.ci_hi)


@dataclass(frozen=True)
class ExperimentRecipe:
    """One experiment run: which sweep, at what scale, writing where."""

    kind: str
    scenario: ScenarioConfig
    out_dir: Path
    taus: tuple[int, ...] = ()
    n_seeds: int = 100
    n_agents: int = 50
    k_values: tuple[int, ...] = (8, 16, 32, 64)
    n_trials: int = 2000
    income_scale: float = 1.0
    theory_policy: str = "fixed_rate"
    regimes: tuple[str, ...] = ("negative", "positive")
    threads: int = 1

    KINDS = ("lookahead_sweep", "return_regimes", "interventions", "theory_gap")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError(f"unknown recipe kind {self.kind!r}")
        horizon = self.scenario.horizon
        if any(t < 0 or t > horizon for t in self.taus):
            raise ConfigError(f"tau values must lie in [0, {horizon}]")
        if any(k % 2 != 0 or k < 2 for k in self.k_values):
            raise ConfigError("k values must be even and >= 2")
        if self.n_seeds < 1 or self.n_trials < 1 or self.n_agents < 1:
            raise ConfigError("n_seeds, n_trials and n_agents must be >= 1")
        if self.theory_policy not in THEORY_POLICIES:
            raise ConfigError(f"unknown theory policy {self.theory_policy!r}")
        for kind in self.regimes:
            if kind not in ReturnRegime.CORE:
                raise ConfigError(f"unknown return regime {kind!r}")

    def resolved_taus(self) -> tuple[int, ...]:
        return self.taus or tuple(range(self.scenario.horizon + 1))


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header, rows, footer_comments=()) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        for comment in footer_comments:
            fh.write(f"# {comment}\n")
    return path


def read_csv_rows(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """Raw CSV reader that skips footer comments; used by reporting tests."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


def write_trajectories(path: Path, labeled_records) -> Path:
    """Long-format trajectory dump: one row per (label, step), with the
    documented per-step column order."""
    rows = []
    for label, record in labeled_records:
        for row in record.rows():
            rows.append((label,) + row)
    return write_csv(path, ("label",) + TRAJECTORY_COLUMNS, rows)


# ---------------------------------------------------------------------------
# lookahead sweep and return regimes
# ---------------------------------------------------------------------------


def realization_for_cell(scenario: ScenarioConfig, cohort_index: int, seed_index: int,
                         regime: ReturnRegime | None = None):
    """The (cohort, seed) cell's schedule draw. Lookahead is not part of the
    key: every tau level in a cell shares one realization, and the same seed
    under another regime keeps the income path.

    Under base_income_mode="sampled" the cell's base income is drawn
    uniformly within the cohort range from a child stream of the cell seed
    (value tables keep the cohort-midpoint belief either way)."""
    cohort = scenario.cohorts[cohort_index]
    seed = cell_seed(scenario.master_seed, REALM_REALIZATION, cohort_index, seed_index)
    regime = regime or scenario.return_regime
    if scenario.base_income_mode == "sampled":
        base_seed, realization_seed = seed.spawn(2)
        base = cohort.sample_base_income(np.random.default_rng(base_seed))
        return generate_realization(base, scenario.shocks, regime,
                                    scenario.horizon, realization_seed)
    return generate_realization(cohort, scenario.shocks, regime, scenario.horizon, seed)


def _sweep_cells(scenario: ScenarioConfig, cohort_index: int, seed_indices,
                 taus, regime_kind: str | None, table):
    """Worker: run every tau level for a block of seeds of one cohort against
    the shared read-only value table, in deterministic order."""
    regime = ReturnRegime(regime_kind) if regime_kind else scenario.return_regime
    cohort = scenario.cohorts[cohort_index]
    params = scenario.model_params(cohort, regime)
    out = []
    for seed_index in seed_indices:
        realization = realization_for_cell(scenario, cohort_index, seed_index, regime)
        for tau in taus:
            record = run_agent(params, realization, tau, table, cohort.subsistence,
                               scenario.initial_assets,
                               floor_attempt=scenario.subsistence_floor)
            record.validate()
            out.append((seed_index, tau, record.total_utility, record.hardship_count))
    return cohort_index, regime_kind, out


def _run_cells(recipe: ExperimentRecipe, regime_kinds) -> dict:
    """Run (regime, cohort, seed, tau) cells, possibly in parallel, and
    return {(regime_kind, cohort_index, seed, tau): (utility, hardships)}.

    Tables are built once per (cohort, regime) in the parent and shared with
    the workers read-only."""
    scenario = recipe.scenario
    taus = recipe.resolved_taus()
    n_chunks = max(1, min(recipe.threads * 2, recipe.n_seeds))
    chunks = [list(range(recipe.n_seeds))[i::n_chunks] for i in range(n_chunks)]
    chunks = [c for c in chunks if c]
    tables = {}
    for kind in regime_kinds:
        regime = ReturnRegime(kind) if kind else scenario.return_regime
        for ci, cohort in enumerate(scenario.cohorts):
            tables[(kind, ci)] = scenario.build_table(cohort, regime)
    jobs = [(scenario, ci, chunk, taus, kind, tables[(kind, ci)])
            for kind in regime_kinds
            for ci in range(len(scenario.cohorts))
            for chunk in chunks]
    results = {}

    def consume(cohort_index, regime_kind, rows):
        for seed_index, tau, utility, hardships in rows:
            results[(regime_kind, cohort_index, seed_index, tau)] = (utility, hardships)

    if recipe.threads > 1:
        with ProcessPoolExecutor(max_workers=recipe.threads) as pool:
            for cohort_index, regime_kind, rows in pool.map(_sweep_cells_star, jobs):
                consume(cohort_index, regime_kind, rows)
    else:
        for job in jobs:
            consume(*_sweep_cells_star(job))
    return results


def _sweep_cells_star(job):
    return _sweep_cells(*job)


def run_lookahead_sweep(recipe: ExperimentRecipe) -> dict[str, Path]:
    """One row per (cohort, tau, seed) plus a per-(cohort, tau) summary."""
    scenario = recipe.scenario
    taus = recipe.resolved_taus()
    cells = _run_cells(recipe, [None])
    raw_rows = []
    summary_rows = []
    for ci, cohort in enumerate(scenario.cohorts):
        for tau in taus:
            utilities = []
            for seed in range(recipe.n_seeds):
                utility, hardships = cells[(None, ci, seed, tau)]
                raw_rows.append((cohort.name, tau, seed, utility, hardships))
                utilities.append(utility)
            summary_rows.append((cohort.name, tau) + SummaryStats.from_samples(utilities).row())
    raw_rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return {
        "raw": write_csv(recipe.out_dir / "lookahead_sweep.csv", RAW_SWEEP_COLUMNS, raw_rows),
        "summary": write_csv(recipe.out_dir / "lookahead_sweep_summary.csv",
                             SUMMARY_COLUMNS, summary_rows),
    }


def run_return_regimes(recipe: ExperimentRecipe) -> dict[str, Path]:
    """The lookahead sweep under each return regime, grouped by regime."""
    scenario = recipe.scenario
    taus = recipe.resolved_taus()
    cells = _run_cells(recipe, list(recipe.regimes))
    raw_rows = []
    summary_rows = []
    for kind in recipe.regimes:
        for ci, cohort in enumerate(scenario.cohorts):
            for tau in taus:
                utilities = []
                for seed in range(recipe.n_seeds):
                    utility, hardships = cells[(kind, ci, seed, tau)]
                    raw_rows.append((kind, cohort.name, tau, seed, utility, hardships))
                    utilities.append(utility)
                summary_rows.append((kind, cohort.name, tau)
                                    + SummaryStats.from_samples(utilities).row())
    raw_rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    return {
        "raw": write_csv(recipe.out_dir / "return_regimes.csv", RAW_REGIME_COLUMNS, raw_rows),
        "summary": write_csv(recipe.out_dir / "return_regimes_summary.csv",
                             SUMMARY_REGIME_COLUMNS, summary_rows),
    }


# ---------------------------------------------------------------------------
# interventions
# ---------------------------------------------------------------------------


def _intervention_for(arm: str, scenario: ScenarioConfig) -> Intervention:
    if arm == "L0+Money":
        return Intervention(kind="compensation", compensation_rule=scenario.compensation_rule)
    if arm == "L2":
        return Intervention(kind="min_lookahead", min_lookahead_weeks=2)
    if arm == "L5":
        return Intervention(kind="min_lookahead", min_lookahead_weeks=5)
    raise ConfigError(f"unknown intervention arm {arm!r}")


def run_interventions(recipe: ExperimentRecipe) -> dict[str, Path]:
    """Paired intervention arms against the zero-lookahead baseline.

    Agents are spread round-robin over the cohorts; each agent's realization
    (and hence its seed) is shared by the baseline and all arms.
    """
    scenario = recipe.scenario
    tables = {c.name: scenario.build_table(c) for c in scenario.cohorts}
    params = {c.name: scenario.model_params(c) for c in scenario.cohorts}
    raw_rows = []
    additional = {arm: [] for arm in INTERVENTION_ARMS}
    for agent in range(recipe.n_agents):
        ci = agent % len(scenario.cohorts)
        cohort = scenario.cohorts[ci]
        realization = realization_for_cell(scenario, ci, agent)
        base_rec = run_agent(params[cohort.name], realization, 0, tables[cohort.name],
                             cohort.subsistence, scenario.initial_assets,
                             floor_attempt=scenario.subsistence_floor)
        base_rec.validate()
        for arm in INTERVENTION_ARMS:
            mod_realization, tau_eff = apply_intervention(
                realization, 0, _intervention_for(arm, scenario))
            record = run_agent(params[cohort.name], mod_realization, tau_eff,
                               tables[cohort.name], cohort.subsistence,
                               scenario.initial_assets,
                               floor_attempt=scenario.subsistence_floor)
            record.validate()
            gain = record.total_utility - base_rec.total_utility
            additional[arm].append(gain)
            raw_rows.append((arm, agent, cohort.name, tau_eff, agent,
                             record.total_utility, base_rec.total_utility, gain))
    raw_rows.sort(key=lambda r: (r[0], r[1]))
    summary_rows = [(arm,) + SummaryStats.from_samples(additional[arm]).row()
                    for arm in INTERVENTION_ARMS]
    pair_rows = []
    for hi, lo in (("L2", "L0+Money"), ("L5", "L2")):
        diff = np.array(additional[hi]) - np.array(additional[lo])
        pair_rows.append((f"{hi}-vs-{lo}", diff.size, float(diff.mean()),
                          float(diff.std(ddof=1) / math.sqrt(diff.size))))
    return {
        "raw": write_csv(recipe.out_dir / "interventions.csv",
                         RAW_INTERVENTION_COLUMNS, raw_rows),
        "summary": write_csv(recipe.out_dir / "interventions_summary.csv",
                             SUMMARY_INTERVENTION_COLUMNS, summary_rows),
        "pairwise": write_csv(recipe.out_dir / "interventions_pairwise.csv",
                              ("comparison", "n", "mean_gap", "paired_se"), pair_rows),
    }


# ---------------------------------------------------------------------------
# theory gap
# ---------------------------------------------------------------------------


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares slope/intercept plus R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def run_theory_gap(recipe: ExperimentRecipe) -> dict[str, Path]:
    """Gap statistics per k plus the linear growth fit in the summary footer."""
    policy_name = recipe.theory_policy
    policy = theory.table_agent_policy() if policy_name == "table_agent" \
        else THEORY_POLICIES[policy_name]
    raw_rows = []
    summary_rows = []
    means = []
    for k in recipe.k_values:
        seed = cell_seed(recipe.scenario.master_seed, REALM_THEORY, k)
        gap = theory.measure_gap(k, recipe.income_scale, recipe.n_trials, policy, seed=seed)
        means.append(gap.mean)
        summary_rows.append((k, gap.mean, gap.std, gap.n_trials))
        for i in range(gap.n_trials):
            raw_rows.append((k, i, float(gap.draws[i]),
                             float(gap.policy_utilities[i] + gap.gaps[i]),
                             float(gap.policy_utilities[i]), float(gap.gaps[i])))
    slope, intercept, r2 = linear_fit(recipe.k_values, means) if len(recipe.k_values) > 1 \
        else (0.0, means[0], 1.0)
    footer = (f"policy = {policy_name}",
              f"slope = {repr(slope)}",
              f"intercept = {repr(intercept)}",
              f"r_squared = {repr(r2)}")
    return {
        "raw": write_csv(recipe.out_dir / "theory_gap.csv", RAW_THEORY_COLUMNS, raw_rows),
        "summary": write_csv(recipe.out_dir / "theory_gap_summary.csv",
                             SUMMARY_THEORY_COLUMNS, summary_rows, footer_comments=footer),
    }
