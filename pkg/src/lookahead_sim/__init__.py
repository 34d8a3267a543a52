"""Consumption/savings simulation under unstable work schedules with
limited lookahead: stochastic value table, per-step deterministic window
solver, online agent loop, theory oracles, and the scenario lab."""

from .core import (
    AgentState,
    AssetGrid,
    ModelParams,
    ScheduleRealization,
    UtilityFn,
    UtilityKind,
    discounted_total,
    step_assets,
    utility,
)
from .dp import (
    DiscreteDistribution,
    LookaheadWindow,
    ValueTable,
    build_value_table,
    discretize_uniform,
    interpolate_value,
    solve_lookahead_dp,
    stochastic_choice,
)
from .errors import ConfigError, FeasibilityError, GridTooSmallError
from .policy import TRAJECTORY_COLUMNS, TrajectoryRecord, run_agent, run_cohort
from .scenario import (
    Cohort,
    Intervention,
    ReturnRegime,
    ScenarioConfig,
    ShockProcess,
    apply_intervention,
    assign_assets,
    build_cohorts,
    cell_seed,
    generate_realization,
    load_income_sample,
    synthesize_income_sample,
)
from .table_io import dump_value_table, load_value_table
from .theory import (
    GapInstance,
    GapStats,
    clairvoyant_policy,
    concavity_helper_check,
    fixed_rate_policy,
    full_lookahead_utility,
    k_delay_policy,
    measure_gap,
    table_agent_policy,
    undiscounted_utility,
)

__version__ = "0.1.0"
