"""Command-line front end.

Verbs: build-table, sweep-lookahead, sweep-returns, run-interventions,
theory-gap, validate-config. Exit codes: 0 success, 2 config error,
3 numeric/feasibility error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, FeasibilityError
from .experiments import (
    ExperimentRecipe,
    run_interventions,
    run_lookahead_sweep,
    run_return_regimes,
    run_theory_gap,
)
from .scenario import ScenarioConfig
from .table_io import dump_value_table


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def _add_common(parser: argparse.ArgumentParser, scenario_required: bool = True) -> None:
    parser.add_argument("--scenario", required=scenario_required,
                        help="scenario JSON file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario's master seed (u64)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes for sweep cells")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lookahead-sim",
        description="Consumption/savings simulation under schedule lookahead")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-table", help="build and dump per-cohort value tables")
    _add_common(p)
    p.add_argument("--regime", default=None, choices=("baseline", "negative", "positive"),
                   help="return regime for the tables (default: scenario's)")

    p = sub.add_parser("sweep-lookahead", help="utility vs lookahead level per cohort")
    _add_common(p)
    p.add_argument("--taus", type=str, default="",
                   help="comma-separated lookahead levels (default 0..horizon)")
    p.add_argument("--n-seeds", type=int, default=100)

    p = sub.add_parser("sweep-returns", help="lookahead sweep under each return regime")
    _add_common(p)
    p.add_argument("--taus", type=str, default="")
    p.add_argument("--n-seeds", type=int, default=25)

    p = sub.add_parser("run-interventions", help="paired intervention arms vs L0 baseline")
    _add_common(p)
    p.add_argument("--n-agents", type=int, default=50)

    p = sub.add_parser("theory-gap", help="lookahead-gap growth measurement")
    _add_common(p, scenario_required=False)
    p.add_argument("--k-list", type=str, default="8,16,32,64")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--income-scale", type=float, default=1.0)
    p.add_argument("--policy", default="fixed_rate",
                   choices=("fixed_rate", "clairvoyant", "table_agent"))

    p = sub.add_parser("validate-config", help="parse and validate a scenario file")
    p.add_argument("--scenario", required=True)
    return parser


def _load_scenario(args) -> ScenarioConfig:
    if getattr(args, "scenario", None):
        scenario = ScenarioConfig.from_file(args.scenario)
    else:
        scenario = ScenarioConfig.from_dict({})
    if getattr(args, "seed", None) is not None:
        from dataclasses import replace
        scenario = replace(scenario, master_seed=int(args.seed))
    return scenario


def _recipe(args, kind: str, **extra) -> ExperimentRecipe:
    return ExperimentRecipe(kind=kind, scenario=_load_scenario(args),
                            out_dir=Path(args.out), threads=max(1, args.threads), **extra)


def _cmd_build_table(args) -> int:
    scenario = _load_scenario(args)
    regime = None
    if args.regime:
        from .scenario import ReturnRegime
        regime = ReturnRegime(args.regime)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for cohort in scenario.cohorts:
        table = scenario.build_table(cohort, regime)
        path = out / f"value_table_{cohort.name}.json"
        dump_value_table(table, path)
        print(f"wrote {path}")
    return 0


def _cmd_sweep_lookahead(args) -> int:
    recipe = _recipe(args, "lookahead_sweep", n_seeds=args.n_seeds,
                     taus=_parse_int_list(args.taus))
    for name, path in run_lookahead_sweep(recipe).items():
        print(f"{name}: {path}")
    return 0


def _cmd_sweep_returns(args) -> int:
    recipe = _recipe(args, "return_regimes", n_seeds=args.n_seeds,
                     taus=_parse_int_list(args.taus))
    for name, path in run_return_regimes(recipe).items():
        print(f"{name}: {path}")
    return 0


def _cmd_run_interventions(args) -> int:
    recipe = _recipe(args, "interventions", n_agents=args.n_agents)
    for name, path in run_interventions(recipe).items():
        print(f"{name}: {path}")
    return 0


def _cmd_theory_gap(args) -> int:
    recipe = _recipe(args, "theory_gap", k_values=_parse_int_list(args.k_list),
                     n_trials=args.trials, income_scale=args.income_scale,
                     theory_policy=args.policy)
    for name, path in run_theory_gap(recipe).items():
        print(f"{name}: {path}")
    return 0


def _cmd_validate_config(args) -> int:
    scenario = ScenarioConfig.from_file(args.scenario)
    print(f"ok: horizon={scenario.horizon} cohorts={[c.name for c in scenario.cohorts]} "
          f"regime={scenario.return_regime.kind} master_seed={scenario.master_seed}")
    return 0


_COMMANDS = {
    "build-table": _cmd_build_table,
    "sweep-lookahead": _cmd_sweep_lookahead,
    "sweep-returns": _cmd_sweep_returns,
    "run-interventions": _cmd_run_interventions,
    "theory-gap": _cmd_theory_gap,
    "validate-config": _cmd_validate_config,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FeasibilityError, FloatingPointError, ZeroDivisionError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
