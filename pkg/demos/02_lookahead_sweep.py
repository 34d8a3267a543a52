"""Utility versus lookahead level for every income cohort: a reduced-scale
version of the main sweep (fewer seeds and lookahead levels than the
acceptance run, same machinery).

Run:  python demos/02_lookahead_sweep.py
"""

from pathlib import Path

from lookahead_sim import ScenarioConfig
from lookahead_sim.experiments import (
    ExperimentRecipe,
    read_csv_rows,
    run_lookahead_sweep,
)

OUT = Path(__file__).parent / "out" / "sweep"

scenario = ScenarioConfig.from_dict({})
taus = (0, 1, 2, 3, 5, 8, 13, 20, 26)
recipe = ExperimentRecipe(kind="lookahead_sweep", scenario=scenario, out_dir=OUT,
                          taus=taus, n_seeds=30, threads=2)
paths = run_lookahead_sweep(recipe)
print(f"raw rows:   {paths['raw']}")
print(f"summary:    {paths['summary']}\n")

header, rows = read_csv_rows(paths["summary"])
col = {name: i for i, name in enumerate(header)}
means = {(r[col["cohort"]], int(r[col["tau"]])): float(r[col["mean"]]) for r in rows}

cohorts = [c.name for c in scenario.cohorts]
print("mean total utility by lookahead (30 seeds each):")
print(f"{'tau':>4} " + "".join(f"{c:>13}" for c in cohorts))
for tau in taus:
    print(f"{tau:>4} " + "".join(f"{means[(c, tau)]:13.3f}" for c in cohorts))

print("\ngain over no lookahead (tau=26 minus tau=0):")
for c in cohorts:
    print(f"  {c:12s} {means[(c, 26)] - means[(c, 0)]:+8.3f}")
print("\nhigher income brackets sit strictly higher at every lookahead level;")
print("the curves rise with lookahead and flatten well before full information.")
