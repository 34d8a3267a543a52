"""Depreciating versus appreciating assets: the lookahead sweep under the
negative ([0.75, 0.95]) and positive ([1.05, 1.25]) return regimes.

Run:  python demos/03_return_regimes.py
"""

from pathlib import Path

from lookahead_sim import ScenarioConfig
from lookahead_sim.experiments import (
    ExperimentRecipe,
    read_csv_rows,
    run_return_regimes,
)

OUT = Path(__file__).parent / "out" / "regimes"

scenario = ScenarioConfig.from_dict({})
taus = (0, 2, 5, 10, 18, 26)
recipe = ExperimentRecipe(kind="return_regimes", scenario=scenario, out_dir=OUT,
                          taus=taus, n_seeds=15, threads=2)
paths = run_return_regimes(recipe)
print(f"raw rows: {paths['raw']}")
print(f"summary:  {paths['summary']}\n")

header, rows = read_csv_rows(paths["summary"])
col = {name: i for i, name in enumerate(header)}
means = {(r[col["regime"]], r[col["cohort"]], int(r[col["tau"]])): float(r[col["mean"]])
         for r in rows}
cohorts = [c.name for c in scenario.cohorts]

for regime in ("negative", "positive"):
    print(f"{regime} returns: mean total utility")
    print(f"{'tau':>4} " + "".join(f"{c:>13}" for c in cohorts))
    for tau in taus:
        print(f"{tau:>4} " + "".join(f"{means[(regime, c, tau)]:13.3f}" for c in cohorts))
    print()

print("per-cohort regime gap (positive minus negative, averaged over lookahead):")
for c in cohorts:
    pos = sum(means[("positive", c, t)] for t in taus) / len(taus)
    neg = sum(means[("negative", c, t)] for t in taus) / len(taus)
    print(f"  {c:12s} {pos - neg:+10.3f}")
print("\nfavorable returns dominate for every cohort; under depreciation the")
print("curves sit far lower and flatten at small lookahead levels.")
