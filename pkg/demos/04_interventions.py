"""Mitigation arms against the no-lookahead baseline, paired on identical
realized schedules: compensation money on negative shocks (L0+Money) versus
mandated minimum advance notice (L2, L5 weeks).

Run:  python demos/04_interventions.py
"""

from pathlib import Path

from lookahead_sim import ScenarioConfig
from lookahead_sim.experiments import (
    ExperimentRecipe,
    read_csv_rows,
    run_interventions,
)

OUT = Path(__file__).parent / "out" / "interventions"

scenario = ScenarioConfig.from_dict({})
recipe = ExperimentRecipe(kind="interventions", scenario=scenario, out_dir=OUT,
                          n_agents=50)
paths = run_interventions(recipe)
print(f"raw rows: {paths['raw']}")

header, rows = read_csv_rows(paths["summary"])
col = {name: i for i, name in enumerate(header)}
print("\nadditional utility vs the L0 baseline (50 paired agents):")
print(f"{'arm':>10} {'mean':>10} {'median':>10} {'q1':>10} {'q3':>10} "
      f"{'ci_lo':>10} {'ci_hi':>10}")
for r in rows:
    print(f"{r[col['intervention']]:>10} "
          + "".join(f"{float(r[col[k]]):10.3f} " for k in
                    ("mean", "median", "q1", "q3", "ci_lo", "ci_hi")))

_, pairs = read_csv_rows(paths["pairwise"])
print("\npairwise comparisons (paired standard errors):")
for r in pairs:
    print(f"  {r[0]:>16}: mean gap {float(r[2]):+8.3f}  (paired se {float(r[3]):.3f})")

print("\nwith optimizing agents the cash arm dominates advance notice by a wide")
print("margin: doubled-back shock pay is first-order income, while extra")
print("foresight only refines an already-smooth consumption plan (a noise-scale")
print("gain at these asset levels). longer notice (L5) still beats shorter (L2)")
print("cleanly on the same paired schedules.")
