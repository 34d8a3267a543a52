"""Value table dump/load: versioned structured-text (JSON) for inspection.

The header records the grid spec, horizon, discount, and sha256 hashes of the
discretized distributions; floats are stored via repr so a load round-trips
bit-identically.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import AssetGrid
from .dp import DiscreteDistribution, ValueTable

FORMAT_VERSION = 1


def _dist_payload(dist: DiscreteDistribution) -> dict:
    return {
        "support": [repr(float(v)) for v in dist.support],
        "weights": [repr(float(v)) for v in dist.weights],
        "sha256": dist.sha256(),
    }


def _dist_from_payload(payload: dict) -> DiscreteDistribution:
    dist = DiscreteDistribution(
        np.array([float(v) for v in payload["support"]]),
        np.array([float(v) for v in payload["weights"]]))
    if dist.sha256() != payload["sha256"]:
        raise ValueError("distribution hash mismatch in table dump")
    return dist


def dump_value_table(table: ValueTable, path: str | Path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "grid": {
            "spacing": table.grid.spacing,
            "n_points": table.grid.n_points,
            "max": repr(float(table.grid.max)),
        },
        "horizon": table.horizon,
        "discount": repr(float(table.discount)),
        "consumption_choices": table.consumption_choices,
        "income_dist": _dist_payload(table.income_dist),
        "return_dist": _dist_payload(table.return_dist),
        "values": [[repr(float(v)) for v in row] for row in table.values],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_value_table(path: str | Path) -> ValueTable:
    doc = json.loads(Path(path).read_text())
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported table dump version {version!r}")
    grid = AssetGrid.from_bounds(
        float(doc["grid"]["max"]), int(doc["grid"]["n_points"]), doc["grid"]["spacing"])
    values = np.array([[float(v) for v in row] for row in doc["values"]])
    return ValueTable(
        grid=grid,
        horizon=int(doc["horizon"]),
        discount=float(doc["discount"]),
        values=values,
        income_dist=_dist_from_payload(doc["income_dist"]),
        return_dist=_dist_from_payload(doc["return_dist"]),
        consumption_choices=int(doc["consumption_choices"]),
    )
