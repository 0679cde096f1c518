#!/usr/bin/env python3
"""Regenerate the dashboard's shared data artifacts from the CLI.

Writes, under frontend/:
  public/thresholds.json  -- the zone table the dashboard fetches
  public/community.csv    -- the two builtin baseline rows
  test/golden_assess.json -- >=200 five-tuples classified via `togglehealth
                             assess --json`, the parity oracle for the
                             dashboard's classification code

Run from the repository root after any threshold or profile-rule change:
    python3 scripts/generate_dashboard_golden.py
"""

from __future__ import annotations

import json
import random
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FRONTEND = ROOT / "frontend"

EPS = 1e-9

BASELINES = [
    ("kubernetes", [10.2, 1.5, 0.74, 0.016, 6.1]),
    ("gitlab", [104.5, 6.5, 0.88, 0.081, 6.2]),
]

# interior zone bounds per metric, in CLI argument order
BOUNDS = {
    "churn": [15.0, 100.0],
    "net_accumulation": [2.0, 5.0],
    "cleanup_ratio": [0.70, 0.85],
    "density": [0.02, 0.10],
    "norm_lifespan": [3.0, 8.0],
}
ORDER = ["churn", "net_accumulation", "cleanup_ratio", "density", "norm_lifespan"]
BASE_TUPLE = [10.2, 1.5, 0.74, 0.016, 6.1]


def probe_values(metric_id: str) -> list[float]:
    values = [0.0]
    for bound in BOUNDS[metric_id]:
        values.extend([bound - EPS, bound, bound + EPS])
    lo, hi = BOUNDS[metric_id]
    values.extend([lo / 2, (lo + hi) / 2, hi * 2])
    if metric_id == "net_accumulation":
        values.append(-1.0)
    return values


def build_grid() -> list[list[float | None]]:
    grid: list[list[float | None]] = [list(values) for _, values in BASELINES]
    # single-axis sweeps across every boundary probe
    for index, metric_id in enumerate(ORDER):
        for value in probe_values(metric_id):
            tup: list[float | None] = list(BASE_TUPLE)
            tup[index] = value
            grid.append(tup)
    # a few missing-lifespan cases
    for partial in ([10.2, 1.5, 0.74, 0.016], [104.5, 6.5, 0.88, 0.081]):
        grid.append(list(partial) + [None])
    # seeded random fills to pass 200 cases
    rng = random.Random(20250810)
    while len(grid) < 220:
        grid.append(
            [
                round(rng.uniform(0, 220), 4),
                round(rng.uniform(-8, 9), 4),
                round(rng.uniform(0, 1.1), 4),
                round(rng.uniform(0, 0.25), 5),
                round(rng.uniform(0, 12), 4),
            ]
        )
    return grid


def cli_assess(values: list[float | None]) -> dict:
    args = [f"{v!r}" for v in values if v is not None]
    # "--" keeps negative metric values from being read as options
    result = subprocess.run(
        ["togglehealth", "assess", "--json", "--", *args],
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(result.stdout)


def main() -> int:
    (FRONTEND / "public").mkdir(parents=True, exist_ok=True)
    (FRONTEND / "test").mkdir(parents=True, exist_ok=True)

    subprocess.run(
        ["togglehealth", "thresholds", "--out", str(FRONTEND / "public" / "thresholds.json")],
        check=True,
    )

    csv_lines = [
        "project,churn_rate,net_accumulation,cleanup_ratio,"
        "toggle_density,normalized_lifespan,snapshot_date"
    ]
    for name, values in BASELINES:
        csv_lines.append(name + "," + ",".join(f"{v:g}" for v in values) + ",2025-08-22")
    (FRONTEND / "public" / "community.csv").write_text("\n".join(csv_lines) + "\n")

    cases = []
    for values in build_grid():
        payload = cli_assess(values)
        cases.append(
            {
                "values": values,
                "zones": {mid: payload["metrics"][mid]["zone"] for mid in ORDER},
                "profile": payload["profile"],
            }
        )
    golden = {"generator": "togglehealth assess --json", "cases": cases}
    (FRONTEND / "test" / "golden_assess.json").write_text(
        json.dumps(golden, indent=2) + "\n"
    )
    print(f"wrote {len(cases)} golden cases, thresholds.json, community.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
