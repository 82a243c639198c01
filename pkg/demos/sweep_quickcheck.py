#!/usr/bin/env python3
"""A two-minute miniature of the robot-count sweep.

Three swarm sizes, two seeds each, on the open box.  The full experiment
grids live behind `swarmpush sweep`; this just shows the moving parts:
every trial is seeded, every row lands in a CSV next to a manifest, and
the aggregate table is recomputed from the rows alone.
"""
import tempfile
from pathlib import Path

from swarmpush.scenarios import make_scenario
from swarmpush.sweep import aggregate, load_rows, run_sweep

out = Path(tempfile.mkdtemp(prefix="sweepdemo-")) / "robots.csv"
base = make_scenario("open-box")

res = run_sweep("robot_count", [25, 50, 100], base, seeds=2,
                max_time=300.0, out=str(out),
                progress=lambda row: print(
                    "  n=%-4s seed %s  %s  %6.1f s"
                    % (row["value"], row["seed"],
                       "ok " if str(row["success"]) == "True" else "TO ",
                       float(row["completion_time_s"]))))

print("\nrows in", out)
print("value  n  success  median(s)")
for cell in aggregate(load_rows(str(out))):
    print("%5s  %d   %4.2f    %6.1f" % (cell.value, cell.trials,
                                        cell.success_rate, cell.median_s))
