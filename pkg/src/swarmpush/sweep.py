"""Parameter sweeps over seeded autonomous trials.

A sweep varies exactly one knob (robot count, noise, object weight, object
shape, or the controller method string) across a list of values, runs a
block of seeded trials per value, and writes three artifacts: a row file
with one line per trial, a cell file with per-value aggregates, and a
manifest describing how the sweep was produced.  Aggregates carry no
information of their own -- ``aggregate`` recomputes them exactly from the
rows, so the row file is the only artifact that matters for analysis.

Failed trials (timeouts or crashed cells) are recorded like any other row
and never abort the sweep; a timeout keeps ``max_time`` as its completion
time so medians stay defined when a cell only partially succeeds.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import statistics
import time
from dataclasses import dataclass
from typing import List, Optional

from .manipulation import ManipulationConfig, run_to_completion
from .records import TrialRecord, config_digest
from .scenarios import Scenario, make_scenario

PARAMS = ("robot_count", "noise", "weight", "shape", "method")

# fixed column order; downstream tooling indexes by position
COLUMNS = ("scenario_digest", "method", "param", "value", "seed",
           "success", "completion_time_s", "steps")


@dataclass
class CellStats:
    param: str
    value: str
    trials: int
    success_rate: float
    median_s: float
    mean_s: float
    std_s: float


@dataclass
class SweepResult:
    rows: List[dict]
    cells: List[CellStats]
    row_path: Optional[str] = None
    cell_path: Optional[str] = None
    manifest_path: Optional[str] = None


def apply_value(base: Scenario, param: str, value) -> Scenario:
    """Base scenario with one sweep knob overridden."""
    if param not in PARAMS:
        raise ValueError(f"unknown sweep parameter {param!r}")
    kw = {"method": base.method, "seed": base.seed}
    if param == "robot_count":
        kw["robots"] = int(value)
    elif param == "noise":
        kw["noise_w"] = float(value)
    elif param == "weight":
        kw["weight"] = float(value)
    elif param == "shape":
        kw["shape"] = str(value)
    else:
        kw["method"] = str(value)
    return _restyle(base, **kw)


def _restyle(base: Scenario, **kw) -> Scenario:
    # keep the base's (possibly customized) world instead of reloading the
    # maze fixture, so sweeps over tweaked scenario files stay faithful
    sc = make_scenario(base.maze_id, config=base.config, **kw)
    return dataclasses.replace(sc, spawn_region=base.spawn_region)


def run_cell_trial(scenario: Scenario, seed: int,
                   max_time: float) -> TrialRecord:
    cfg = ManipulationConfig.from_method(scenario.method)
    return run_to_completion(cfg, scenario.config, seed, max_time,
                             spawn_region=scenario.spawn_region)


def _row(record: TrialRecord, param: str, value) -> dict:
    return {
        "scenario_digest": record.scenario_digest,
        "method": record.method,
        "param": param,
        "value": str(value),
        "seed": record.seed,
        "success": record.success,
        "completion_time_s": round(record.completion_time_s, 4),
        "steps": record.steps,
    }


def _failure_row(scenario: Scenario, param: str, value, seed: int,
                 max_time: float) -> dict:
    # a cell that cannot even start (bad shape id, impossible maze) still
    # produces rows, one per planned seed
    return {
        "scenario_digest": config_digest(scenario.config),
        "method": scenario.method,
        "param": param,
        "value": str(value),
        "seed": seed,
        "success": False,
        "completion_time_s": round(float(max_time), 4),
        "steps": 0,
    }


def run_sweep(param: str, values, base: Scenario, seeds: int, *,
              max_time: float = 600.0, out: Optional[str] = None,
              progress=None) -> SweepResult:
    """Run ``seeds`` trials at every value of one parameter.

    ``out`` names the row file; the cell file and manifest derive their
    names from it.  ``progress`` (if given) is called with each finished
    row, which the CLI uses for live output.
    """
    if seeds < 1:
        raise ValueError("seeds per cell must be >= 1")
    started = time.time()
    rows: List[dict] = []
    for value in values:
        try:
            scenario = apply_value(base, param, value)
        except Exception:
            for k in range(seeds):
                rows.append(_failure_row(base, param, value,
                                         base.seed + k, max_time))
                if progress:
                    progress(rows[-1])
            continue
        for k in range(seeds):
            seed = base.seed + k
            try:
                rec = run_cell_trial(scenario, seed, max_time)
                rows.append(_row(rec, param, value))
            except Exception:
                rows.append(_failure_row(scenario, param, value,
                                         seed, max_time))
            if progress:
                progress(rows[-1])
    cells = aggregate(rows)
    result = SweepResult(rows=rows, cells=cells)
    if out is not None:
        result.row_path = out
        result.cell_path = _sibling(out, "-cells")
        result.manifest_path = _sibling(out, "-manifest", ".json")
        write_rows(rows, result.row_path)
        write_cells(cells, result.cell_path)
        manifest = {
            "param": param,
            "values": [str(v) for v in values],
            "seeds_per_cell": seeds,
            "base": {"maze_id": base.maze_id, "method": base.method,
                     "seed": base.seed},
            "max_time_s": max_time,
            "started_unix": round(started, 3),
            "finished_unix": round(time.time(), 3),
            "row_file": result.row_path,
        }
        with open(result.manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=1)
            fh.write("\n")
    return result


def aggregate(rows: List[dict]) -> List[CellStats]:
    """Per-(param, value) stats, recomputed purely from trial rows."""
    order: List[tuple] = []
    groups: dict = {}
    for r in rows:
        key = (r["param"], r["value"])
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)
    cells = []
    for param, value in order:
        block = groups[(param, value)]
        times = [float(r["completion_time_s"]) for r in block]
        wins = sum(1 for r in block if _truthy(r["success"]))
        cells.append(CellStats(
            param=param, value=value, trials=len(block),
            success_rate=wins / len(block),
            median_s=statistics.median(times),
            mean_s=statistics.fmean(times),
            std_s=statistics.pstdev(times) if len(times) > 1 else 0.0))
    return cells


def _truthy(v) -> bool:
    if isinstance(v, str):
        return v.strip().lower() in ("true", "1", "yes")
    return bool(v)


def write_rows(rows: List[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(COLUMNS))
        w.writeheader()
        for r in rows:
            w.writerow(r)


def load_rows(path: str) -> List[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_cells(cells: List[CellStats], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["param", "value", "trials", "success_rate",
                    "median_s", "mean_s", "std_s"])
        for c in cells:
            w.writerow([c.param, c.value, c.trials,
                        round(c.success_rate, 4), round(c.median_s, 4),
                        round(c.mean_s, 4), round(c.std_s, 4)])


def _sibling(path: str, suffix: str, ext: Optional[str] = None) -> str:
    stem, dot, tail = path.rpartition(".")
    if not dot:
        stem, tail = path, "csv"
    return f"{stem}{suffix}.{ext.lstrip('.') if ext else tail}"
