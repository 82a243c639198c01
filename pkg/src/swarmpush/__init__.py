"""swarmpush: steer a whole swarm with one shared force input.

A deterministic 2D simulator for many noisy particles that all receive the
same control force, plus the estimation, control, planning, and manipulation
layers needed to push a rigid object through an obstacle course with that
single input.
"""
from .geometry import Rect, convex_hull
from .manipulation import (ManipulationConfig, ManipulationStatus,
                           PolicyMiss, build_policy, initial_status,
                           manipulation_step, run_to_completion,
                           select_corner)
from .records import (ReplayResult, TrialRecord, config_digest, load_record,
                      replay, save_record, state_digest)
from .regions import RegionMap, build_regions
from .scenarios import (MAZE_IDS, Scenario, default_spawn_region,
                        load_scenario, make_scenario, maze_config,
                        save_scenario, scenario_digest)
from .shapes import SHAPE_IDS, make_shape
from .stats import (EmptySelection, SwarmSummary, hysteresis_thresholds,
                    optimal_packing_variance, summarize)
from .sweep import SweepResult, aggregate, run_sweep
from .world import (ControlInput, ObjectSpec, PlacementInfeasible, SwarmState,
                    WorldConfig, spawn, step)

__all__ = [
    "Rect", "convex_hull", "SHAPE_IDS", "make_shape",
    "ControlInput", "ObjectSpec", "PlacementInfeasible", "SwarmState",
    "WorldConfig", "spawn", "step",
    "EmptySelection", "SwarmSummary", "hysteresis_thresholds",
    "optimal_packing_variance", "summarize",
    "MAZE_IDS", "Scenario", "default_spawn_region", "load_scenario",
    "make_scenario", "maze_config", "save_scenario", "scenario_digest",
    "ManipulationConfig", "ManipulationStatus", "PolicyMiss",
    "build_policy", "initial_status", "manipulation_step",
    "run_to_completion", "select_corner",
    "RegionMap", "build_regions",
    "ReplayResult", "TrialRecord", "config_digest", "load_record",
    "replay", "save_record", "state_digest",
    "SweepResult", "aggregate", "run_sweep",
]

__version__ = "0.1.0"
