"""Committed maze fixtures and the scenario file format.

Scenario files are plain JSON whose keys are exactly the world-config field
names; anything else is rejected so typos fail loudly instead of silently
running a default.  The four maze layouts ship as data files.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .geometry import Rect
from .records import config_digest
from .world import ObjectSpec, WorldConfig

MAZE_IDS = ("open-box", "s-maze", "fig-story-maze", "fig-region-maze")

# sweep noise values are quoted on the 0..10 scale; one unit of that scale
# maps to this much velocity-noise magnitude (W=5 hits the config default 0.3)
NOISE_UNIT = 0.06


def scenario_digest(config: WorldConfig) -> str:
    return config_digest(config)


def load_scenario(path) -> WorldConfig:
    """Read a scenario file; unknown fields raise ValueError."""
    with open(path) as f:
        data = json.load(f)
    return WorldConfig.from_dict(data)


def save_scenario(config: WorldConfig, path) -> None:
    with open(path, "w") as f:
        json.dump(config.to_dict(), f, indent=2)
        f.write("\n")


def maze_config(maze_id: str) -> WorldConfig:
    """Load one of the committed maze fixtures by id."""
    if maze_id not in MAZE_IDS:
        raise ValueError(f"unknown maze {maze_id!r}; choose from {MAZE_IDS}")
    text = resources.files("swarmpush.data").joinpath(f"{maze_id}.json") \
                    .read_text()
    return WorldConfig.from_dict(json.loads(text))


def default_spawn_region(config: WorldConfig) -> Rect:
    """A box behind the object start where the swarm materializes.

    Placing the crowd on the far side from the goal means the very first
    pushes already point the right way; a box straddling the object would
    have half the swarm pressing it backward.  Clamped to the workspace and
    sized to hold the default swarm at comfortable density.
    """
    if config.object is None:
        return Rect(0.0, 0.0, config.width, config.height)
    sx, sy = config.object.start
    gx, gy = config.object.goal
    if abs(gx - sx) >= abs(gy - sy):
        lo = sx - 0.65 if gx >= sx else sx
        hi = sx if gx >= sx else sx + 0.65
        box = Rect(lo, sy - 0.4, hi, sy + 0.4)
    else:
        lo = sy - 0.65 if gy >= sy else sy
        hi = sy if gy >= sy else sy + 0.65
        box = Rect(sx - 0.4, lo, sx + 0.4, hi)
    return Rect(max(box.xmin, 0.0), max(box.ymin, 0.0),
                min(box.xmax, config.width), min(box.ymax, config.height))


@dataclass(frozen=True)
class Scenario:
    """Everything one trial needs: world, method, seed, spawn placement."""
    maze_id: str
    config: WorldConfig
    method: str = "vi+pf+or"
    seed: int = 0
    spawn_region: Optional[Rect] = None

    @property
    def digest(self) -> str:
        return scenario_digest(self.config)

    def spawn_box(self) -> Rect:
        return self.spawn_region or default_spawn_region(self.config)


def make_scenario(maze_id: str, *, shape: Optional[str] = None,
                  robots: Optional[int] = None,
                  noise_w: Optional[float] = None,
                  weight: Optional[float] = None,
                  method: str = "vi+pf+or", seed: int = 0,
                  config: Optional[WorldConfig] = None) -> Scenario:
    """Maze fixture with the usual knobs overridden.

    ``noise_w`` is on the 0..10 sweep scale; ``config`` substitutes a fully
    custom world (e.g. from a scenario file) instead of the maze fixture.
    """
    cfg = config if config is not None else maze_config(maze_id)
    if robots is not None:
        cfg = dataclasses.replace(cfg, particle_count=int(robots))
    if noise_w is not None:
        cfg = dataclasses.replace(cfg, noise_magnitude=noise_w * NOISE_UNIT)
    if shape is not None or weight is not None:
        if cfg.object is None:
            raise ValueError("scenario has no object to restyle")
        obj = cfg.object
        obj = dataclasses.replace(
            obj,
            shape=shape if shape is not None else obj.shape,
            weight=weight if weight is not None else obj.weight)
        cfg = dataclasses.replace(cfg, object=obj)
    return Scenario(maze_id, cfg, method=method, seed=seed)
