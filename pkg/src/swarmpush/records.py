"""Trial records: what happened, with enough detail to replay it exactly.

A record pins the world config, the seed, and the per-step force log; the
simulator is deterministic given those, so replaying reproduces the identical
trajectory (verified through a digest over the raw state arrays).
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .world import ControlInput, SwarmState, WorldConfig, spawn, step

RECORD_VERSION = "swarmpush-record-1"


def state_digest(state: SwarmState) -> str:
    """Hex digest over the raw simulation state, bit-for-bit."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(state.positions).tobytes())
    h.update(np.ascontiguousarray(state.velocities).tobytes())
    h.update(np.ascontiguousarray(state.object_pose).tobytes())
    h.update(np.ascontiguousarray(state.object_velocity).tobytes())
    h.update(struct.pack("<d", state.time))
    return h.hexdigest()


def config_digest(config: WorldConfig) -> str:
    """Stable short digest of a world config (canonical JSON)."""
    payload = json.dumps(config.to_dict(), sort_keys=True,
                         separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class TrialRecord:
    scenario_digest: str
    config: dict                  # WorldConfig.to_dict(), re-runnable
    method: str                   # "vi+pf+or", "manual", ...
    seed: int
    success: bool
    completion_time_s: float
    wall_time_s: float
    steps: int
    final_summary: dict
    final_digest: str
    input_log: List[List[float]] = field(default_factory=list)
    spawn_region: Optional[List[float]] = None  # [xmin, ymin, xmax, ymax]
    participant: Optional[str] = None
    version: str = RECORD_VERSION

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "TrialRecord":
        d = json.loads(text)
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown record fields: {sorted(extra)}")
        return cls(**d)


def save_record(record: TrialRecord, path) -> None:
    with open(path, "w") as f:
        f.write(record.to_json())
        f.write("\n")


def load_record(path) -> TrialRecord:
    with open(path) as f:
        return TrialRecord.from_json(f.read())


@dataclass(frozen=True)
class ReplayResult:
    completion_time_s: float
    steps: int
    final_digest: str
    final_state: SwarmState


def replay(record: TrialRecord) -> ReplayResult:
    """Re-run a record's input log from its seed; byte-exact by construction.

    The original run draws its spawn placement and all noise from one
    generator seeded identically, so feeding the logged forces back through
    the simulator lands on the same final state.
    """
    from .geometry import Rect
    config = WorldConfig.from_dict(record.config)
    rng = np.random.default_rng(record.seed)
    region = Rect(*record.spawn_region) if record.spawn_region else None
    state = spawn(config, region=region, rng=rng)
    for fx, fy in record.input_log:
        state = step(config, state, ControlInput(float(fx), float(fy)), rng)
    return ReplayResult(state.time, len(record.input_log),
                        state_digest(state), state)
