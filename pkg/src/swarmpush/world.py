"""World configuration, swarm state, and the fixed-timestep simulator.

The simulator advances every particle with one shared control force; the only
thing that distinguishes particles is an unmeasured per-step noise kick with
uniform random heading and magnitude.  All randomness flows through the
numpy Generator handed to :func:`step`, so a (config, seed) pair replays
exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .geometry import Rect, rects_to_array
from .shapes import ObjectShape, make_shape, packed_parts


class PlacementInfeasible(Exception):
    """Raised when spawn cannot fit the requested swarm into the region."""


# engine constants not worth a config knob
_OBJECT_MASS_PER_WEIGHT = 8.0
_OBJECT_DRAG_PER_WEIGHT = 14.0
_OBJECT_ANGULAR_DRAG_RATE = 4.0  # 1/s, relative to inertia


@dataclass(frozen=True)
class ObjectSpec:
    """A rigid payload the swarm has to push.

    ``weight`` scales both mass and ground friction, so heavier objects both
    accelerate and coast less; it is the main difficulty knob.
    """
    shape: str = "square"
    scale: float = 1.0
    weight: float = 5.0
    start: tuple = (0.0, 0.0)
    start_angle: float = 0.0
    goal: tuple = (0.0, 0.0)
    goal_radius: float = 0.12

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("object weight must be positive")
        if self.scale <= 0:
            raise ValueError("object scale must be positive")
        make_shape(self.shape, self.scale)  # validates the shape id

    @property
    def mass(self) -> float:
        return _OBJECT_MASS_PER_WEIGHT * self.weight

    @property
    def linear_drag(self) -> float:
        return _OBJECT_DRAG_PER_WEIGHT * self.weight


@dataclass(frozen=True)
class WorldConfig:
    """Static description of one scenario.

    Lengths are metres, time seconds, mass kilograms.  ``noise_mode`` selects
    whether the per-particle disturbance enters as a velocity offset
    (default; variance of a free swarm grows linearly in time) or as an extra
    force term.
    """
    width: float = 2.4
    height: float = 1.8
    obstacles: tuple = ()
    particle_count: int = 100
    particle_radius: float = 0.015
    particle_mass: float = 1.0
    particle_drag: float = 2.0
    max_speed: float = 3.0
    max_force: float = 10.0
    noise_magnitude: float = 0.3
    noise_mode: str = "velocity"
    timestep: float = 1.0 / 60.0
    object: Optional[ObjectSpec] = None

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("workspace dimensions must be positive")
        if self.particle_count < 1:
            raise ValueError("need at least one particle")
        if self.particle_radius <= 0:
            raise ValueError("particle radius must be positive")
        if self.particle_mass <= 0:
            raise ValueError("particle mass must be positive")
        if self.timestep <= 0:
            raise ValueError("timestep must be positive")
        if self.max_speed <= 0 or self.max_force <= 0:
            raise ValueError("speed and force limits must be positive")
        if self.noise_magnitude < 0:
            raise ValueError("noise magnitude cannot be negative")
        if self.noise_mode not in ("velocity", "force"):
            raise ValueError("noise_mode must be 'velocity' or 'force'")
        if self.particle_drag < 0:
            raise ValueError("particle drag cannot be negative")
        obstacles = tuple(
            o if isinstance(o, Rect) else Rect(*o) for o in self.obstacles)
        object.__setattr__(self, "obstacles", obstacles)
        bounds = Rect(0.0, 0.0, self.width, self.height)
        for o in obstacles:
            if not bounds.contains_rect(o):
                raise ValueError(f"obstacle {o} exceeds the workspace")
        if self.object is not None and not bounds.contains(*self.object.goal):
            raise ValueError("object goal lies outside the workspace")

    @property
    def bounds(self) -> Rect:
        return Rect(0.0, 0.0, self.width, self.height)

    def shape(self) -> Optional[ObjectShape]:
        if self.object is None:
            return None
        return make_shape(self.object.shape, self.object.scale)

    def to_dict(self) -> dict:
        d = {
            "width": self.width,
            "height": self.height,
            "obstacles": [[o.xmin, o.ymin, o.xmax, o.ymax] for o in self.obstacles],
            "particle_count": self.particle_count,
            "particle_radius": self.particle_radius,
            "particle_mass": self.particle_mass,
            "particle_drag": self.particle_drag,
            "max_speed": self.max_speed,
            "max_force": self.max_force,
            "noise_magnitude": self.noise_magnitude,
            "noise_mode": self.noise_mode,
            "timestep": self.timestep,
        }
        if self.object is not None:
            d["object"] = {
                "shape": self.object.shape,
                "scale": self.object.scale,
                "weight": self.object.weight,
                "start": list(self.object.start),
                "start_angle": self.object.start_angle,
                "goal": list(self.object.goal),
                "goal_radius": self.object.goal_radius,
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "WorldConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        kw = dict(d)
        if "obstacles" in kw:
            kw["obstacles"] = tuple(Rect(*o) for o in kw["obstacles"])
        if kw.get("object") is not None:
            o = dict(kw["object"])
            oknown = {f for f in ObjectSpec.__dataclass_fields__}
            oextra = set(o) - oknown
            if oextra:
                raise ValueError(f"unknown object fields: {sorted(oextra)}")
            for key in ("start", "goal"):
                if key in o:
                    o[key] = tuple(o[key])
            kw["object"] = ObjectSpec(**o)
        return cls(**kw)


@dataclass
class ControlInput:
    """The one force everybody receives this step."""
    fx: float = 0.0
    fy: float = 0.0

    def clamped(self, max_force: float) -> "ControlInput":
        mag = np.hypot(self.fx, self.fy)
        if mag <= max_force or mag == 0.0:
            return self
        s = max_force / mag
        return ControlInput(self.fx * s, self.fy * s)

    def as_array(self) -> np.ndarray:
        return np.array([self.fx, self.fy])


@dataclass
class SwarmState:
    """Positions/velocities of every particle plus the payload pose."""
    positions: np.ndarray        # (n, 2)
    velocities: np.ndarray       # (n, 2)
    object_pose: np.ndarray      # (3,) x, y, angle
    object_velocity: np.ndarray  # (3,) vx, vy, omega
    time: float = 0.0

    def copy(self) -> "SwarmState":
        return SwarmState(self.positions.copy(), self.velocities.copy(),
                          self.object_pose.copy(), self.object_velocity.copy(),
                          self.time)

    @property
    def mean_position(self) -> np.ndarray:
        return self.positions.mean(axis=0)

    @property
    def mean_velocity(self) -> np.ndarray:
        return self.velocities.mean(axis=0)


def _free_disc(config: WorldConfig, x: float, y: float,
               shape_world: Optional[np.ndarray]) -> bool:
    r = config.particle_radius
    if x < r or x > config.width - r or y < r or y > config.height - r:
        return False
    for o in config.obstacles:
        if o.xmin - r < x < o.xmax + r and o.ymin - r < y < o.ymax + r:
            return False
    if shape_world is not None:
        for part in shape_world:
            depth, *_ = _kernels._disc_part_contact(x, y, r, part, len(part))
            if depth > 0.0:
                return False
    return True


def spawn(config: WorldConfig, region: Optional[Rect] = None,
          seed: Optional[int] = None,
          rng: Optional[np.random.Generator] = None) -> SwarmState:
    """Sample a non-overlapping swarm inside ``region`` (default: whole world).

    Rejection sampling; raises PlacementInfeasible after 10000 consecutive
    rejected candidates, which in practice means the region cannot hold
    ``particle_count`` discs.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    if region is None:
        region = config.bounds
    r = config.particle_radius
    lo_x, hi_x = max(region.xmin, r), min(region.xmax, config.width - r)
    lo_y, hi_y = max(region.ymin, r), min(region.ymax, config.height - r)
    if hi_x < lo_x or hi_y < lo_y:
        raise PlacementInfeasible(f"region {region} leaves no room for radius {r}")

    if config.object is not None:
        shape = config.shape()
        pose = np.array([*config.object.start, config.object.start_angle])
        shape_world = shape.world_parts(pose[:2], pose[2])
    else:
        shape = None
        pose = np.zeros(3)
        shape_world = None

    n = config.particle_count
    placed = np.empty((n, 2))
    count = 0
    rejections = 0
    min_sq = (2.0 * r) ** 2
    while count < n:
        x = rng.uniform(lo_x, hi_x)
        y = rng.uniform(lo_y, hi_y)
        ok = _free_disc(config, x, y, shape_world)
        if ok:
            d = placed[:count] - (x, y)
            if count and (np.einsum("ij,ij->i", d, d) < min_sq).any():
                ok = False
        if not ok:
            rejections += 1
            if rejections >= 10000:
                raise PlacementInfeasible(
                    f"placed {count}/{n} discs before 10000 consecutive rejections")
            continue
        placed[count] = (x, y)
        count += 1
        rejections = 0

    return SwarmState(
        positions=placed,
        velocities=np.zeros((n, 2)),
        object_pose=pose,
        object_velocity=np.zeros(3),
        time=0.0,
    )


def sample_noise(config: WorldConfig, rng: np.random.Generator) -> np.ndarray:
    """Per-particle disturbance: uniform magnitude in [0, M], uniform heading."""
    n = config.particle_count
    mag = rng.uniform(0.0, config.noise_magnitude, n)
    ang = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.column_stack((mag * np.cos(ang), mag * np.sin(ang)))


def _runtime(config: WorldConfig):
    """Kernel-ready arrays for a config, memoised on the instance."""
    cached = getattr(config, "_rt", None)
    if cached is not None:
        return cached
    shape = config.shape()
    if shape is not None:
        parts, counts = packed_parts(shape)
        obj_mass = config.object.mass
        obj_inertia = shape.inertia_per_mass * obj_mass
        lin_drag = config.object.linear_drag
        ang_drag = _OBJECT_ANGULAR_DRAG_RATE * obj_inertia
        has_object = True
    else:
        parts = np.zeros((1, 3, 2))
        counts = np.zeros(1, dtype=np.int64)
        obj_mass = obj_inertia = 1.0
        lin_drag = ang_drag = 0.0
        has_object = False
    rt = (rects_to_array(config.obstacles), parts, counts, obj_mass,
          obj_inertia, lin_drag, ang_drag, has_object)
    object.__setattr__(config, "_rt", rt)
    return rt


def step(config: WorldConfig, state: SwarmState, control: ControlInput,
         rng: np.random.Generator) -> SwarmState:
    """Advance one timestep; returns a new state, inputs untouched."""
    control = control.clamped(config.max_force)
    noise = sample_noise(config, rng)
    out = state.copy()
    obj = np.concatenate((out.object_pose, out.object_velocity))

    (obstacles, parts, counts, obj_mass, obj_inertia,
     lin_drag, ang_drag, has_object) = _runtime(config)

    _kernels.step_kernel(
        out.positions, out.velocities, obj, noise,
        float(control.fx), float(control.fy),
        config.timestep, config.particle_radius, config.particle_mass,
        config.max_speed, config.particle_drag,
        config.width, config.height, obstacles,
        parts, counts, obj_mass, obj_inertia, lin_drag, ang_drag,
        config.noise_mode == "force", has_object,
    )

    out.object_pose = obj[:3]
    out.object_velocity = obj[3:]
    out.time = state.time + config.timestep
    return out


def with_object_at(state: SwarmState, pose: Sequence[float]) -> SwarmState:
    out = state.copy()
    out.object_pose = np.asarray(pose, dtype=float)
    return out
