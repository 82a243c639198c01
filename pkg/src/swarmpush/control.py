"""Moment-feedback control laws and the switching logic between them.

Only two numbers per axis ever reach an actuator here: the swarm's mean and
variance.  That is all a shared global force can control, which the
controllability ranks at the bottom of this module make precise.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .stats import SwarmSummary
from .world import ControlInput, WorldConfig

MEAN_CONTROL = "MEAN_CONTROL"
VARIANCE_REDUCTION = "VARIANCE_REDUCTION"

# direction order shared with the planner: E, NE, N, NW, W, SW, S, SE
LIGHT_ANGLES = np.pi / 4 * np.arange(8)


class ZeroVector(Exception):
    """A direction was requested from a zero-magnitude input."""


@dataclass(frozen=True)
class Gains:
    kp: float = 4.0
    kd: float = 1.0
    ki: float = 0.0

    def __post_init__(self):
        if self.kp < 0 or self.kd < 0:
            raise ValueError("kp and kd must be non-negative")


def _clamp(fx: float, fy: float, max_force: Optional[float]) -> ControlInput:
    u = ControlInput(float(fx), float(fy))
    return u if max_force is None else u.clamped(max_force)


def mean_pd(summary: SwarmSummary, goal, gains: Gains,
            max_force: Optional[float] = None) -> ControlInput:
    """PD law driving the swarm mean toward ``goal`` with zero target velocity."""
    ex = goal[0] - summary.mean[0]
    ey = goal[1] - summary.mean[1]
    fx = gains.kp * ex + gains.kd * (0.0 - summary.mean_vel[0])
    fy = gains.kp * ey + gains.kd * (0.0 - summary.mean_vel[1])
    return _clamp(fx, fy, max_force)


def variance_goal_offset(var_ref: float, r: float) -> float:
    """Distance from the squeezing wall whose steady state has the target variance."""
    return r + np.sqrt(3.0 * var_ref)


def variance_pid(summary: SwarmSummary, var_ref: float, wall: str,
                 gains: Gains, config: WorldConfig,
                 max_force: Optional[float] = None) -> ControlInput:
    """Squeeze the swarm against a wall until its variance reaches ``var_ref``.

    The driven axis is the one the wall bounds; the goal sits the uniform
    steady-state offset away from that wall.  For right/top walls the
    proportional and variance gains flip sign and the goal mirrors.
    """
    if wall not in ("left", "right", "bottom", "top"):
        raise ValueError(f"unknown wall {wall!r}")
    axis = 0 if wall in ("left", "right") else 1
    length = config.width if axis == 0 else config.height
    offset = variance_goal_offset(var_ref, config.particle_radius)
    mirrored = wall in ("right", "top")
    goal = length - offset if mirrored else offset

    # mirrored wall == reflect the world, apply the left-wall law, reflect
    # the output; net effect: goal mirrors and the variance term flips sign
    err = goal - summary.mean[axis]
    varerr = var_ref - summary.variance[axis]
    sign = -1.0 if mirrored else 1.0
    f = gains.kp * err - gains.kd * summary.mean_vel[axis] \
        + sign * gains.ki * varerr
    out = [0.0, 0.0]
    out[axis] = f
    return _clamp(out[0], out[1], max_force)


def lyapunov_value(var: float, var_goal: float) -> float:
    """Monitor for variance regulation: half squared variance error."""
    return 0.5 * (var - var_goal) ** 2


@dataclass(frozen=True)
class HybridState:
    """Per-axis mode and current goal of the mean/variance switching controller."""
    mode_x: str = MEAN_CONTROL
    mode_y: str = MEAN_CONTROL
    goal: Tuple[float, float] = (0.0, 0.0)


def _nearest_wall_coord(mean: float, length: float) -> float:
    return 0.0 if mean <= length / 2 else length


def hybrid_step(state: HybridState, summary: SwarmSummary, target,
                thresholds: Tuple[float, float], config: WorldConfig,
                gains: Gains) -> Tuple[HybridState, ControlInput]:
    """One decision of the hysteresis controller, then the PD force it implies.

    Normally tracks ``target``; an axis whose variance tops var_max retargets
    to its nearest wall until the variance drops under var_min.  Inside the
    band nothing switches, which is what keeps the modes from chattering.
    """
    var_min, var_max = thresholds
    if not var_min < var_max:
        raise ValueError("need var_min < var_max")

    modes = [state.mode_x, state.mode_y]
    goal = list(state.goal)
    lengths = (config.width, config.height)
    for axis in range(2):
        if summary.variance[axis] > var_max:
            if modes[axis] != VARIANCE_REDUCTION:
                modes[axis] = VARIANCE_REDUCTION
                goal[axis] = _nearest_wall_coord(summary.mean[axis], lengths[axis])
        elif summary.variance[axis] < var_min:
            modes[axis] = MEAN_CONTROL
        if modes[axis] == MEAN_CONTROL:
            goal[axis] = target[axis]

    new_state = HybridState(modes[0], modes[1], (goal[0], goal[1]))
    return new_state, mean_pd(summary, goal, gains, config.max_force)


def discretize_to_lights(u: ControlInput) -> int:
    """Nearest of the eight 45-degree actuation directions, 0 = east, CCW.

    Exact sector-boundary ties go to the lower index.
    """
    mag = np.hypot(u.fx, u.fy)
    if mag == 0.0:
        raise ZeroVector("cannot pick a light direction for a zero force")
    ang = np.arctan2(u.fy, u.fx) % (2.0 * np.pi)
    s = ang / (np.pi / 4.0) + 0.5
    idx = int(np.floor(s))
    if s - idx < 1e-9:  # on a sector boundary (to fp error): lower index wins
        idx -= 1
    return idx % 8


def light_direction(index: int) -> np.ndarray:
    ang = LIGHT_ANGLES[index % 8]
    return np.array([np.cos(ang), np.sin(ang)])


@dataclass(frozen=True)
class LinearSystem:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if B.shape[0] != A.shape[0]:
            raise ValueError("B row count must match A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)


def single_particle_system(mass: float = 1.0) -> LinearSystem:
    """One holonomic particle, states (x, vx, y, vy), inputs (ux, uy)."""
    A = np.array([[0, 1, 0, 0],
                  [0, 0, 0, 0],
                  [0, 0, 0, 1],
                  [0, 0, 0, 0]], dtype=float)
    B = np.array([[0, 0],
                  [1 / mass, 0],
                  [0, 0],
                  [0, 1 / mass]], dtype=float)
    return LinearSystem(A, B)


def shared_input_system(n: int) -> LinearSystem:
    """n particles on one axis, all fed the same force: 2n states, 1 input."""
    A = np.zeros((2 * n, 2 * n))
    B = np.zeros((2 * n, 1))
    for i in range(n):
        A[2 * i, 2 * i + 1] = 1.0
        B[2 * i + 1, 0] = 1.0
    return LinearSystem(A, B)


def mean_system() -> LinearSystem:
    """Reduced-order dynamics of the swarm's mean on one axis."""
    return LinearSystem(np.array([[0.0, 1.0], [0.0, 0.0]]),
                        np.array([[0.0], [1.0]]))


def controllability_matrix(system: LinearSystem) -> np.ndarray:
    n = system.A.shape[0]
    blocks = [system.B]
    for _ in range(n - 1):
        blocks.append(system.A @ blocks[-1])
    return np.hstack(blocks)


def controllability_rank(system: LinearSystem) -> int:
    """Numerical rank of [B, AB, ..., A^(n-1)B] at 1e-9 relative tolerance."""
    c = controllability_matrix(system)
    sv = np.linalg.svd(c, compute_uv=False)
    if len(sv) == 0 or sv[0] == 0.0:
        return 0
    return int((sv > 1e-9 * sv[0]).sum())
