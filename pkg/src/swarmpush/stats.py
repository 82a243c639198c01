"""Moment and hull summaries of the swarm, plus reference variance levels.

These are the only quantities the feedback controllers are allowed to see:
with one shared input the individual particle states are neither controllable
nor needed, so everything downstream runs on mean, variance, and hull.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .geometry import convex_hull

ROOT3_BY_PI = np.sqrt(3.0) / np.pi


class EmptySelection(Exception):
    """The region filter excluded every particle."""


class DegenerateBox(Exception):
    """Box too small to hold a disc of the given radius."""


@dataclass(frozen=True)
class SwarmSummary:
    mean: np.ndarray          # (2,)
    mean_vel: np.ndarray      # (2,)
    variance: np.ndarray      # (2,) per-axis population variance
    covariance: np.ndarray    # (2, 2)
    hull: np.ndarray          # (k, 2) CCW
    count_used: int


Mask = Union[np.ndarray, Callable[[np.ndarray], np.ndarray], None]


def summarize(positions: np.ndarray, velocities: Optional[np.ndarray] = None,
              mask: Mask = None) -> SwarmSummary:
    """Population (1/n) moments and convex hull of the selected particles.

    ``mask`` may be a boolean array over particles or a callable mapping the
    (n, 2) position array to one; raises EmptySelection when nothing is left.
    """
    positions = np.asarray(positions, dtype=float)
    if velocities is None:
        velocities = np.zeros_like(positions)
    velocities = np.asarray(velocities, dtype=float)
    if callable(mask):
        mask = np.asarray(mask(positions), dtype=bool)
    if mask is not None:
        if not mask.any():
            raise EmptySelection("region filter excluded all particles")
        positions = positions[mask]
        velocities = velocities[mask]
    if len(positions) == 0:
        raise EmptySelection("no particles to summarize")

    mean = positions.mean(axis=0)
    dev = positions - mean
    cov = dev.T @ dev / len(positions)
    return SwarmSummary(
        mean=mean,
        mean_vel=velocities.mean(axis=0),
        variance=np.diagonal(cov).copy(),
        covariance=cov,
        hull=convex_hull(positions),
        count_used=len(positions),
    )


def optimal_packing_variance(n: int, r: float) -> float:
    """Positional variance of the densest possible packing of n discs.

    (sqrt(3)/pi) n r^2, about 0.55 n r^2: the tightest cluster the swarm can
    be squeezed into, hence the floor any variance controller can reach.
    """
    if n < 1 or r <= 0:
        raise ValueError("need n >= 1 and r > 0")
    return ROOT3_BY_PI * n * r * r


def uniform_box_variance(length: float, r: float) -> float:
    """Per-axis variance of discs spread uniformly along a box of given length.

    Centres live on [r, length - r], so the variance is (length - 2r)^2 / 12;
    this is the saturation level an unforced noisy swarm drifts toward.
    """
    if length <= 2 * r:
        raise DegenerateBox(f"box of length {length} cannot hold radius {r}")
    return (length - 2 * r) ** 2 / 12.0


def hysteresis_thresholds(n: int, r: float,
                          workspace_width: Optional[float] = None):
    """Conservative (var_min, var_max) band for switching control modes.

    Both sit above the packing floor; passing the workspace width adds the
    wider safety offsets used during object manipulation (0.003 W / 0.006 W).
    """
    base = optimal_packing_variance(n, r)
    var_min = 2.5 * r + base
    var_max = 15.0 * r + base
    if workspace_width is not None:
        var_min += 0.003 * workspace_width
        var_max += 0.006 * workspace_width
    return var_min, var_max
