"""Attractive/repulsive shaping of the swarm mean around the pushed object.

The attraction pulls the mean toward a standoff point behind the object so
the crowd lines up with the desired push direction; the repulsion fires only
inside a cutoff radius of the object's center AND inside an angular window
around the push direction, shoving the mean off the object's far side instead
of letting it drift around front and push backwards.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .world import ControlInput


class SingularPosition(Exception):
    """Swarm mean coincides with the object center; bearing undefined."""


@dataclass(frozen=True)
class PotentialParams:
    zeta: float = 2.0        # attraction gain (constant-magnitude pull)
    eta: float = 75.0        # repulsion gain
    rho0: float = 3.0        # repulsion cutoff distance
    theta: float = np.pi / 2  # half-angle of the repulsion cone around the push direction

    def __post_init__(self):
        if not (self.zeta > 0 and self.eta >= 0 and self.rho0 > 0):
            raise ValueError("gains and cutoff must be positive")
        if not 0 < self.theta <= np.pi:
            raise ValueError("theta must lie in (0, pi]")


def attract_point(object_com, desired_dir, standoff: float):
    """Standoff point behind the object, opposite the desired push direction."""
    d = np.asarray(desired_dir, dtype=float)
    return np.asarray(object_com, dtype=float) - standoff * d


def repulsive_force(mean, object_com, desired_dir, params: PotentialParams):
    """Repulsion on the swarm mean, zero outside the distance/angle gates.

    Magnitude eta*(1/rho - 1/rho0)/rho^2 decays to exactly zero at the
    cutoff, so the force is continuous there.
    """
    delta = np.asarray(mean, dtype=float) - np.asarray(object_com, dtype=float)
    rho = float(np.hypot(delta[0], delta[1]))
    if rho < 1e-12:
        raise SingularPosition("mean sits on the object center")
    if rho > params.rho0:
        return np.zeros(2)
    d = np.asarray(desired_dir, dtype=float)
    away = delta / rho
    # angle between the push direction and the object->mean bearing
    phi = float(np.arccos(np.clip(d[0] * away[0] + d[1] * away[1], -1.0, 1.0)))
    if phi >= params.theta:
        return np.zeros(2)
    mag = params.eta * (1.0 / rho - 1.0 / params.rho0) / rho ** 2
    return mag * away


def potential_force(summary, object_com, desired_dir, attract_at,
                    params: PotentialParams, max_force=None) -> ControlInput:
    """Total field force on the swarm mean, clamped to ``max_force``.

    ``summary`` is a swarm summary (its ``mean`` is used); ``attract_at`` is
    the precomputed standoff target.  When the mean sits exactly on the
    object center the repulsion bearing is undefined and the attraction alone
    is returned.
    """
    mean = np.asarray(summary.mean, dtype=float)
    target = np.asarray(attract_at, dtype=float)
    to_target = target - mean
    dist = float(np.hypot(to_target[0], to_target[1]))
    if dist < 1e-12:
        f_att = np.zeros(2)
    else:
        f_att = params.zeta * to_target / dist
    try:
        f_rep = repulsive_force(mean, object_com, desired_dir, params)
    except SingularPosition:
        f_rep = np.zeros(2)
    total = f_att + f_rep
    control = ControlInput(float(total[0]), float(total[1]))
    if max_force is not None:
        control = control.clamped(max_force)
    return control
