"""The six equal-area pushable object shapes and their collision geometry.

Every shape is normalised to the same footprint area (0.03 m^2 at scale 1) and
represented as a union of convex CCW polygons in the object frame with the
centre of mass at the origin.  The concave H shape decomposes into three bars;
the circle is a fine regular polygon whose area matches exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import convex_hull, min_hull_width, polygon_area, polygon_inertia_per_mass

SHAPE_IDS = ("circle", "triangle", "square", "rectangle", "hexagon", "h-shape")
UNIT_AREA = 0.03  # m^2 at scale 1, shared by all six shapes


@dataclass(frozen=True)
class ObjectShape:
    """Collision geometry of one object: convex parts plus cached bulk properties."""

    shape_id: str
    parts: tuple  # tuple of (k, 2) vertex arrays, CCW, object frame
    area: float
    circumradius: float
    min_width: float
    inertia_per_mass: float  # multiply by mass for the polar moment about the COM
    hull: np.ndarray = field(repr=False, default=None)

    def world_parts(self, pos, angle):
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        return [p @ rot.T + np.asarray(pos) for p in self.parts]


def _regular_polygon(k: int, area: float, phase: float = 0.0) -> np.ndarray:
    # vertex radius giving the requested polygon area
    radius = math.sqrt(2.0 * area / (k * math.sin(2.0 * math.pi / k)))
    ang = phase + 2.0 * math.pi * np.arange(k) / k
    return np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)


def _h_parts(area: float):
    # two full-height bars plus a centre crossbar: total area 7 a^2
    a = math.sqrt(area / 7.0)
    bars = [
        np.array([[-1.5 * a, -1.5 * a], [-0.5 * a, -1.5 * a],
                  [-0.5 * a, 1.5 * a], [-1.5 * a, 1.5 * a]]),
        np.array([[0.5 * a, -1.5 * a], [1.5 * a, -1.5 * a],
                  [1.5 * a, 1.5 * a], [0.5 * a, 1.5 * a]]),
        np.array([[-0.5 * a, -0.5 * a], [0.5 * a, -0.5 * a],
                  [0.5 * a, 0.5 * a], [-0.5 * a, 0.5 * a]]),
    ]
    return bars


@lru_cache(maxsize=None)
def make_shape(shape_id: str, scale: float = 1.0) -> ObjectShape:
    """Build the collision geometry for one of the six shape ids."""
    if shape_id not in SHAPE_IDS:
        raise ValueError(f"unknown shape {shape_id!r}; expected one of {SHAPE_IDS}")
    area = UNIT_AREA * scale * scale
    if shape_id == "circle":
        parts = [_regular_polygon(24, area)]
    elif shape_id == "triangle":
        parts = [_regular_polygon(3, area, phase=math.pi / 2)]
    elif shape_id == "square":
        parts = [_regular_polygon(4, area, phase=math.pi / 4)]
    elif shape_id == "rectangle":
        # 2:3 aspect, flat-side down
        w = math.sqrt(area * 2.0 / 3.0)
        h = 1.5 * w
        parts = [np.array([[-w / 2, -h / 2], [w / 2, -h / 2],
                           [w / 2, h / 2], [-w / 2, h / 2]])]
    elif shape_id == "hexagon":
        parts = [_regular_polygon(6, area)]
    else:
        parts = _h_parts(area)

    all_verts = np.vstack(parts)
    hull = convex_hull(all_verts)
    total_area = sum(abs(polygon_area(p)) for p in parts)
    # inertia of a union of parts about the common origin: area-weighted sum
    inertia = sum(polygon_inertia_per_mass(p) * abs(polygon_area(p)) for p in parts) / total_area
    return ObjectShape(
        shape_id=shape_id,
        parts=tuple(np.ascontiguousarray(p, dtype=float) for p in parts),
        area=total_area,
        circumradius=float(np.max(np.hypot(all_verts[:, 0], all_verts[:, 1]))),
        min_width=min_hull_width(hull),
        inertia_per_mass=inertia,
        hull=hull,
    )


def packed_parts(shape: ObjectShape):
    """Pad the convex parts into fixed-size arrays for the numba step kernel.

    Returns (verts, counts): verts is (n_parts, max_verts, 2) with unused rows
    repeating the last vertex, counts is (n_parts,).
    """
    cached = getattr(shape, "_packed", None)
    if cached is not None:
        return cached
    counts = np.array([len(p) for p in shape.parts], dtype=np.int64)
    max_v = int(counts.max())
    verts = np.zeros((len(shape.parts), max_v, 2))
    for i, p in enumerate(shape.parts):
        verts[i, : len(p)] = p
        verts[i, len(p):] = p[-1]
    object.__setattr__(shape, "_packed", (verts, counts))
    return verts, counts
