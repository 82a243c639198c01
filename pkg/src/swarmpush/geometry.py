"""Axis-aligned rectangles, polygon helpers and the convex hull used across the library."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [xmin, xmax] x [ymin, ymax]."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if self.xmax < self.xmin or self.ymax < self.ymin:
            raise ValueError(f"degenerate rect {self}")

    @property
    def width(self):
        return self.xmax - self.xmin

    @property
    def height(self):
        return self.ymax - self.ymin

    @property
    def center(self):
        return (0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))

    @property
    def area(self):
        return self.width * self.height

    def contains(self, x, y):
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def contains_rect(self, other: "Rect"):
        return (self.xmin <= other.xmin and other.xmax <= self.xmax
                and self.ymin <= other.ymin and other.ymax <= self.ymax)

    def inflated(self, margin: float) -> "Rect":
        return Rect(self.xmin - margin, self.ymin - margin,
                    self.xmax + margin, self.ymax + margin)

    def overlaps(self, other: "Rect") -> bool:
        """Strict interior overlap; shared edges do not count."""
        return (self.xmin < other.xmax and other.xmin < self.xmax
                and self.ymin < other.ymax and other.ymin < self.ymax)

    def corners(self):
        return [(self.xmin, self.ymin), (self.xmax, self.ymin),
                (self.xmax, self.ymax), (self.xmin, self.ymax)]

    def as_array(self):
        return np.array([self.xmin, self.ymin, self.xmax, self.ymax])


def rects_to_array(rects) -> np.ndarray:
    """Stack rects into a (k, 4) float array; empty list gives shape (0, 4)."""
    if not rects:
        return np.zeros((0, 4))
    return np.array([r.as_array() for r in rects])


def segment_intersects_rect(p0, p1, rect: Rect, shrink: float = 1e-9) -> bool:
    """True when segment p0-p1 passes through the interior of ``rect``.

    The rect is shrunk by ``shrink`` so segments that merely graze an edge or
    start at a corner of the rect do not count.
    """
    xmin, ymin = rect.xmin + shrink, rect.ymin + shrink
    xmax, ymax = rect.xmax - shrink, rect.ymax - shrink
    if xmax <= xmin or ymax <= ymin:
        return False
    # Liang-Barsky clipping
    x0, y0 = p0
    x1, y1 = p1
    dx, dy = x1 - x0, y1 - y0
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x0 - xmin), (dx, xmax - x0),
                 (-dy, y0 - ymin), (dy, ymax - y0)):
        if p == 0.0:
            if q < 0.0:
                return False
            continue
        t = q / p
        if p < 0.0:
            if t > t1:
                return False
            t0 = max(t0, t)
        else:
            if t < t0:
                return False
            t1 = min(t1, t)
    return t0 < t1


def polygon_area(verts: np.ndarray) -> float:
    """Signed area of a polygon (positive for CCW vertex order)."""
    x = verts[:, 0]
    y = verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_centroid(verts: np.ndarray) -> np.ndarray:
    x = verts[:, 0]
    y = verts[:, 1]
    xr = np.roll(x, -1)
    yr = np.roll(y, -1)
    cross = x * yr - xr * y
    a = 0.5 * np.sum(cross)
    cx = np.sum((x + xr) * cross) / (6.0 * a)
    cy = np.sum((y + yr) * cross) / (6.0 * a)
    return np.array([cx, cy])


def polygon_inertia_per_mass(verts: np.ndarray) -> float:
    """Second polar moment about the origin divided by the polygon area.

    Multiply by mass to get the moment of inertia of a uniform lamina whose
    centroid sits at the origin.
    """
    x = verts[:, 0]
    y = verts[:, 1]
    xr = np.roll(x, -1)
    yr = np.roll(y, -1)
    cross = x * yr - xr * y
    num = np.sum(cross * (x * x + x * xr + xr * xr + y * y + y * yr + yr * yr))
    den = 6.0 * np.sum(cross)
    return float(num / den)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, CCW from the lexicographically smallest point.

    Collinear points are dropped so the vertex list is canonical. Degenerate
    inputs return what is left: a single point or a two-point segment.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected (n, 2) points")
    uniq = sorted({(float(p[0]), float(p[1])) for p in pts})
    if len(uniq) <= 2:
        return np.array(uniq, dtype=float)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in uniq:
        while len(lower) > 1 and cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(uniq):
        while len(upper) > 1 and cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:  # all points collinear
        return np.array([uniq[0], uniq[-1]], dtype=float)
    return np.array(hull, dtype=float)


def point_in_convex_polygon(point, verts: np.ndarray, eps: float = 1e-9) -> bool:
    """Membership test for a CCW convex polygon, tolerant to ``eps`` slack."""
    n = len(verts)
    if n == 1:
        return bool(np.hypot(point[0] - verts[0, 0], point[1] - verts[0, 1]) <= eps)
    px, py = point
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        if (x1 - x0) * (py - y0) - (px - x0) * (y1 - y0) < -eps:
            return False
    return True


def min_hull_width(verts: np.ndarray, samples: int = 360) -> float:
    """Smallest support-to-support width of a convex vertex set over sampled directions."""
    angles = np.linspace(0.0, np.pi, samples, endpoint=False)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    proj = verts @ dirs.T
    return float(np.min(proj.max(axis=0) - proj.min(axis=0)))
