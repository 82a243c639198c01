"""Main/transfer decomposition of free space for outlier-filtered feedback.

Each obstacle is extended along its long axis until it meets another obstacle
or the boundary; those zero-width cut segments, together with the obstacles
themselves, carve the workspace into main regions.  A transfer band straddles
each cut so the filter has an explicit handover zone while the object crosses
between regions: particles outside the active region (or band) are outliers
and get excluded from the swarm statistics.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from .geometry import Rect
from .world import WorldConfig

MAIN = "MAIN"
TRANSFER = "TRANSFER"


@dataclass(frozen=True)
class Cut:
    """Zero-width extension of an obstacle: a vertical or horizontal segment."""
    vertical: bool
    position: float         # x for vertical cuts, y for horizontal
    lo: float
    hi: float


@dataclass(frozen=True)
class RegionMap:
    main_regions: tuple     # tuple of tuples of Rect (rectilinear unions)
    transfer_regions: tuple  # one Rect band per cut
    cuts: tuple
    active_state: str = MAIN
    active_id: int = 0
    # membership lookup tables (slab grid)
    xs: np.ndarray = None   # sorted slab edges
    ys: np.ndarray = None
    slab_region: np.ndarray = None  # (len(ys)-1, len(xs)-1) region id or -1
    band_regions: tuple = None      # per band: ids of the regions it joins

    def region_of(self, point) -> int:
        """Main region id containing the point, -1 inside an obstacle."""
        ix = int(np.searchsorted(self.xs, point[0], side="right")) - 1
        iy = int(np.searchsorted(self.ys, point[1], side="right")) - 1
        ix = min(max(ix, 0), self.slab_region.shape[1] - 1)
        iy = min(max(iy, 0), self.slab_region.shape[0] - 1)
        return int(self.slab_region[iy, ix])

    def transfer_of(self, point) -> Optional[int]:
        """Id of the transfer band containing the point, None outside all."""
        for i, band in enumerate(self.transfer_regions):
            if band.contains(point[0], point[1]):
                return i
        return None

    def _slab_ids(self, positions: np.ndarray) -> np.ndarray:
        ix = np.clip(np.searchsorted(self.xs, positions[:, 0], side="right") - 1,
                     0, self.slab_region.shape[1] - 1)
        iy = np.clip(np.searchsorted(self.ys, positions[:, 1], side="right") - 1,
                     0, self.slab_region.shape[0] - 1)
        return self.slab_region[iy, ix]

    def particle_mask(self, positions: np.ndarray) -> np.ndarray:
        """Membership of each particle in the currently active region.

        During a transfer the trusted population is the band plus the
        regions it joins: a band alone can be momentarily empty while the
        swarm streams across, and a near-empty filter is worse than none.
        """
        if self.active_state == TRANSFER:
            band = self.transfer_regions[self.active_id]
            m = ((positions[:, 0] >= band.xmin) & (positions[:, 0] <= band.xmax)
                 & (positions[:, 1] >= band.ymin) & (positions[:, 1] <= band.ymax))
            if self.band_regions is not None:
                joined = self.band_regions[self.active_id]
                if joined:
                    m |= np.isin(self._slab_ids(positions), list(joined))
            return m
        return self._slab_ids(positions) == self.active_id


def _extend_cuts(config: WorldConfig) -> List[Cut]:
    cuts = []
    for o in config.obstacles:
        vertical = o.height >= o.width
        if vertical:
            centre = 0.5 * (o.xmin + o.xmax)
            # extend upward from the top tip
            blockers = [b.ymin for b in config.obstacles if b is not o
                        and b.xmin < o.xmax and b.xmax > o.xmin
                        and b.ymin >= o.ymax]
            top = min(blockers) if blockers else config.height
            if o.ymax < config.height and top > o.ymax:
                cuts.append(Cut(True, centre, o.ymax, top))
            # and downward from the bottom tip
            blockers = [b.ymax for b in config.obstacles if b is not o
                        and b.xmin < o.xmax and b.xmax > o.xmin
                        and b.ymax <= o.ymin]
            bottom = max(blockers) if blockers else 0.0
            if o.ymin > 0 and bottom < o.ymin:
                cuts.append(Cut(True, centre, bottom, o.ymin))
        else:
            centre = 0.5 * (o.ymin + o.ymax)
            blockers = [b.xmin for b in config.obstacles if b is not o
                        and b.ymin < o.ymax and b.ymax > o.ymin
                        and b.xmin >= o.xmax]
            right = min(blockers) if blockers else config.width
            if o.xmax < config.width and right > o.xmax:
                cuts.append(Cut(False, centre, o.xmax, right))
            blockers = [b.xmax for b in config.obstacles if b is not o
                        and b.ymin < o.ymax and b.ymax > o.ymin
                        and b.xmax <= o.xmin]
            left = max(blockers) if blockers else 0.0
            if o.xmin > 0 and left < o.xmin:
                cuts.append(Cut(False, centre, left, o.xmin))
    return cuts


def _cut_blocks_vertical_edge(cuts, x, y0, y1) -> bool:
    # does any vertical cut lie on this shared slab edge?
    for c in cuts:
        if c.vertical and abs(c.position - x) < 1e-12 \
                and c.lo <= y0 + 1e-12 and c.hi >= y1 - 1e-12:
            return True
    return False


def _cut_blocks_horizontal_edge(cuts, y, x0, x1) -> bool:
    for c in cuts:
        if not c.vertical and abs(c.position - y) < 1e-12 \
                and c.lo <= x0 + 1e-12 and c.hi >= x1 - 1e-12:
            return True
    return False


def build_regions(config: WorldConfig, buffer: Optional[float] = None) -> RegionMap:
    """Decompose free space into main regions plus transfer bands.

    ``buffer`` is the half-width of each transfer band; the default is twice
    the object circumradius (or 4% of the workspace diagonal without one).
    """
    if buffer is None:
        shape = config.shape()
        if shape is not None:
            buffer = 2.0 * shape.circumradius
        else:
            buffer = 0.04 * float(np.hypot(config.width, config.height))

    cuts = _extend_cuts(config)

    # slab grid from every distinct x/y feature coordinate
    xs = {0.0, config.width}
    ys = {0.0, config.height}
    for o in config.obstacles:
        xs.update((o.xmin, o.xmax))
        ys.update((o.ymin, o.ymax))
    for c in cuts:
        if c.vertical:
            xs.add(c.position)
            ys.update((c.lo, c.hi))
        else:
            ys.add(c.position)
            xs.update((c.lo, c.hi))
    xs = np.array(sorted(xs))
    ys = np.array(sorted(ys))
    nsx, nsy = len(xs) - 1, len(ys) - 1

    blocked = np.zeros((nsy, nsx), dtype=bool)
    for j in range(nsy):
        for i in range(nsx):
            cx = 0.5 * (xs[i] + xs[i + 1])
            cy = 0.5 * (ys[j] + ys[j + 1])
            for o in config.obstacles:
                if o.xmin < cx < o.xmax and o.ymin < cy < o.ymax:
                    blocked[j, i] = True
                    break

    # union-find over free slabs; adjacency blocked across cuts
    parent = list(range(nsy * nsx))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for j in range(nsy):
        for i in range(nsx):
            if blocked[j, i]:
                continue
            if i + 1 < nsx and not blocked[j, i + 1]:
                if not _cut_blocks_vertical_edge(cuts, xs[i + 1], ys[j], ys[j + 1]):
                    union(j * nsx + i, j * nsx + i + 1)
            if j + 1 < nsy and not blocked[j + 1, i]:
                if not _cut_blocks_horizontal_edge(cuts, ys[j + 1], xs[i], xs[i + 1]):
                    union(j * nsx + i, (j + 1) * nsx + i)

    # canonical region ids, ordered by lowest (x, y) slab corner
    roots = {}
    for j in range(nsy):
        for i in range(nsx):
            if not blocked[j, i]:
                roots.setdefault(find(j * nsx + i), []).append((i, j))
    ordered = sorted(roots.values(),
                     key=lambda slabs: min((xs[i], ys[j]) for i, j in slabs))

    slab_region = np.full((nsy, nsx), -1, dtype=np.int64)
    regions = []
    for rid, slabs in enumerate(ordered):
        rects = []
        for i, j in sorted(slabs):
            slab_region[j, i] = rid
            rects.append(Rect(xs[i], ys[j], xs[i + 1], ys[j + 1]))
        regions.append(tuple(rects))

    bands = []
    band_ids = []
    nsy, nsx = slab_region.shape
    for c in cuts:
        if c.vertical:
            band = Rect(max(c.position - buffer, 0.0), c.lo,
                        min(c.position + buffer, config.width), c.hi)
        else:
            band = Rect(c.lo, max(c.position - buffer, 0.0),
                        c.hi, min(c.position + buffer, config.height))
        bands.append(band)
        joined = set()
        for j in range(nsy):
            for i in range(nsx):
                rid = int(slab_region[j, i])
                if rid >= 0 and xs[i] < band.xmax - 1e-12 \
                        and xs[i + 1] > band.xmin + 1e-12 \
                        and ys[j] < band.ymax - 1e-12 \
                        and ys[j + 1] > band.ymin + 1e-12:
                    joined.add(rid)
        band_ids.append(tuple(sorted(joined)))

    return RegionMap(tuple(regions), tuple(bands), tuple(cuts),
                     MAIN, 0, xs, ys, slab_region, tuple(band_ids))


def region_filter_update(rmap: RegionMap, object_pos) -> RegionMap:
    """Advance the MAIN/TRANSFER state machine for the object's position.

    Entering any transfer band toggles to TRANSFER; leaving every band while
    inside a main region toggles back to MAIN with that region active.  The
    returned map shares the immutable geometry with the input.
    """
    band = rmap.transfer_of(object_pos)
    if rmap.active_state == MAIN:
        if band is not None:
            return replace(rmap, active_state=TRANSFER, active_id=band)
        region = rmap.region_of(object_pos)
        if region >= 0 and region != rmap.active_id:
            # jumped regions without touching a band (teleport-like); follow it
            return replace(rmap, active_id=region)
        return rmap
    # TRANSFER state holds while any band contains the object
    if band is not None:
        if band != rmap.active_id:
            return replace(rmap, active_id=band)
        return rmap
    region = rmap.region_of(object_pos)
    if region >= 0:
        return replace(rmap, active_state=MAIN, active_id=region)
    return rmap


def start_in(rmap: RegionMap, object_pos) -> RegionMap:
    """Initialize the active region from the object's starting position."""
    band = rmap.transfer_of(object_pos)
    if band is not None:
        return replace(rmap, active_state=TRANSFER, active_id=band)
    region = max(rmap.region_of(object_pos), 0)
    return replace(rmap, active_state=MAIN, active_id=region)
