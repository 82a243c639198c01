"""Grid planning for the pushed object: value iteration and a BFS baseline.

The workspace is rasterized into square cells; value iteration solves for a
direction field D(cell) under move rewards (+100 goal, -100 obstacle bump,
-1 otherwise) with optional actuation slip, and BFS provides the
shortest-path baseline the ablations compare against.  Directions use the
same index order as the light discretization: E, NE, N, NW, W, SW, S, SE.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .geometry import Rect
from .world import WorldConfig

FREE, OBSTACLE, GOAL = 0, 1, 2
HOLD = 8  # policy code for goal cells
NO_POLICY = -1

# direction index -> cell offset, in the declared tie-break order
DX = np.array([1, 1, 0, -1, -1, -1, 0, 1])
DY = np.array([0, 1, 1, 1, 0, -1, -1, -1])
GLYPHS = {0: ">", 1: "7", 2: "^", 3: "F", 4: "<", 5: "L", 6: "v", 7: "J",
          HOLD: "*", NO_POLICY: "#"}

ARGMAX_EPS = 1e-9  # float ties resolved toward the earlier direction


class GoalUnreachable(Exception):
    """No free goal cell exists in the rasterized grid."""


@dataclass(frozen=True)
class OccupancyGrid:
    cell_size: float
    nx: int
    ny: int
    cells: np.ndarray  # (ny, nx) uint8, indexed [iy, ix], iy=0 at the bottom
    inflate: float

    def cell_of(self, point) -> Tuple[int, int]:
        ix = int(np.floor(point[0] / self.cell_size))
        iy = int(np.floor(point[1] / self.cell_size))
        return min(max(ix, 0), self.nx - 1), min(max(iy, 0), self.ny - 1)

    def center_of(self, ix: int, iy: int) -> np.ndarray:
        return np.array([(ix + 0.5) * self.cell_size,
                         (iy + 0.5) * self.cell_size])

    def state_at(self, ix: int, iy: int) -> int:
        return int(self.cells[iy, ix])


def rasterize(config: WorldConfig, cell_size: float, inflate: float = 0.0,
              goal_point=None, goal_radius: Optional[float] = None) -> OccupancyGrid:
    """Grid the workspace; cells touching inflated obstacles become OBSTACLE.

    ``inflate`` grows every obstacle and shrinks the workspace by the same
    margin, which is how the object's own footprint enters the planning
    problem.  Goal cells default to the configured object goal disc.
    """
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    nx = max(1, int(np.ceil(config.width / cell_size - 1e-9)))
    ny = max(1, int(np.ceil(config.height / cell_size - 1e-9)))
    cells = np.zeros((ny, nx), dtype=np.uint8)

    inflated = [o.inflated(inflate) for o in config.obstacles]
    for iy in range(ny):
        for ix in range(nx):
            x0 = ix * cell_size
            y0 = iy * cell_size
            x1 = min(x0 + cell_size, config.width)
            y1 = min(y0 + cell_size, config.height)
            # outside the shrunk workspace counts as obstacle
            if (x0 < inflate - 1e-12 or y0 < inflate - 1e-12
                    or x1 > config.width - inflate + 1e-12
                    or y1 > config.height - inflate + 1e-12):
                cells[iy, ix] = OBSTACLE
                continue
            for o in inflated:
                if x0 < o.xmax and o.xmin < x1 and y0 < o.ymax and o.ymin < y1:
                    cells[iy, ix] = OBSTACLE
                    break

    if goal_point is None and config.object is not None:
        goal_point = config.object.goal
        goal_radius = config.object.goal_radius
    grid = OccupancyGrid(cell_size, nx, ny, cells, inflate)
    if goal_point is not None:
        if goal_radius is None:
            goal_radius = cell_size
        marked = 0
        for iy in range(ny):
            for ix in range(nx):
                if cells[iy, ix] != FREE:
                    continue
                c = grid.center_of(ix, iy)
                if np.hypot(c[0] - goal_point[0], c[1] - goal_point[1]) <= goal_radius:
                    cells[iy, ix] = GOAL
                    marked += 1
        if marked == 0:
            raise GoalUnreachable(
                f"no free cell within {goal_radius} of goal {tuple(goal_point)}")
    return grid


@dataclass(frozen=True)
class PolicyGrid:
    grid: OccupancyGrid
    values: np.ndarray   # (ny, nx) float
    policy: np.ndarray   # (ny, nx) int8: 0..7 direction, 8 hold, -1 none
    gamma: float
    slip: float
    deltas: tuple = ()   # per-sweep max value change, for convergence checks

    def direction_at(self, point) -> int:
        ix, iy = self.grid.cell_of(point)
        return int(self.policy[iy, ix])


def _shifted(arr: np.ndarray, d: int, fill) -> np.ndarray:
    """out[iy, ix] = arr[iy + DY[d], ix + DX[d]], fill outside the grid."""
    ny, nx = arr.shape
    out = np.full_like(arr, fill)
    dx, dy = int(DX[d]), int(DY[d])
    ys = slice(max(dy, 0), ny + min(dy, 0))
    xs = slice(max(dx, 0), nx + min(dx, 0))
    yd = slice(max(-dy, 0), ny + min(-dy, 0))
    xd = slice(max(-dx, 0), nx + min(-dx, 0))
    out[yd, xd] = arr[ys, xs]
    return out


def _move_values(grid: OccupancyGrid, values: np.ndarray) -> np.ndarray:
    """(8, ny, nx): reward-plus-value of moving one cell in each direction.

    Blocked moves (obstacle or boundary) stay put and cost -100.
    """
    out = np.empty((8,) + values.shape)
    for d in range(8):
        ncells = _shifted(grid.cells, d, OBSTACLE)
        nvals = _shifted(values, d, 0.0)
        reward = np.where(ncells == GOAL, 100.0, -1.0)
        out[d] = np.where(ncells != OBSTACLE, reward + nvals, -100.0 + values)
    return out


def _action_values(grid: OccupancyGrid, values: np.ndarray,
                   slip: float) -> np.ndarray:
    moves = _move_values(grid, values)
    if slip == 0.0:
        return moves
    ev = np.empty_like(moves)
    for a in range(8):
        ev[a] = ((1.0 - slip) * moves[a]
                 + slip / 2.0 * moves[(a + 1) % 8]
                 + slip / 2.0 * moves[(a - 1) % 8])
    return ev


def value_iteration(grid: OccupancyGrid, gamma: float = 0.97,
                    iters: int = 200, slip: float = 0.1,
                    tol: float = 1e-6) -> PolicyGrid:
    """Synchronous Bellman sweeps over the grid; returns values and the
    greedy direction field.

    Moves blocked by obstacles or the boundary leave the object in place at
    -100 reward; goal cells collect +100 per step starting immediately, which
    pins their value at 100/(1-gamma).  A mover's payoff gamma*(100 + V_goal)
    stays strictly below that, so values increase strictly toward the goal
    and peak there.  Sweeps stop early once the max change drops under
    (1-gamma)*tol.
    """
    if not 0 < gamma < 1:
        raise ValueError("gamma must be in (0, 1)")
    if not 0 <= slip < 1:
        raise ValueError("slip must be in [0, 1)")
    if not (grid.cells == GOAL).any():
        raise GoalUnreachable("grid has no goal cell")

    goal_value = 100.0 / (1.0 - gamma)
    values = np.zeros(grid.cells.shape)
    values[grid.cells == GOAL] = goal_value
    free = grid.cells == FREE

    deltas = []
    for _ in range(iters):
        best = gamma * _action_values(grid, values, slip).max(axis=0)
        new = np.where(free, best, values)
        deltas.append(float(np.abs(new - values).max()))
        values = new
        if deltas[-1] < (1.0 - gamma) * tol:
            break

    policy = _greedy_policy(grid, values, slip)
    values = values.copy()
    values[grid.cells == OBSTACLE] = -np.inf
    return PolicyGrid(grid, values, policy, gamma, slip, tuple(deltas))


def _greedy_policy(grid: OccupancyGrid, values: np.ndarray,
                   slip: float) -> np.ndarray:
    ev = _action_values(grid, values, slip)
    best = ev.max(axis=0)
    # first direction within eps of the max wins, per declared order
    first = np.argmax(ev > best - ARGMAX_EPS, axis=0)
    policy = np.where(grid.cells == FREE, first, NO_POLICY).astype(np.int8)
    policy[grid.cells == GOAL] = HOLD
    return policy


def bfs_policy(grid: OccupancyGrid) -> PolicyGrid:
    """8-connected breadth-first flood from the goal cells.

    Values are negative hop counts; each free cell's direction is its first
    step along a shortest path, ties resolved in the declared order.
    """
    from collections import deque

    if not (grid.cells == GOAL).any():
        raise GoalUnreachable("grid has no goal cell")
    ny, nx = grid.cells.shape
    dist = np.full((ny, nx), -1, dtype=np.int64)
    queue = deque()
    for iy in range(ny):
        for ix in range(nx):
            if grid.cells[iy, ix] == GOAL:
                dist[iy, ix] = 0
                queue.append((ix, iy))
    while queue:
        ix, iy = queue.popleft()
        for d in range(8):
            jx, jy = ix + DX[d], iy + DY[d]
            if (0 <= jx < nx and 0 <= jy < ny and dist[jy, jx] < 0
                    and grid.cells[jy, jx] == FREE):
                dist[jy, jx] = dist[iy, ix] + 1
                queue.append((jx, jy))

    policy = np.full((ny, nx), NO_POLICY, dtype=np.int8)
    policy[grid.cells == GOAL] = HOLD
    values = np.where(dist >= 0, -dist.astype(float), -np.inf)
    values[grid.cells == OBSTACLE] = -np.inf
    for iy in range(ny):
        for ix in range(nx):
            if grid.cells[iy, ix] != FREE or dist[iy, ix] < 0:
                continue
            for d in range(8):  # declared order: first neighbor closer wins
                jx, jy = ix + DX[d], iy + DY[d]
                if (0 <= jx < nx and 0 <= jy < ny and dist[jy, jx] >= 0
                        and dist[jy, jx] == dist[iy, ix] - 1):
                    policy[iy, ix] = d
                    break
    return PolicyGrid(grid, values, policy, gamma=1.0, slip=0.0)


def dump_policy(pg: PolicyGrid, with_values: bool = False) -> str:
    """Human-readable direction field, top row first; '#' obstacle, '*' goal."""
    lines = []
    for iy in range(pg.grid.ny - 1, -1, -1):
        row = "".join(GLYPHS[int(pg.policy[iy, ix])] for ix in range(pg.grid.nx))
        lines.append(row)
    if with_values:
        lines.append("")
        for iy in range(pg.grid.ny - 1, -1, -1):
            vals = []
            for ix in range(pg.grid.nx):
                v = pg.values[iy, ix]
                vals.append("   -inf" if np.isinf(v) else f"{v:7.1f}")
            lines.append(" ".join(vals))
    return "\n".join(lines)
