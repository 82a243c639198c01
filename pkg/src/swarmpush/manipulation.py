"""Closed-loop object delivery: plan a cell policy, herd the swarm behind
the object, push, and recover from spread-out or stuck situations.

The per-step controller is a small mode machine:

  TRACKING            follow the planned push direction for the object's cell
  VARIANCE_REDUCTION  swarm too spread out -> squeeze it into a wall corner
  ESCAPING            mean stopped moving  -> back off to the previous corner
  DONE                object inside the goal region (absorbing)
"""
from __future__ import annotations

import dataclasses
import time as _time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .control import Gains, mean_pd
from .geometry import segment_intersects_rect
from .planner import (DX, DY, HOLD, NO_POLICY, OBSTACLE, PolicyGrid,
                      bfs_policy, rasterize, value_iteration)
from .potential import (PotentialParams, attract_point, potential_force,
                        repulsive_force)
from .records import TrialRecord, config_digest, state_digest
from .regions import (MAIN, RegionMap, build_regions, region_filter_update,
                      start_in)
from .scenarios import default_spawn_region
from .stats import hysteresis_thresholds, summarize
from .world import ControlInput, SwarmState, WorldConfig, spawn, step

TRACKING = "TRACKING"
VARIANCE_REDUCTION = "VARIANCE_REDUCTION"
ESCAPING = "ESCAPING"
DONE = "DONE"

# ablation variants, in the order results tables report them
METHODS = ("vi", "vi+pf", "vi+or", "bfs+pf+or", "vi+pf+or")

# paper-scale potential params rescaled to this workspace: the repulsion
# radius must cover "crowd parked on the wrong side of the object", which
# puts the mean up to half a meter from the COM here
DESK_POTENTIAL = PotentialParams(zeta=2.0, eta=2.0, rho0=0.9, theta=np.pi / 2)


class PolicyMiss(Exception):
    """Object sits on an obstacle cell: the rasterization or inflation is
    inconsistent with the physics."""


@dataclass(frozen=True)
class ManipulationConfig:
    use_value_iteration: bool = True
    use_bfs: bool = False
    use_potential_field: bool = True
    use_outlier_rejection: bool = True
    potential: PotentialParams = DESK_POTENTIAL
    gains: Gains = Gains(kp=4.0, kd=1.0)
    # spread thresholds are variances, so the published numbers come down
    # by the square of the workspace scale factor; at these values the
    # gather phase fires as soon as the crowd wraps or disperses, which is
    # what keeps the push collimated
    var_min: Optional[float] = 0.021
    var_max: Optional[float] = 0.060
    stall_timeout: float = 5.0
    attract_standoff: Optional[float] = None  # default: 0.4 * circumradius
    cell_size: float = 0.05
    inflate: Optional[float] = None     # default: object circumradius
    vi_gamma: float = 0.97
    vi_slip: float = 0.1
    vi_iters: int = 200

    def __post_init__(self):
        if self.use_value_iteration == self.use_bfs:
            raise ValueError("exactly one of VI/BFS must be selected")
        if self.stall_timeout <= 0:
            raise ValueError("stall_timeout must be positive")

    @classmethod
    def from_method(cls, method: str, **overrides) -> "ManipulationConfig":
        parts = set(method.lower().split("+"))
        planners = parts & {"vi", "bfs"}
        if len(planners) != 1 or parts - {"vi", "bfs", "pf", "or"}:
            raise ValueError(f"unrecognized method string {method!r}")
        return cls(use_value_iteration="vi" in parts,
                   use_bfs="bfs" in parts,
                   use_potential_field="pf" in parts,
                   use_outlier_rejection="or" in parts,
                   **overrides)

    @property
    def method(self) -> str:
        tags = ["vi" if self.use_value_iteration else "bfs"]
        if self.use_potential_field:
            tags.append("pf")
        if self.use_outlier_rejection:
            tags.append("or")
        return "+".join(tags)


@dataclass(frozen=True)
class ManipulationStatus:
    phase: str = TRACKING
    last_mean: Optional[tuple] = None   # stall anchors
    last_com: Optional[tuple] = None
    stall_clock: float = 0.0
    corner: Optional[tuple] = None      # current corner target
    prev_corner: Optional[tuple] = None
    region_state: str = MAIN
    region_id: int = 0
    vr_cooldown: float = 0.0            # holds off re-gathering after a bail


def initial_status(world: WorldConfig,
                   regions: Optional[RegionMap]) -> ManipulationStatus:
    status = ManipulationStatus()
    if regions is not None and world.object is not None:
        seeded = start_in(regions, world.object.start)
        status = dataclasses.replace(status,
                                     region_state=seeded.active_state,
                                     region_id=seeded.active_id)
    return status


def build_policy(cfg: ManipulationConfig, world: WorldConfig) -> PolicyGrid:
    inflate = cfg.inflate
    if inflate is None:
        # plan in configuration space: grow walls by the object's radius
        # plus a particle diameter so the policy keeps real clearance
        # instead of scraping the object along obstacles
        shape = world.shape()
        inflate = 0.0 if shape is None else \
            shape.circumradius + 2 * world.particle_radius
    grid = rasterize(world, cfg.cell_size, inflate=inflate)
    if cfg.use_value_iteration:
        return value_iteration(grid, gamma=cfg.vi_gamma, iters=cfg.vi_iters,
                               slip=cfg.vi_slip)
    return bfs_policy(grid)


def select_corner(config: WorldConfig, object_com, goal, summary) -> tuple:
    """Wall corner to gather the swarm at.

    Prefers corners farther from the goal than the object (so gathering does
    not shove the object backward past the goal) that the object can see
    along a straight obstacle-free segment; among those, the one nearest the
    swarm mean.  Degenerate layouts drop the distance condition, then the
    visibility condition.
    """
    corners = [(0.0, 0.0), (config.width, 0.0),
               (0.0, config.height), (config.width, config.height)]
    for o in config.obstacles:
        corners.extend(o.corners())
    com = np.asarray(object_com, dtype=float)
    goal = np.asarray(goal, dtype=float)
    mean = np.asarray(summary.mean, dtype=float)

    def visible(c):
        return not any(segment_intersects_rect(c, com, o)
                       for o in config.obstacles)

    d_obj = float(np.hypot(*(com - goal)))
    visible_corners = [c for c in corners if visible(c)]
    preferred = [c for c in visible_corners
                 if np.hypot(c[0] - goal[0], c[1] - goal[1]) > d_obj]
    pool = preferred or visible_corners or corners
    best = min(pool, key=lambda c: np.hypot(c[0] - mean[0], c[1] - mean[1]))
    return (float(best[0]), float(best[1]))


def _direction_of(world: WorldConfig, policy: PolicyGrid, com,
                  goal) -> np.ndarray:
    x, y = float(com[0]), float(com[1])
    if any(o.xmin < x < o.xmax and o.ymin < y < o.ymax
           for o in world.obstacles) or not (0 <= x <= world.width
                                             and 0 <= y <= world.height):
        # physically impossible unless the rasterization lied to the planner
        raise PolicyMiss(f"object COM inside an obstacle at ({x:.3f}, {y:.3f})")
    ix, iy = policy.grid.cell_of(com)
    if policy.grid.state_at(ix, iy) == OBSTACLE:
        # COM drifted into the clearance margin around a wall: climb the
        # value field.  The best-valued neighbor is the route-aligned way
        # out of the margin; pressing straight away from the wall stalls,
        # and borrowing a faraway cell's direction can point anywhere.
        best, bd = -np.inf, None
        for d in range(8):
            jx, jy = ix + DX[d], iy + DY[d]
            if 0 <= jx < policy.grid.nx and 0 <= jy < policy.grid.ny:
                v = float(policy.values[jy, jx])
                if np.isfinite(v) and v > best:
                    best, bd = v, d
        if bd is not None:
            v = np.array([DX[bd], DY[bd]], dtype=float)
            return v / float(np.hypot(*v))
        # margin deeper than one cell: fall back to the nearest planned cell
        free = _nearest_free_cell(policy, ix, iy)
        if free is None:
            raise PolicyMiss(f"no planned cell near ({ix}, {iy})")
        ix, iy = free
    d = int(policy.policy[iy, ix])
    if d in (HOLD, NO_POLICY):
        # inside the goal cell (or an unplanned pocket): head straight there
        v = np.asarray(goal, dtype=float) - np.array([x, y])
        norm = float(np.hypot(*v))
        if norm < 1e-12:
            return np.array([1.0, 0.0])
        return v / norm
    v = np.array([DX[d], DY[d]], dtype=float)
    return v / float(np.hypot(*v))


def _herd_direction(world: WorldConfig, policy: PolicyGrid, mean):
    """Route direction at the swarm mean, or None when there isn't one.

    The mean of a split swarm can sit anywhere, including inside a wall;
    this never raises, it just gives up and lets the caller fall back to
    a straight pull.
    """
    ix, iy = policy.grid.cell_of(mean)
    if policy.grid.state_at(ix, iy) == OBSTACLE:
        best, bd = -np.inf, None
        for d in range(8):
            jx, jy = ix + DX[d], iy + DY[d]
            if 0 <= jx < policy.grid.nx and 0 <= jy < policy.grid.ny:
                v = float(policy.values[jy, jx])
                if np.isfinite(v) and v > best:
                    best, bd = v, d
        if bd is None:
            return None
        v = np.array([DX[bd], DY[bd]], dtype=float)
        return v / float(np.hypot(*v))
    d = int(policy.policy[iy, ix])
    if d in (HOLD, NO_POLICY):
        return None
    v = np.array([DX[d], DY[d]], dtype=float)
    return v / float(np.hypot(*v))


def _point_to_segment(p, a, b) -> float:
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom < 1e-18 else float(np.clip((p - a) @ ab / denom, 0., 1.))
    return float(np.hypot(*(a + t * ab - p)))


def _staging_point(world: WorldConfig, policy: PolicyGrid, com, goal,
                   mean=None) -> tuple:
    """Gather target behind the object along its planned route.

    Re-forming the swarm here lines the next press up with the route;
    gathering at a wall corner (as the variance phase does) routinely
    strands the crowd on the wrong side of the object in tight mazes.

    Three things disqualify a candidate: it falls outside planned free
    space (a gather on a wall margin is a gather against a wall), the
    swarm's straight path to it passes through the object (the arriving
    pack would plow the object backward), or it sits ahead of the object
    (the press that follows must come from behind, where the pull is not
    gated off).  When the route points straight off a wall the spot
    directly behind is inside that wall, so the flanks, biased slightly
    to the rear, serve instead: a flank-level pack still reads as behind
    and its press slides the object along the wall face.
    """
    d = _direction_of(world, policy, com, goal)
    shape = world.shape()
    circ = shape.circumradius if shape is not None else \
        0.03 * float(np.hypot(world.width, world.height))
    back = 3.0 * circ
    keep = circ + 2.0 * world.particle_radius
    t = np.array([-d[1], d[0]])
    # flank points carry a rear bias bigger than the gather's arrival
    # tolerance, otherwise the pack settles level with the object and the
    # follow-up press is gated off; the shallow pair is a fallback for
    # wedges with almost no room behind
    candidates = [
        np.asarray(com) - back * d,
        np.asarray(com) + back * t - 2.0 * circ * d,
        np.asarray(com) - back * t - 2.0 * circ * d,
        np.asarray(com) + back * t - 0.5 * circ * d,
        np.asarray(com) - back * t - 0.5 * circ * d,
    ]

    def usable(p):
        if not (0.02 <= p[0] <= world.width - 0.02
                and 0.02 <= p[1] <= world.height - 0.02):
            return False
        if float((p - com) @ d) > 1e-9:
            return False
        if any(o.contains(p[0], p[1]) for o in world.obstacles):
            return False
        ix, iy = policy.grid.cell_of(p)
        if policy.grid.state_at(ix, iy) == OBSTACLE:
            return False
        if mean is not None and _point_to_segment(com, mean, p) < keep:
            return False
        return True

    for p in candidates:
        if usable(p):
            return (float(p[0]), float(p[1]))
    # an object wedged in a workspace corner puts every ideal rear point
    # outside the walls; clamp them back in and keep only the physical
    # checks (bounds, solid walls, plow path) -- particles may pack inside
    # the object's clearance margin even though the object cannot
    for p in candidates:
        q = np.array([min(max(float(p[0]), 0.02), world.width - 0.02),
                      min(max(float(p[1]), 0.02), world.height - 0.02)])
        if any(o.contains(q[0], q[1]) for o in world.obstacles):
            continue
        if mean is not None and _point_to_segment(com, mean, q) < keep:
            continue
        return (float(q[0]), float(q[1]))
    for _ in range(6):
        px = min(max(float(com[0] - back * d[0]), 0.02), world.width - 0.02)
        py = min(max(float(com[1] - back * d[1]), 0.02), world.height - 0.02)
        if not any(o.contains(px, py) for o in world.obstacles):
            return (px, py)
        back *= 0.6
    return (float(com[0]), float(com[1]))


def _nearest_free_cell(policy: PolicyGrid, ix: int, iy: int, radius: int = 8):
    grid = policy.grid
    for ring in range(1, radius + 1):
        best = None
        for dy in range(-ring, ring + 1):
            for dx in range(-ring, ring + 1):
                if max(abs(dx), abs(dy)) != ring:
                    continue
                jx, jy = ix + dx, iy + dy
                if 0 <= jx < grid.nx and 0 <= jy < grid.ny \
                        and grid.cells[jy, jx] != OBSTACLE:
                    d2 = dx * dx + dy * dy
                    if best is None or d2 < best[0]:
                        best = (d2, jx, jy)
        if best is not None:
            return best[1], best[2]
    return None


def manipulation_step(cfg: ManipulationConfig, world: WorldConfig,
                      state: SwarmState, status: ManipulationStatus,
                      policy: PolicyGrid,
                      regions: Optional[RegionMap]
                      ) -> Tuple[ControlInput, ManipulationStatus]:
    obj = world.object
    com = state.object_pose[:2]
    goal = np.asarray(obj.goal, dtype=float)
    if status.phase == DONE or np.hypot(*(com - goal)) <= obj.goal_radius:
        return ControlInput(0.0, 0.0), dataclasses.replace(status, phase=DONE)

    # outlier rejection: advance the region machine, mask strays out
    region_state, region_id = status.region_state, status.region_id
    mask = None
    scattered = False
    if cfg.use_outlier_rejection and regions is not None:
        live = dataclasses.replace(regions, active_state=region_state,
                                   active_id=region_id)
        live = region_filter_update(live, com)
        region_state, region_id = live.active_state, live.active_id
        m = live.particle_mask(state.positions)
        # a handful of strays is not a population: below this the filtered
        # mean whipsaws and the phase machine chatters, so use everyone
        if m.sum() >= 5:
            mask = m
        else:
            # the swarm has left the object's region almost entirely;
            # tracking against the global mean from here wanders the far
            # side of the maze, so herd everyone back behind the object
            scattered = True
    summary = summarize(state.positions, state.velocities, mask=mask)

    var_min, var_max = cfg.var_min, cfg.var_max
    if var_min is None or var_max is None:
        lo, hi = hysteresis_thresholds(world.particle_count,
                                       world.particle_radius, world.width)
        var_min = lo if var_min is None else var_min
        var_max = hi if var_max is None else var_max

    phase = status.phase
    corner, prev_corner = status.corner, status.prev_corner
    last_mean, clock = status.last_mean, status.stall_clock
    last_com = status.last_com
    mean = summary.mean
    diag = float(np.hypot(world.width, world.height))
    moved_floor = 0.01 * diag

    spread = float(np.max(summary.variance))
    cooldown = max(0.0, status.vr_cooldown - world.timestep)
    if phase == VARIANCE_REDUCTION:
        clock += world.timestep
        if spread < var_min:
            phase = TRACKING
            last_mean, last_com, clock = tuple(mean), tuple(com), 0.0
            # guarantee a full stall window of tracking before the next
            # gather, otherwise gather/track chatter starves the stall
            # detector and the escape move can never fire
            cooldown = cfg.stall_timeout
        elif clock >= 4.0 * cfg.stall_timeout:
            # obstacles can pin stragglers so the spread never reaches the
            # exit threshold: give up on this gather, push on, and hold off
            # re-gathering long enough to make some progress first
            phase = TRACKING
            last_mean, last_com, clock = tuple(mean), tuple(com), 0.0
            cooldown = 2.0 * cfg.stall_timeout
    elif phase == TRACKING and spread > var_max and cooldown <= 0.0:
        # tracking yields to a gather; an escape in progress does not,
        # or its maneuver would be cancelled one step after it starts
        phase = VARIANCE_REDUCTION
        corner = select_corner(world, com, goal, summary)
        if not world.obstacles:
            # without interior walls every gather corner is a workspace
            # corner half the room away, and a crowd sweeping across the
            # object plows it right back; in that one setting prefer a
            # regather point behind the object on its route
            shape = world.shape()
            keep = (shape.circumradius if shape is not None else 0.0) \
                + 2.0 * world.particle_radius
            if _point_to_segment(com, mean, np.asarray(corner)) < keep:
                corner = _staging_point(world, policy, com, goal, mean=mean)
        prev_corner = corner
        clock = 0.0

    if phase == TRACKING:
        # stall watch: compare against where things were one whole timeout
        # window ago, not against a fresh anchor every step.  The swarm mean
        # going quiet means the pull has nothing left to give; the object
        # going quiet with the swarm right next to it means the crowd is
        # churning in place without pressing anywhere useful.
        if last_mean is None:
            last_mean, last_com, clock = tuple(mean), tuple(com), 0.0
        else:
            clock += world.timestep
            if clock >= cfg.stall_timeout:
                mean_stuck = np.hypot(*(mean - last_mean)) < moved_floor
                com_stuck = (last_com is not None
                             and np.hypot(*(com - last_com)) < moved_floor
                             and np.hypot(*(mean - com)) <= cfg.potential.rho0)
                if mean_stuck or com_stuck:
                    phase = ESCAPING
                    corner = _staging_point(world, policy, com, goal,
                                            mean=mean)
                    prev_corner = corner
                last_mean, last_com, clock = tuple(mean), tuple(com), 0.0
    elif phase == ESCAPING:
        clock += world.timestep
        arrived = corner is not None and \
            np.hypot(mean[0] - corner[0], mean[1] - corner[1]) < 3.0 * moved_floor
        # generous cap: a gather point across the maze takes several stall
        # windows to reach at PD-limited speed, and cutting the trip short
        # strands the pack mid-route in front of the object
        if arrived or clock >= 5.0 * cfg.stall_timeout:
            phase = TRACKING
            last_mean, last_com, clock = tuple(mean), tuple(com), 0.0
            cooldown = cfg.stall_timeout

    if scattered:
        # the swarm has strayed out of the object's region wholesale; no
        # phase can do useful work on a population that is not there, so
        # march everyone back along the planned route toward a gather
        # point behind the object, then resume wherever the machine is
        rally = _staging_point(world, policy, com, goal, mean=mean)
        herd = None
        if any(segment_intersects_rect(mean, rally, o)
               for o in world.obstacles):
            herd = _herd_direction(world, policy, mean)
        if herd is not None:
            gain = cfg.gains.kp * min(
                float(np.hypot(mean[0] - rally[0], mean[1] - rally[1])), 1.0)
            control = ControlInput(gain * herd[0],
                                   gain * herd[1]).clamped(world.max_force)
        else:
            control = mean_pd(summary, rally, cfg.gains,
                              max_force=world.max_force)
    elif phase in (VARIANCE_REDUCTION, ESCAPING):
        control = mean_pd(summary, corner, cfg.gains,
                          max_force=world.max_force)
    else:
        direction = _direction_of(world, policy, com, goal)
        standoff = cfg.attract_standoff
        if standoff is None:
            # the pull target sits inside the object's rear face: the swarm
            # can never park on it, so the chase keeps pressing particles
            # into the object instead of idling at a reachable carrot
            standoff = 0.4 * world.shape().circumradius
        target = attract_point(com, direction, standoff)
        if cfg.use_potential_field:
            # while the swarm mean blocks the route ahead, repulsion
            # replaces attraction outright: the combined pull can point
            # against the planned direction, the repulsion never does
            delta = mean - com
            rho = float(np.hypot(*delta))
            gated = False
            if 1e-12 < rho <= cfg.potential.rho0:
                phi = float(np.arccos(np.clip(
                    np.dot(direction, delta) / rho, -1.0, 1.0)))
                gated = phi < cfg.potential.theta
            if gated:
                raw = repulsive_force(mean, com, direction, cfg.potential)
            else:
                raw = potential_force(summary, com, direction, target,
                                      cfg.potential,
                                      max_force=world.max_force)
                raw = np.array([raw.fx, raw.fy])
            # brake the crowd's drift: a pull of constant magnitude keeps
            # accelerating the pack across open ground, and the arriving
            # avalanche rams the object into walls at every route turn.
            # A press against the object has near-zero drift, so this
            # costs pushing force almost nothing.
            raw = raw - cfg.gains.kd * summary.mean_vel
            control = ControlInput(raw[0], raw[1]).clamped(world.max_force)
        else:
            control = mean_pd(summary, target, cfg.gains,
                              max_force=world.max_force)

    new_status = ManipulationStatus(phase=phase, last_mean=last_mean,
                                    last_com=last_com, stall_clock=clock,
                                    corner=corner, prev_corner=prev_corner,
                                    region_state=region_state,
                                    region_id=region_id,
                                    vr_cooldown=cooldown)
    return control, new_status


def run_to_completion(cfg: ManipulationConfig, world: WorldConfig, seed: int,
                      max_time: float, spawn_region=None,
                      policy: Optional[PolicyGrid] = None,
                      regions: Optional[RegionMap] = None) -> TrialRecord:
    """One full autonomous trial; timeouts become failure records."""
    if world.object is None:
        raise ValueError("manipulation needs an object in the world config")
    t0 = _time.perf_counter()
    if policy is None:
        policy = build_policy(cfg, world)
    if regions is None and cfg.use_outlier_rejection:
        regions = build_regions(world)
    if spawn_region is None:
        spawn_region = default_spawn_region(world)

    rng = np.random.default_rng(seed)
    state = spawn(world, region=spawn_region, rng=rng)
    status = initial_status(world, regions)
    log = []
    success = False
    while True:
        control, status = manipulation_step(cfg, world, state, status,
                                            policy, regions)
        if status.phase == DONE:
            success = True
            break
        if state.time >= max_time - 1e-9:
            break
        log.append([control.fx, control.fy])
        state = step(world, state, control, rng)

    summary = summarize(state.positions, state.velocities)
    return TrialRecord(
        scenario_digest=config_digest(world),
        config=world.to_dict(),
        method=cfg.method,
        seed=int(seed),
        success=success,
        completion_time_s=float(state.time) if success else float(max_time),
        wall_time_s=_time.perf_counter() - t0,
        steps=len(log),
        final_summary={
            "mean": [float(summary.mean[0]), float(summary.mean[1])],
            "variance": [float(summary.variance[0]),
                         float(summary.variance[1])],
            "count_used": int(summary.count_used),
        },
        final_digest=state_digest(state),
        input_log=log,
        spawn_region=[spawn_region.xmin, spawn_region.ymin,
                      spawn_region.xmax, spawn_region.ymax],
    )
