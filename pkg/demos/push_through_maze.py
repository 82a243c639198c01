#!/usr/bin/env python3
"""Push the hexagon through the two-wall slalom, narrated phase by phase.

Usage: push_through_maze.py [maze-id] [seed]

Plans a cell policy for the object, herds the hundred-particle crowd
behind it, and pushes.  Every phase change of the mode machine is printed
as it happens; at the end the object's route is drawn over the maze.
"""
import sys

import numpy as np

from swarmpush.manipulation import (ManipulationConfig, DONE, initial_status,
                                    build_policy, manipulation_step)
from swarmpush.regions import build_regions
from swarmpush.scenarios import make_scenario
from swarmpush.world import spawn, step

maze = sys.argv[1] if len(sys.argv) > 1 else "fig-story-maze"
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 9

sc = make_scenario(maze, seed=seed)
world = sc.config
cfg = ManipulationConfig.from_method(sc.method)
policy = build_policy(cfg, world)
regions = build_regions(world)

rng = np.random.default_rng(seed)
state = spawn(world, region=sc.spawn_box(), rng=rng)
status = initial_status(world, regions)

print("%s, %d robots, method %s, seed %d" % (maze, world.particle_count,
                                             sc.method, seed))
track = [tuple(state.object_pose[:2])]
phase = status.phase
while state.time < 600.0:
    control, status = manipulation_step(cfg, world, state, status,
                                        policy, regions)
    if status.phase != phase:
        x, y = state.object_pose[:2]
        print("  %6.1f s  %-18s -> %-18s object (%.2f, %.2f)"
              % (state.time, phase, status.phase, x, y))
        phase = status.phase
    if status.phase == DONE:
        break
    state = step(world, state, control, rng)
    if int(state.time * 60) % 30 == 0:
        track.append(tuple(state.object_pose[:2]))

goal = world.object.goal
if status.phase == DONE:
    print("delivered in %.1f s" % state.time)
else:
    print("timed out %.2f m from the goal"
          % np.hypot(state.object_pose[0] - goal[0],
                     state.object_pose[1] - goal[1]))

# route overlay: one char cell is 5 x 10 cm, roughly square on a terminal
cols, rows = 48, 18
canvas = [[" "] * cols for _ in range(rows)]
def put(x, y, ch):
    c = min(cols - 1, max(0, int(x / world.width * cols)))
    r = min(rows - 1, max(0, int(y / world.height * rows)))
    canvas[rows - 1 - r][c] = ch
for o in world.obstacles:
    for cx in np.arange(o.xmin, o.xmax, 0.025):
        for cy in np.arange(o.ymin, o.ymax, 0.05):
            put(cx, cy, "#")
for x, y in track:
    put(x, y, ".")
put(*world.object.start, "S")
put(*goal, "G")
put(state.object_pose[0], state.object_pose[1], "O")
print("+" + "-" * cols + "+")
for row in canvas:
    print("|" + "".join(row) + "|")
print("+" + "-" * cols + "+")
