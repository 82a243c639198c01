#!/usr/bin/env python3
"""Print the planned push-direction field for each committed maze.

The maze is rasterized in the object's configuration space (walls grown by
the circumradius), value iteration runs on the cells, and the greedy arrows
fall out.  '*' marks goal cells, '#' blocked ones; the glyphs >7^F<LvJ are
the eight compass directions, east counterclockwise.
"""
from swarmpush.manipulation import ManipulationConfig, build_policy
from swarmpush.planner import dump_policy
from swarmpush.scenarios import MAZE_IDS, maze_config

cfg = ManipulationConfig.from_method("vi+pf+or")
for maze in MAZE_IDS:
    world = maze_config(maze)
    pg = build_policy(cfg, world)
    print("%s  (%dx%d cells of %.2f m)" % (maze, pg.grid.nx, pg.grid.ny,
                                           pg.grid.cell_size))
    print(dump_policy(pg))
    print()
