"""Maze fixtures, scenario files, and the override knobs."""
import dataclasses
import json

import numpy as np
import pytest

import swarmpush as sp
from swarmpush.manipulation import ManipulationConfig, build_policy
from swarmpush.planner import NO_POLICY
from swarmpush.scenarios import (MAZE_IDS, NOISE_UNIT, default_spawn_region,
                                 load_scenario, make_scenario, maze_config,
                                 save_scenario, scenario_digest)


@pytest.mark.parametrize("maze_id", MAZE_IDS)
def test_fixture_loads_with_desk_dimensions(maze_id):
    w = maze_config(maze_id)
    assert (w.width, w.height) == (2.4, 1.8)
    assert w.particle_count == 100
    assert w.object is not None
    assert w.object.shape == "hexagon"


def test_story_maze_geometry():
    w = maze_config("fig-story-maze")
    assert len(w.obstacles) == 2
    first, second = sorted(w.obstacles, key=lambda o: o.xmin)
    # one wall opens at the top, the next at the bottom
    assert first.ymin == 0.0 and first.ymax < w.height
    assert second.ymax == w.height and second.ymin > 0.0
    assert w.object.start[0] < first.xmin
    assert w.object.goal[0] > second.xmax


@pytest.mark.parametrize("maze_id", MAZE_IDS)
def test_fixture_start_and_goal_are_plannable(maze_id):
    # the planner must see a route from the authored start to the goal
    w = maze_config(maze_id)
    cfg = ManipulationConfig.from_method("vi+pf+or")
    policy = build_policy(cfg, w)
    ix, iy = policy.grid.cell_of(w.object.start)
    assert int(policy.policy[iy, ix]) != NO_POLICY


@pytest.mark.parametrize("maze_id", MAZE_IDS)
def test_fixture_spawn_region_is_feasible(maze_id):
    w = maze_config(maze_id)
    region = default_spawn_region(w)
    assert 0 <= region.xmin < region.xmax <= w.width
    assert 0 <= region.ymin < region.ymax <= w.height
    state = sp.spawn(w, region=region, rng=np.random.default_rng(0))
    assert state.positions.shape == (w.particle_count, 2)


def test_make_scenario_overrides():
    sc = make_scenario("open-box", robots=37, noise_w=5.0, weight=2.0,
                       shape="square", method="vi+pf", seed=11)
    assert sc.config.particle_count == 37
    assert sc.config.noise_magnitude == pytest.approx(5.0 * NOISE_UNIT)
    assert sc.config.object.weight == 2.0
    assert sc.config.object.shape == "square"
    assert (sc.method, sc.seed) == ("vi+pf", 11)


def test_scenario_digest_tracks_content():
    a = make_scenario("open-box")
    b = make_scenario("open-box", robots=99)
    assert a.digest == make_scenario("open-box").digest
    assert a.digest != b.digest
    digests = {make_scenario(m).digest for m in MAZE_IDS}
    assert len(digests) == len(MAZE_IDS)


def test_scenario_file_roundtrip(tmp_path):
    sc = make_scenario("s-maze", robots=64, seed=5)
    path = tmp_path / "custom.json"
    save_scenario(sc.config, str(path))
    back = load_scenario(str(path))
    assert back == sc.config
    assert scenario_digest(back) == sc.digest


def test_scenario_file_rejects_unknown_fields(tmp_path):
    sc = make_scenario("open-box")
    path = tmp_path / "bad.json"
    save_scenario(sc.config, str(path))
    doc = json.loads(path.read_text())
    doc["gravity"] = 9.81
    path.write_text(json.dumps(doc))
    with pytest.raises((ValueError, TypeError)):
        load_scenario(str(path))


def test_unknown_maze_id_rejected():
    with pytest.raises((KeyError, ValueError, FileNotFoundError)):
        maze_config("perfectly-flat-maze")
