"""Region decomposition against hand-worked fixtures."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmpush.geometry import Rect
from swarmpush.regions import (MAIN, TRANSFER, build_regions,
                               region_filter_update, start_in)
from swarmpush.stats import summarize
from swarmpush.world import ObjectSpec, WorldConfig


def test_empty_workspace_is_one_region():
    config = WorldConfig(width=2.0, height=1.0)
    rmap = build_regions(config, buffer=0.1)
    assert len(rmap.main_regions) == 1
    assert len(rmap.transfer_regions) == 0
    assert rmap.region_of((0.3, 0.7)) == 0
    assert rmap.region_of((1.9, 0.1)) == 0
    mask = rmap.particle_mask(np.array([[0.5, 0.5], [1.5, 0.9]]))
    assert mask.all()


@pytest.fixture
def half_wall():
    # horizontal wall from the left boundary to mid-width; its extension
    # continues the centerline y=0.5 rightward to the far boundary
    config = WorldConfig(width=2.0, height=1.0,
                         obstacles=(Rect(0.0, 0.45, 1.0, 0.55),))
    return config, build_regions(config, buffer=0.1)


def test_half_wall_splits_into_two(half_wall):
    _, rmap = half_wall
    assert len(rmap.main_regions) == 2
    assert len(rmap.transfer_regions) == 1
    band = rmap.transfer_regions[0]
    assert (band.xmin, band.ymin, band.xmax, band.ymax) == (1.0, 0.4, 2.0, 0.6)


def test_half_wall_membership(half_wall):
    _, rmap = half_wall
    # ids ordered by lowest slab corner: below-wall region first
    assert rmap.region_of((0.5, 0.2)) == 0
    assert rmap.region_of((1.5, 0.2)) == 0
    assert rmap.region_of((1.5, 0.45)) == 0   # right of the wall, below the cut
    assert rmap.region_of((0.5, 0.8)) == 1
    assert rmap.region_of((1.5, 0.8)) == 1
    assert rmap.region_of((0.5, 0.5)) == -1   # inside the wall
    assert rmap.transfer_of((1.5, 0.55)) == 0
    assert rmap.transfer_of((0.5, 0.55)) is None  # left side has no band


def test_half_wall_state_machine(half_wall):
    _, rmap = half_wall
    rmap = start_in(rmap, (0.5, 0.2))
    assert (rmap.active_state, rmap.active_id) == (MAIN, 0)
    rmap = region_filter_update(rmap, (1.5, 0.3))
    assert (rmap.active_state, rmap.active_id) == (MAIN, 0)
    rmap = region_filter_update(rmap, (1.5, 0.45))
    assert (rmap.active_state, rmap.active_id) == (TRANSFER, 0)
    rmap = region_filter_update(rmap, (1.5, 0.58))
    assert rmap.active_state == TRANSFER
    rmap = region_filter_update(rmap, (1.5, 0.7))
    assert (rmap.active_state, rmap.active_id) == (MAIN, 1)
    # and back down through the band
    rmap = region_filter_update(rmap, (1.5, 0.52))
    assert rmap.active_state == TRANSFER
    rmap = region_filter_update(rmap, (1.5, 0.1))
    assert (rmap.active_state, rmap.active_id) == (MAIN, 0)


def test_half_wall_masks(half_wall):
    _, rmap = half_wall
    rmap = start_in(rmap, (0.5, 0.2))
    pts = np.array([[0.5, 0.2], [1.5, 0.45], [0.5, 0.8], [1.5, 0.55]])
    np.testing.assert_array_equal(rmap.particle_mask(pts),
                                  [True, True, False, False])
    rmap = region_filter_update(rmap, (1.5, 0.5))
    assert rmap.active_state == TRANSFER
    # a transfer trusts the band plus both regions it joins ...
    np.testing.assert_array_equal(rmap.particle_mask(pts),
                                  [True, True, True, True])
    # ... but never the inside of an obstacle
    assert not rmap.particle_mask(np.array([[0.5, 0.5]]))[0]


def test_story_maze_three_regions():
    config = WorldConfig(obstacles=(Rect(0.75, 0.0, 0.85, 1.1),
                                    Rect(1.55, 0.7, 1.65, 1.8)))
    rmap = build_regions(config, buffer=0.1)
    assert len(rmap.main_regions) == 3
    assert len(rmap.transfer_regions) == 2
    # left / middle / right, in id order
    assert rmap.region_of((0.3, 0.5)) == 0
    assert rmap.region_of((0.3, 1.5)) == 0
    assert rmap.region_of((0.77, 1.5)) == 0   # above wall 1, left of its cut
    assert rmap.region_of((1.2, 0.5)) == 1
    assert rmap.region_of((1.2, 1.5)) == 1
    assert rmap.region_of((1.57, 0.3)) == 1   # below wall 2, left of its cut
    assert rmap.region_of((2.0, 0.5)) == 2
    # each band joins the two regions on either side of its cut; during a
    # transfer across band 0 the far region stays filtered out
    assert rmap.band_regions == ((0, 1), (1, 2))
    live = start_in(rmap, (0.3, 1.5))
    live = region_filter_update(live, (0.8, 1.5))
    assert live.active_state == TRANSFER and live.active_id == 0
    pts = np.array([[0.3, 0.5], [1.2, 0.5], [2.0, 0.5]])
    np.testing.assert_array_equal(live.particle_mask(pts),
                                  [True, True, False])
    assert rmap.region_of((2.0, 1.5)) == 2
    assert rmap.region_of((0.8, 0.5)) == -1
    # one band per extension: above wall 1 and below wall 2
    xs = sorted(0.5 * (b.xmin + b.xmax) for b in rmap.transfer_regions)
    assert xs == pytest.approx([0.8, 1.6])


def test_floating_wall_extends_both_ways():
    config = WorldConfig(width=2.0, height=1.8,
                         obstacles=(Rect(0.9, 0.4, 1.1, 1.4),))
    rmap = build_regions(config, buffer=0.05)
    assert len(rmap.main_regions) == 2
    assert len(rmap.transfer_regions) == 2
    assert rmap.region_of((0.2, 0.9)) == 0
    assert rmap.region_of((1.8, 0.9)) == 1
    assert rmap.region_of((1.0, 0.1)) in (-1, 0, 1)  # on the cut line itself


def test_default_buffer_uses_object_size():
    spec = ObjectSpec(shape="hexagon", start=(0.4, 0.9), goal=(2.0, 0.9))
    config = WorldConfig(obstacles=(Rect(0.9, 0.4, 1.1, 1.4),), object=spec)
    rmap = build_regions(config)
    circum = config.shape().circumradius
    band = rmap.transfer_regions[0]
    assert band.xmax - band.xmin == pytest.approx(4 * circum)


def test_outlier_rejection_recovers_cluster_mean():
    config = WorldConfig(obstacles=(Rect(0.75, 0.0, 0.85, 1.1),
                                    Rect(1.55, 0.7, 1.65, 1.8)))
    rmap = start_in(build_regions(config, buffer=0.1), (0.4, 0.9))
    rng = np.random.default_rng(7)
    cluster = rng.uniform([0.3, 0.8], [0.5, 1.0], size=(40, 2))
    strays = np.array([[2.0, 0.9], [2.1, 1.1], [1.2, 0.5]])
    pts = np.vstack([cluster, strays])
    filtered = summarize(pts, mask=rmap.particle_mask(pts))
    assert filtered.count_used == 40
    np.testing.assert_allclose(filtered.mean, cluster.mean(axis=0), atol=1e-12)
    raw = summarize(pts)
    assert abs(raw.mean[0] - cluster.mean(axis=0)[0]) > 0.05


def test_deterministic_rebuild():
    config = WorldConfig(obstacles=(Rect(0.75, 0.0, 0.85, 1.1),
                                    Rect(1.55, 0.7, 1.65, 1.8)))
    a = build_regions(config, buffer=0.1)
    b = build_regions(config, buffer=0.1)
    np.testing.assert_array_equal(a.slab_region, b.slab_region)
    assert a.transfer_regions == b.transfer_regions


@settings(max_examples=100, deadline=None)
@given(st.floats(0.001, 2.399), st.floats(0.001, 1.799))
def test_every_free_point_has_a_region(x, y):
    config = WorldConfig(obstacles=(Rect(0.75, 0.0, 0.85, 1.1),
                                    Rect(1.55, 0.7, 1.65, 1.8)))
    rmap = build_regions(config, buffer=0.1)
    rid = rmap.region_of((x, y))
    inside = any(o.xmin < x < o.xmax and o.ymin < y < o.ymax
                 for o in config.obstacles)
    if inside:
        assert rid == -1
    else:
        assert 0 <= rid < 3
        mask = rmap.particle_mask(np.array([[x, y]]))
        assert mask[0] == (rid == rmap.active_id)
