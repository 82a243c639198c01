"""Trial records: digests, serialization, byte-exact replay."""
import dataclasses
import json

import numpy as np
import pytest

import swarmpush as sp
from swarmpush.manipulation import ManipulationConfig, run_to_completion
from swarmpush.records import (config_digest, load_record, replay,
                               save_record, state_digest)
from swarmpush.scenarios import make_scenario


def short_trial(max_time=5.0, seed=0):
    sc = make_scenario("open-box", seed=seed)
    cfg = ManipulationConfig.from_method(sc.method)
    return run_to_completion(cfg, sc.config, seed, max_time)


def test_config_digest_is_stable_and_sensitive():
    w = make_scenario("open-box").config
    assert config_digest(w) == config_digest(w)
    tweaked = dataclasses.replace(w, particle_count=w.particle_count + 1)
    assert config_digest(tweaked) != config_digest(w)


def test_state_digest_depends_on_every_field():
    rng = np.random.default_rng(0)
    s = sp.SwarmState(positions=rng.random((5, 2)),
                      velocities=rng.random((5, 2)),
                      object_pose=np.array([1.0, 1.0, 0.0]),
                      object_velocity=np.zeros(3))
    base = state_digest(s)
    assert base == state_digest(s)
    moved = dataclasses.replace(
        s, positions=s.positions + np.array([[1e-12, 0]] + [[0, 0]] * 4))
    assert state_digest(moved) != base
    turned = dataclasses.replace(s, object_pose=np.array([1.0, 1.0, 1e-12]))
    assert state_digest(turned) != base


def test_record_roundtrips_through_disk(tmp_path):
    rec = short_trial(max_time=1.0)
    path = tmp_path / "trial.json"
    save_record(rec, str(path))
    back = load_record(str(path))
    assert back == rec


def test_record_file_is_plain_json(tmp_path):
    rec = short_trial(max_time=0.5)
    path = tmp_path / "trial.json"
    save_record(rec, str(path))
    raw = json.loads(path.read_text())
    assert raw["version"] == rec.version
    assert raw["seed"] == 0
    assert len(raw["input_log"]) == rec.steps


def test_replay_reproduces_digest_and_time():
    rec = short_trial(max_time=4.0)
    res = replay(rec)
    assert res.final_digest == rec.final_digest
    assert res.completion_time_s == pytest.approx(rec.completion_time_s,
                                                  abs=1e-12)
    assert res.steps == rec.steps


def test_replay_detects_tampered_log():
    rec = short_trial(max_time=2.0)
    doctored = dataclasses.replace(
        rec, input_log=[[fx + 0.25, fy] for fx, fy in rec.input_log])
    res = replay(doctored)
    assert res.final_digest != rec.final_digest


def test_timeout_record_caps_completion_time():
    rec = short_trial(max_time=1.5)
    assert not rec.success
    assert rec.completion_time_s == 1.5
    assert rec.steps == 90  # 1.5 s at 60 steps/s


def test_successful_trial_replays_end_to_end():
    # long enough for the open-box trial to actually finish
    rec = short_trial(max_time=60.0)
    assert rec.success
    res = replay(rec)
    assert res.final_digest == rec.final_digest
    assert res.completion_time_s == rec.completion_time_s
