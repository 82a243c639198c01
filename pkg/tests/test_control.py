import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import swarmpush as sp
from swarmpush.control import (Gains, HybridState, LinearSystem, MEAN_CONTROL,
                               VARIANCE_REDUCTION, ZeroVector,
                               controllability_matrix, controllability_rank,
                               discretize_to_lights, hybrid_step,
                               light_direction, lyapunov_value, mean_pd,
                               mean_system, shared_input_system,
                               single_particle_system, variance_goal_offset,
                               variance_pid)
from swarmpush.stats import SwarmSummary


def mk_summary(mean=(0, 0), vel=(0, 0), var=(0, 0)):
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    return SwarmSummary(mean=mean, mean_vel=np.asarray(vel, dtype=float),
                        variance=var, covariance=np.diag(var),
                        hull=mean[None, :], count_used=1)


# ---------------------------------------------------------------- mean PD

def test_mean_pd_zero_error():
    u = mean_pd(mk_summary(mean=(2, 3)), (2, 3), Gains(4, 1))
    assert u.fx == 0 and u.fy == 0


def test_mean_pd_paper_gains():
    u = mean_pd(mk_summary(mean=(0, 0)), (1, 0), Gains(kp=4, kd=1))
    assert (u.fx, u.fy) == (4.0, 0.0)


def test_mean_pd_pure_damping():
    u = mean_pd(mk_summary(mean=(1, 1), vel=(2, 0)), (1, 1), Gains(kp=4, kd=1))
    assert (u.fx, u.fy) == (-2.0, 0.0)


def test_mean_pd_clamps():
    u = mean_pd(mk_summary(), (100, 0), Gains(4, 1), max_force=10)
    assert np.hypot(u.fx, u.fy) == pytest.approx(10)


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5),
       st.floats(0.1, 10))
def test_mean_pd_linear_in_error(ex, ey, vx, vy, alpha):
    g = Gains(4, 1)
    u1 = mean_pd(mk_summary(vel=(vx, vy)), (ex, ey), g)
    u2 = mean_pd(mk_summary(vel=(alpha * vx, alpha * vy)),
                 (alpha * ex, alpha * ey), g)
    assert u2.fx == pytest.approx(alpha * u1.fx, rel=1e-9, abs=1e-9)
    assert u2.fy == pytest.approx(alpha * u1.fy, rel=1e-9, abs=1e-9)


# ---------------------------------------------------------------- variance PID

def test_variance_goal_offset_paper_example():
    # r=1, var_ref=3 -> goal one radius plus sqrt(9)=3 from the wall
    assert variance_goal_offset(3.0, 1.0) == pytest.approx(4.0)


def test_variance_pid_zero_at_setpoint():
    cfg = sp.WorldConfig(width=10, height=10, particle_radius=1.0)
    goal = variance_goal_offset(3.0, 1.0)
    s = mk_summary(mean=(goal, 5), var=(3.0, 0))
    u = variance_pid(s, 3.0, "left", Gains(4, 1, 2), cfg)
    assert u.fx == pytest.approx(0) and u.fy == 0


def test_variance_pid_mirrors_for_right_wall():
    """Symmetry oracle: reflect the world, run the left law, reflect back."""
    cfg = sp.WorldConfig(width=10, height=10, particle_radius=0.5)
    g = Gains(4, 1, 2)
    for mean_x, vel_x, var_x in [(2.0, 0.3, 1.0), (7.0, -1.0, 0.2), (5.0, 0.0, 2.0)]:
        s = mk_summary(mean=(mean_x, 5), vel=(vel_x, 0), var=(var_x, 0))
        mirrored = mk_summary(mean=(cfg.width - mean_x, 5), vel=(-vel_x, 0),
                              var=(var_x, 0))
        u_right = variance_pid(s, 0.8, "right", g, cfg)
        u_left = variance_pid(mirrored, 0.8, "left", g, cfg)
        assert u_right.fx == pytest.approx(-u_left.fx, rel=1e-12)


def test_variance_pid_vertical_axis():
    cfg = sp.WorldConfig(width=10, height=6, particle_radius=0.5)
    s = mk_summary(mean=(5, 3), var=(0, 1.0))
    u = variance_pid(s, 0.5, "bottom", Gains(4, 1, 2), cfg)
    assert u.fx == 0 and u.fy != 0
    with pytest.raises(ValueError):
        variance_pid(s, 0.5, "north", Gains(4, 1, 2), cfg)


def test_variance_pid_pushes_toward_near_wall_when_dispersed():
    # dispersed swarm centred in the box: squeezing against the left wall
    # must push left (negative), against the right wall must push right
    cfg = sp.WorldConfig(width=10, height=10, particle_radius=0.1)
    s = mk_summary(mean=(5, 5), var=(4.0, 4.0))
    assert variance_pid(s, 0.3, "left", Gains(4, 1, 2), cfg).fx < 0
    assert variance_pid(s, 0.3, "right", Gains(4, 1, 2), cfg).fx > 0


# ---------------------------------------------------------------- lyapunov

def test_lyapunov_values():
    assert lyapunov_value(2.0, 2.0) == 0.0
    assert lyapunov_value(4.0, 2.0) == 2.0
    assert lyapunov_value(0.0, 2.0) == 2.0


# ---------------------------------------------------------------- hybrid

CFG = sp.WorldConfig(width=2.0, height=2.0)
BAND = (0.02, 0.15)


def test_hybrid_stays_in_mean_mode_inside_band():
    st0 = HybridState(goal=(1.5, 1.0))
    s = mk_summary(mean=(1.0, 1.0), var=(0.1, 0.1))
    st1, u = hybrid_step(st0, s, (1.5, 1.0), BAND, CFG, Gains(4, 1))
    assert st1.mode_x == MEAN_CONTROL and st1.mode_y == MEAN_CONTROL
    assert st1.goal == (1.5, 1.0)
    assert u.fx > 0  # pulling toward the target


def test_hybrid_enters_variance_reduction_toward_nearest_wall():
    st0 = HybridState(goal=(1.5, 1.0))
    s = mk_summary(mean=(0.6, 1.0), var=(0.2, 0.1))
    st1, _ = hybrid_step(st0, s, (1.5, 1.0), BAND, CFG, Gains(4, 1))
    assert st1.mode_x == VARIANCE_REDUCTION
    assert st1.goal[0] == 0.0          # nearest wall for mean at 0.6 of 2.0
    assert st1.mode_y == MEAN_CONTROL
    assert st1.goal[1] == 1.0
    # mean right of centre picks the far wall instead
    s2 = mk_summary(mean=(1.4, 1.0), var=(0.2, 0.1))
    st2, _ = hybrid_step(st0, s2, (1.5, 1.0), BAND, CFG, Gains(4, 1))
    assert st2.goal[0] == 2.0


def test_hybrid_restores_target_below_min():
    st0 = HybridState(mode_x=VARIANCE_REDUCTION, goal=(0.0, 1.0))
    s = mk_summary(mean=(0.3, 1.0), var=(0.01, 0.05))
    st1, _ = hybrid_step(st0, s, (1.5, 1.0), BAND, CFG, Gains(4, 1))
    assert st1.mode_x == MEAN_CONTROL
    assert st1.goal == (1.5, 1.0)


def test_hybrid_holds_wall_goal_while_in_band():
    # once squeezing, stay squeezing until the lower threshold is crossed
    st0 = HybridState(mode_x=VARIANCE_REDUCTION, goal=(0.0, 1.0))
    s = mk_summary(mean=(0.4, 1.0), var=(0.08, 0.05))
    st1, _ = hybrid_step(st0, s, (1.5, 1.0), BAND, CFG, Gains(4, 1))
    assert st1.mode_x == VARIANCE_REDUCTION
    assert st1.goal[0] == 0.0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.021, 0.149), min_size=1, max_size=25))
def test_hybrid_never_switches_inside_open_band(var_seq):
    st0 = HybridState(goal=(1.5, 1.0))
    for v in var_seq:
        s = mk_summary(mean=(1.0, 1.0), var=(v, v))
        st0, _ = hybrid_step(st0, s, (1.5, 1.0), BAND, CFG, Gains(4, 1))
        assert st0.mode_x == MEAN_CONTROL and st0.mode_y == MEAN_CONTROL


def test_hybrid_rejects_inverted_band():
    with pytest.raises(ValueError):
        hybrid_step(HybridState(), mk_summary(), (0, 0), (0.2, 0.1), CFG, Gains())


# ---------------------------------------------------------------- lights

def test_lights_cardinals_and_diagonals():
    assert discretize_to_lights(sp.ControlInput(1, 0)) == 0
    assert discretize_to_lights(sp.ControlInput(1, 1)) == 1
    assert discretize_to_lights(sp.ControlInput(0, 1)) == 2
    assert discretize_to_lights(sp.ControlInput(-1, 0)) == 4
    assert discretize_to_lights(sp.ControlInput(0, -1)) == 6
    assert discretize_to_lights(sp.ControlInput(1, -1)) == 7


def test_lights_tie_breaks_to_lower_index():
    for k in range(8):
        ang = np.pi / 8 + k * np.pi / 4  # exactly between sectors k and k+1
        u = sp.ControlInput(np.cos(ang), np.sin(ang))
        assert discretize_to_lights(u) == k


def test_lights_zero_vector_raises():
    with pytest.raises(ZeroVector):
        discretize_to_lights(sp.ControlInput(0, 0))


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 2 * np.pi, exclude_max=True), st.floats(1e-6, 1e6))
def test_lights_scale_invariant(ang, scale):
    u1 = sp.ControlInput(np.cos(ang), np.sin(ang))
    u2 = sp.ControlInput(scale * np.cos(ang), scale * np.sin(ang))
    assert discretize_to_lights(u1) == discretize_to_lights(u2)


def test_light_direction_roundtrip():
    for k in range(8):
        d = light_direction(k)
        assert discretize_to_lights(sp.ControlInput(*d)) == k


# ---------------------------------------------------------------- controllability

def test_rank_single_particle_is_four():
    assert controllability_rank(single_particle_system()) == 4


def test_rank_shared_input_is_two():
    for n in (2, 5, 10):
        assert controllability_rank(shared_input_system(n)) == 2


def test_rank_mean_system_is_two():
    assert controllability_rank(mean_system()) == 2


def test_rank_matches_exact_rational_oracle():
    sy = pytest.importorskip("sympy")
    for sys_ in (single_particle_system(), shared_input_system(3),
                 shared_input_system(7), mean_system()):
        c = controllability_matrix(sys_)
        exact = sy.Matrix(c.astype(int)).rank()
        assert controllability_rank(sys_) == exact


def test_linear_system_validates_shapes():
    with pytest.raises(ValueError):
        LinearSystem(np.zeros((2, 3)), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        LinearSystem(np.zeros((2, 2)), np.zeros((3, 1)))


# ---------------------------------------------------------------- closed loop

def test_closed_loop_mean_converges():
    # swarm mean reaches a commanded point with small steady-state error
    cfg = sp.WorldConfig(width=4.0, height=4.0, noise_magnitude=0.5)
    rng = np.random.default_rng(8)
    s = sp.spawn(cfg, sp.Rect(0.5, 0.5, 1.5, 1.5), rng=rng)
    goal = (3.0, 3.0)
    from swarmpush.stats import summarize
    err0 = np.linalg.norm(summarize(s.positions).mean - goal)
    g = Gains(4, 1)
    for _ in range(900):  # 15 simulated seconds
        summary = summarize(s.positions, s.velocities)
        u = mean_pd(summary, goal, g, cfg.max_force)
        s = sp.step(cfg, s, u, rng)
    err = np.linalg.norm(summarize(s.positions).mean - goal)
    assert err < 0.05 * err0
