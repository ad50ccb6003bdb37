import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from irappendage.control import BangBangSchedule, simulate_template
from irappendage.core_types import InvalidParameterError
from irappendage.gearing import optimize_gearing
from irappendage.template import (
    accel_flow,
    accel_state,
    braking_flow,
    current_limited_flow,
    g_h_phys,
    g_h_tilde,
    g_h_tilde_beta,
    g_theta_phys,
    g_theta_tilde,
    g_theta_tilde_beta,
    gamma_of,
    omega_tilde_of,
    transition_time,
)

from conftest import make_template
from oracles import template_halt


def test_gamma_trivial_and_power_law():
    p = make_template(xi=1.0, I_d=1.0, power=0.25, theta=1.0)
    assert gamma_of(p) == pytest.approx(1.0, rel=1e-15)
    q = make_template(xi=1.0, I_d=1.0, power=0.25, theta=2.0)
    assert gamma_of(q) / gamma_of(p) == pytest.approx(2 ** (-2 / 3), rel=1e-14)


def test_gamma_rhex_by_direct_evaluation():
    p = make_template(xi=0.5587, I_d=0.141, power=342.0, theta=math.pi / 2)
    direct = (4 * 342 * 0.5587 / (0.141 * (math.pi / 2) ** 2)) ** (1 / 3)
    assert gamma_of(p) == pytest.approx(direct, rel=1e-14)
    assert direct == pytest.approx(13.00, abs=0.01)


def test_accel_flow_endpoints():
    assert accel_flow(0.7, 0.0) == (0.0, 0.0)
    assert accel_flow(0.7, 1e3)[1] == pytest.approx(0.7, rel=1e-12)


def test_accel_flow_matches_rk4():
    # body angle at t~ for 0 < t~ < t_s comes from a run switched exactly at t~
    w, t = 0.74, 1.62
    th_oracle, _ = template_halt(w, t, 1.0, h=1e-4)
    th, thp = accel_flow(w, t)
    assert th + 0.5 * w * thp * thp == pytest.approx(th_oracle, abs=1e-8)


def test_accel_flow_small_time_precision():
    # the early parabola beta t^2 / (2 w) must survive cancellation
    th, thp = accel_flow(3.0, 1e-6)
    assert th == pytest.approx(1e-12 / 6.0, rel=1e-9)
    assert thp == pytest.approx(1e-6 / 3.0, rel=1e-9)


def test_braking_continuity_and_zero_crossing():
    w, ts = 0.9, 1.3
    assert braking_flow(w, ts, ts) == pytest.approx(accel_flow(w, ts), abs=1e-15)
    _, thp = accel_flow(w, ts)
    assert braking_flow(w, ts, ts + w * thp)[1] == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(InvalidParameterError):
        braking_flow(w, ts, ts - 0.1)


def test_braking_midpoint_matches_rk4():
    w, ts = 0.74, 1.0
    th_h, t_h = template_halt(w, ts, 1.0, h=1e-3)
    th, thp = braking_flow(w, ts, 0.5 * (ts + t_h))
    # the remaining coast from the midpoint closes the gap to the oracle halt
    assert th + 0.5 * w * thp * thp == pytest.approx(th_h, abs=1e-8)


def test_halting_values_at_optimum():
    assert g_theta_tilde(0.74, 1.62) == pytest.approx(1.0, abs=0.01)
    assert g_h_tilde(0.74, 1.62) == pytest.approx(2.14, abs=0.01)
    assert g_theta_tilde(0.5, 0.0) == 0.0
    assert g_h_tilde(0.5, 0.0) == 0.0


def test_halting_forms_recompose():
    rng = random.Random(3)
    for _ in range(200):
        w, ts = rng.uniform(0.05, 5), rng.uniform(0.0, 10)
        th, thp = accel_flow(w, ts)
        assert g_theta_tilde(w, ts) == pytest.approx(th + 0.5 * w * thp * thp, rel=1e-12, abs=1e-12)
        assert g_h_tilde(w, ts) == pytest.approx(ts + w * thp, rel=1e-12, abs=1e-12)


def test_beta_one_reduces_exactly():
    for w, ts in ((0.3, 0.2), (0.74, 1.62), (2.0, 5.0)):
        assert transition_time(w, 1.0) == 0.0
        assert accel_state(w, ts, 1.0) == pytest.approx(accel_flow(w, ts), rel=1e-14)
        assert g_theta_tilde_beta(w, ts, 1.0) == pytest.approx(g_theta_tilde(w, ts), rel=1e-13)
        assert g_h_tilde_beta(w, ts, 1.0) == pytest.approx(g_h_tilde(w, ts), rel=1e-13)


def test_current_limit_transition_state():
    w, beta = 1.3, 0.5
    t_l = transition_time(w, beta)
    th, thp = accel_state(w, t_l, beta)
    assert thp == pytest.approx(0.5 * w, rel=1e-14)
    assert th == pytest.approx((1 - beta) ** 2 / (2 * beta) * w**3, rel=1e-14)
    # continuous from either side
    lo = accel_state(w, t_l * (1 - 1e-12), beta)
    hi = accel_state(w, t_l * (1 + 1e-12), beta)
    assert lo == pytest.approx(hi, rel=1e-9)
    with pytest.raises(InvalidParameterError):
        transition_time(w, 0.0)


def test_symmetric_phase_branch():
    for beta in (0.2, 0.5, 0.8):
        w = (beta / (1 - beta) ** 2) ** (1 / 3) * 1.2
        ts = transition_time(w, beta)
        assert g_h_tilde_beta(w, ts, beta) == pytest.approx(2 * ts, rel=1e-12)
        assert g_theta_tilde_beta(w, 0.5 * ts, beta) == pytest.approx(beta * (0.5 * ts) ** 2 / w, rel=1e-12)


def test_random_triples_match_rk4():
    rng = random.Random(11)
    for _ in range(60):
        w, ts, beta = rng.uniform(0.2, 2.5), rng.uniform(0.05, 4), rng.uniform(0.2, 1.0)
        th, t = template_halt(w, ts, beta)
        assert g_theta_tilde_beta(w, ts, beta) == pytest.approx(th, abs=1e-8)
        assert g_h_tilde_beta(w, ts, beta) == pytest.approx(t, abs=1e-8)


def test_three_phase_flow_labels():
    w, beta, ts = 1.5, 0.5, 4.0
    t_l = transition_time(w, beta)
    assert current_limited_flow(w, beta, 0.5 * t_l, ts).phase == "current_limited_accel"
    assert current_limited_flow(w, beta, 0.5 * (t_l + ts), ts).phase == "voltage_limited_accel"
    t_h = g_h_tilde_beta(w, ts, beta)
    mid = current_limited_flow(w, beta, 0.5 * (ts + t_h), ts)
    assert mid.phase == "braking" and mid.theta_tilde_prime > 0
    end = current_limited_flow(w, beta, t_h + 1, ts)
    assert end.phase == "halted" and end.theta_tilde_prime == 0.0
    assert end.theta_tilde == pytest.approx(g_theta_tilde_beta(w, ts, beta), rel=1e-15)


@given(st.floats(0.05, 5), st.floats(1e-3, 10), st.floats(1e-3, 10), st.floats(0.1, 1))
def test_halting_angle_increasing_in_switch_time(w, a, b, beta):
    lo, hi = sorted((a, b))
    if hi - lo > 1e-6 * hi:
        assert g_theta_tilde_beta(w, hi, beta) > g_theta_tilde_beta(w, lo, beta)
        assert g_h_tilde_beta(w, hi, beta) > g_h_tilde_beta(w, lo, beta)


@given(st.floats(0.05, 5), st.floats(1e-3, 10), st.floats(0.1, 1), st.floats(0, 1))
def test_flow_monotone_until_halt(w, ts, beta, frac):
    t_h = g_h_tilde_beta(w, ts, beta)
    s = current_limited_flow(w, beta, frac * t_h, ts)
    assert s.theta_tilde_prime >= -1e-12
    assert s.theta_tilde <= g_theta_tilde_beta(w, ts, beta) * (1 + 1e-12) + 1e-15


@given(st.floats(0.1, 1), st.floats(1e-3, 10), st.floats(0.01, 5), st.floats(1, 500),
       st.floats(1, 100), st.floats(0.1, 3), st.floats(0.2, 1), st.floats(1e-3, 1))
def test_dimensioned_forms_consistent(xi, I_d, P, w_m, theta, t_s, beta, dummy):
    p = make_template(xi=xi, I_d=I_d, power=P, w_m=w_m, theta=theta, beta=beta, t_s=t_s)
    gamma = gamma_of(p)
    w = omega_tilde_of(p, gamma)
    assert g_theta_phys(p) == pytest.approx(theta * g_theta_tilde_beta(w, gamma * t_s, beta), rel=1e-12)
    assert g_h_phys(p) == pytest.approx(g_h_tilde_beta(w, gamma * t_s, beta) / gamma, rel=1e-12)


def test_zero_switch_time_gives_no_motion():
    p = make_template(t_s=0.0)
    assert g_theta_phys(p) == 0.0 and g_h_phys(p) == 0.0


def test_rhex_design_with_optimal_switch_reaches_target():
    c = optimize_gearing(1.0)
    p0 = make_template(xi=0.5587, I_d=0.141, power=342.0, theta=math.pi / 2)
    gamma = gamma_of(p0)
    w_m = c.omega_tilde_star * gamma * (math.pi / 2) / 0.5587
    p = make_template(xi=0.5587, I_d=0.141, power=342.0, w_m=w_m, theta=math.pi / 2, t_s=c.t_c_star / gamma)
    assert g_theta_phys(p) == pytest.approx(math.pi / 2, rel=1e-9)


def test_bang_bang_simulation_matches_closed_form():
    c = optimize_gearing(1.0)
    p0 = make_template()
    gamma = gamma_of(p0)
    w_m = c.omega_tilde_star * gamma * p0.task.theta_bf / p0.effectiveness
    p = make_template(w_m=w_m, t_s=c.t_c_star / gamma)
    traj = simulate_template(p, BangBangSchedule(p.switch_time), dt=1e-4 / gamma)
    assert traj.status == "halted"
    assert traj.halt_angle == pytest.approx(g_theta_phys(p), abs=1e-9)
    assert traj.halt_time == pytest.approx(g_h_phys(p), abs=1e-9)
