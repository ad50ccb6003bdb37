"""Full nonlinear tailed-body dynamics and anchoring-error metrics.

Two integrators are provided. :func:`simulate_tail_nd` works in template
units and is vectorized over bodies, which makes error maps cheap.
:func:`simulate_tail_phys` integrates the dimensioned equations of motion in
``(theta_b, theta_r)`` for a single body under any template controller.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .control import BangBangSchedule, EventGuard, PDGains, pd_torque_body
from .core_types import InvalidParameterError, TailParams, domain_ok, torque_bounds
from .gearing import optimize_gearing
from .integrate import hermite, integrate, rk4_step
from .reductions import HALF_SWEEP, Sweep, kinematic_error, reduce_tail
from .template import gamma_of, omega_tilde_of
from .trajectory import Trajectory

HALT_TOL = 1e-10


@dataclass(frozen=True)
class ErrorPair:
    e_b: float
    e_t: float


@dataclass(frozen=True)
class ErrorMapRow:
    xi_t: float
    eta: float
    e_c: float
    e_b: float
    e_t: float
    valid: bool


def default_inertia_ratio(eta):
    """Driven inertia of the reduction relative to ``I_b + m_r l_b**2``."""
    return 1.0 - 2.0 * np.asarray(eta, dtype=float) / math.pi


def nd_momentum(xi_t, eta, theta_bf, theta_r, theta_tilde_prime, theta_r_prime):
    """Normalized angular momentum about the pivot in template units."""
    c = np.cos(theta_r)
    return ((1.0 - 2.0 * xi_t * eta * c) * theta_bf * theta_tilde_prime
            + xi_t * (1.0 - eta * c) * theta_r_prime)


def _nd_torque(xi, thbf, w, beta, rp, braking: bool):
    u = xi * rp / (thbf * w)
    if braking:
        lo = np.where(u > 0, -np.minimum(beta, 1.0 - u), -beta)
        return lo / w
    hi = np.where(u < 0, np.minimum(beta, 1.0 + u), beta)
    return hi / w


def _nd_field(xi, eta, thbf, w, beta, gain, braking: bool):
    inv_xi = 1.0 / xi

    def f(t, y):
        th_p, r, r_p = y[1], y[2], y[3]
        c = np.cos(r)
        s = np.sin(r)
        m11 = inv_xi - 2.0 * eta * c
        m12 = 1.0 - eta * c
        tau = _nd_torque(xi, thbf, w, beta, r_p, braking)
        f1 = -eta * s * (2.0 * th_p * r_p + r_p * r_p / thbf)
        f2 = -gain * tau + eta * s * thbf * th_p * th_p
        det = m11 - m12 * m12
        th_pp = (f1 - m12 * f2) / det
        q = (m11 * f2 - m12 * f1) / det
        return np.array([th_p, th_pp, r_p, thbf * q])

    return f


@dataclass
class _BatchResult:
    halted: np.ndarray
    t_halt: np.ndarray
    state: np.ndarray


def _as_batch(*arrays):
    return [np.atleast_1d(np.asarray(a, dtype=float)) for a in np.broadcast_arrays(*arrays)]


def _run_nd(xi, eta, thbf, ratio, r0, w, ts, beta, dt, t_max, traj: Trajectory | None):
    xi, eta, thbf, ratio, r0 = _as_batch(xi, eta, thbf, ratio, r0)
    det_min = (1.0 - xi) / xi - eta**2
    if np.any(det_min <= 0) or np.any(2.0 * xi * eta >= 1.0):
        raise InvalidParameterError("mass matrix is singular outside the valid tail domain")
    gain = ratio * (1.0 - xi) / xi
    n = xi.size
    y = np.zeros((4, n))
    y[2] = r0

    def record(t, y, braking):
        if traj is None:
            return
        tau = _nd_torque(xi[0], thbf[0], w, beta, y[3, 0], braking)
        label = "braking" if braking else (
            "current_limited_accel" if _nd_torque(xi[0], thbf[0], w, beta, y[3, 0], False) * w >= beta
            else "voltage_limited_accel")
        traj.append(t, y[0, 0], y[1, 0], y[2, 0], y[3, 0], float(tau), label)

    record(0.0, y, False)
    t = 0.0
    if ts > 0:
        f = _nd_field(xi, eta, thbf, w, beta, gain, braking=False)
        steps = max(1, int(math.ceil(ts / dt - 1e-9)))
        h = ts / steps
        k = f(0.0, y)
        for i in range(steps):
            y = rk4_step(f, t, y, h, k)
            t = (i + 1) * h
            k = f(t, y)
            record(t, y, False)
    f = _nd_field(xi, eta, thbf, w, beta, gain, braking=True)
    halted = np.zeros(n, dtype=bool)
    t_halt = np.full(n, np.nan)
    state = np.full((4, n), np.nan)
    k = f(t, y)
    k_len = int(math.ceil((t_max - t) / dt))
    for i in range(k_len):
        y_new = rk4_step(f, t, y, dt, k)
        t_new = ts + (i + 1) * dt
        k_new = f(t_new, y_new)
        crossed = (~halted) & (y[1] > 0) & (y_new[1] <= 0)
        if np.any(crossed):
            idx = np.nonzero(crossed)[0]
            y0, k0, y1, k1 = y[:, idx], k[:, idx], y_new[:, idx], k_new[:, idx]
            lo = np.zeros(idx.size)
            hi = np.ones(idx.size)
            while (hi[0] - lo[0]) * dt > HALT_TOL:
                mid = 0.5 * (lo + hi)
                rate = hermite(y0[1], k0[1], y1[1], k1[1], dt, mid)
                pos = rate > 0
                lo = np.where(pos, mid, lo)
                hi = np.where(pos, hi, mid)
            state[:, idx] = hermite(y0, k0, y1, k1, dt, hi)
            t_halt[idx] = t + hi * dt
            halted[idx] = True
            if traj is not None and crossed[0]:
                s = state[:, :1]
                traj.append(t_halt[0], s[0, 0], s[1, 0], s[2, 0], s[3, 0],
                            float(_nd_torque(xi[0], thbf[0], w, beta, s[3, 0], True)), "halted")
                traj.status = "halted"
                traj.halt_time = float(t_halt[0])
                traj.halt_angle = float(s[0, 0])
        if halted.all():
            break
        t, y, k = t_new, y_new, k_new
        record(t, y, True)
    return _BatchResult(halted, t_halt, state)


def simulate_tail_nd(
    xi_t: float,
    eta: float,
    theta_bf: float,
    omega_tilde: float,
    t_s_tilde: float,
    beta: float = 1.0,
    dt: float = 1e-4,
    theta_r0: float | None = None,
    inertia_ratio: float | None = None,
    t_max: float | None = None,
) -> Trajectory:
    """Integrate the tailed body in template units from rest.

    The trajectory columns hold dimensionless time, ``theta_b / theta_bf``
    and its derivative, the joint angle and its derivative in rad, and
    dimensionless torque. The tail starts at ``theta_r0`` (default: the end
    of a sweep of ``theta_bf / xi_t`` centered on 180 degrees) and moves
    toward smaller joint angles. ``inertia_ratio`` is the reduction's driven
    inertia relative to ``I_b + m_r l_b**2`` and defaults to ``1 - 2 eta / pi``.
    """
    if not domain_ok(xi_t, eta):
        raise InvalidParameterError(f"(xi_t={xi_t}, eta={eta}) lies outside the valid tail domain")
    if dt <= 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    if theta_r0 is None:
        theta_r0 = math.pi + 0.5 * theta_bf / xi_t
    if inertia_ratio is None:
        inertia_ratio = float(default_inertia_ratio(eta))
    if t_max is None:
        t_max = 10.0 * (t_s_tilde + 1.0 + omega_tilde**2)
    traj = Trajectory(model="anchor", switch_time=t_s_tilde)
    _run_nd(xi_t, eta, theta_bf, inertia_ratio, theta_r0, omega_tilde, t_s_tilde, beta, dt, t_max, traj)
    return traj


def _optimal_point(beta: float = 1.0):
    c = optimize_gearing(beta)
    return c.omega_tilde_star, c.t_c_star, c.t_h_star


def anchoring_errors_batch(
    xi_t: Sequence[float],
    eta: Sequence[float],
    strokes: Sequence[float] | float = math.pi,
    center: float = math.pi,
    inertia_ratio: Sequence[float] | None = None,
    dt: float = 1e-4,
) -> tuple[np.ndarray, np.ndarray]:
    """Final angle and time errors of the optimal template controller on many tails at once."""
    xi_a, eta_a, s_a = _as_batch(xi_t, eta, strokes)
    if inertia_ratio is None:
        inertia_ratio = default_inertia_ratio(eta_a)
    w, ts, th = _optimal_point()
    thbf = xi_a * s_a
    res = _run_nd(xi_a, eta_a, thbf, inertia_ratio, center + 0.5 * s_a, w, ts, 1.0, dt,
                  10.0 * (ts + 1.0 + w * w), None)
    e_b = res.state[0] - 1.0
    e_t = (res.t_halt - th) / th
    return e_b, e_t


def anchoring_errors(xi_t: float, eta: float, sweep_policy: Sweep = HALF_SWEEP,
                     inertia_ratio: float | None = None, dt: float = 1e-4) -> ErrorPair:
    """Errors of the reduced template's prediction for one tail.

    The optimal controller (critical switch at the optimal gearing) is run
    on the nonlinear body with ``theta_bf = xi_t * s_r`` for the sweep.
    """
    if not domain_ok(xi_t, eta):
        raise InvalidParameterError(f"(xi_t={xi_t}, eta={eta}) lies outside the valid tail domain")
    ratio = None if inertia_ratio is None else [inertia_ratio]
    e_b, e_t = anchoring_errors_batch([xi_t], [eta], [sweep_policy.stroke], sweep_policy.center, ratio, dt)
    return ErrorPair(float(e_b[0]), float(e_t[0]))


def error_map(xi_values: Sequence[float], eta_values: Sequence[float],
              sweep_policy: Sweep = HALF_SWEEP, dt: float = 1e-4) -> list[ErrorMapRow]:
    """Kinematic and anchoring errors over a grid; invalid points carry NaN."""
    pts = [(float(x), float(e)) for x in xi_values for e in eta_values]
    ok = [domain_ok(x, e) for x, e in pts]
    valid_pts = [p for p, v in zip(pts, ok) if v]
    e_b = e_t = np.array([])
    if valid_pts:
        xs, es = zip(*valid_pts)
        e_b, e_t = anchoring_errors_batch(xs, es, sweep_policy.stroke, sweep_policy.center, dt=dt)
    rows, j = [], 0
    for (x, e), v in zip(pts, ok):
        if v:
            rows.append(ErrorMapRow(x, e, kinematic_error(x, e, sweep_policy), float(e_b[j]), float(e_t[j]), True))
            j += 1
        else:
            rows.append(ErrorMapRow(x, e, math.nan, math.nan, math.nan, False))
    return rows


def error_map_csv(rows: Sequence[ErrorMapRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("xi_t", "eta", "e_c", "e_b", "e_t", "valid"))
    for r in rows:
        writer.writerow([format(v, ".10g") for v in (r.xi_t, r.eta, r.e_c, r.e_b, r.e_t)] + [int(r.valid)])
    return buf.getvalue()


def _mass_coriolis(p: TailParams, th_r: float, w_b: float, w_r: float):
    m_r = p.reduced_mass
    c, s = math.cos(th_r), math.sin(th_r)
    cross = m_r * p.l_b * p.l_t
    a = p.I_t + m_r * p.l_t**2
    m11 = p.I_b + a + m_r * p.l_b**2 - 2.0 * cross * c
    m12 = a - cross * c
    c1 = cross * s * (2.0 * w_b * w_r + w_r * w_r)
    c2 = -cross * s * w_b * w_b
    return m11, m12, a, c1, c2


def tail_momentum(p: TailParams, th_r: float, w_b: float, w_r: float) -> float:
    """Angular momentum about the system COM."""
    m11, m12, _, _, _ = _mass_coriolis(p, th_r, w_b, w_r)
    return m11 * w_b + m12 * w_r


def tail_energy(p: TailParams, th_r: float, w_b: float, w_r: float) -> float:
    m11, m12, m22, _, _ = _mass_coriolis(p, th_r, w_b, w_r)
    return 0.5 * (m11 * w_b * w_b + 2.0 * m12 * w_b * w_r + m22 * w_r * w_r)


def simulate_tail_phys(
    p: TailParams,
    controller: BangBangSchedule | EventGuard | PDGains | None,
    dt: float | None = None,
    theta_r0: float | None = None,
    initial_rates: tuple[float, float] = (0.0, 0.0),
    t_max: float | None = None,
    settle_rate: float | None = None,
) -> Trajectory:
    """Integrate the dimensioned equations of motion of a tailed body.

    ``controller=None`` applies no joint torque and runs until ``t_max``.
    Otherwise the run halts when the body rate falls through zero after the
    braking phase begins; under PD it halts once the rate drops back below
    ``settle_rate`` (default ``1e-3 gamma theta_bf``). The default step is
    ``1e-4 / gamma`` of the reduced template.
    """
    reduced, dims = reduce_tail(p)
    template = reduced.template()
    gamma = gamma_of(template)
    xi_t = dims.xi_t
    motor = p.motor
    tau_m, w_m, beta = motor.stall_torque, motor.no_load_speed, motor.current_limit_fraction
    theta_bf = p.task.theta_bf
    if dt is None:
        dt = 1e-4 / gamma
    if theta_r0 is None:
        theta_r0 = math.pi + 0.5 * theta_bf / xi_t
    if t_max is None:
        t_max = 2.0 * p.task.t_f + 50.0 / gamma
    if settle_rate is None:
        settle_rate = 1e-3 * gamma * theta_bf
    tol = HALT_TOL / gamma
    traj = Trajectory(model="anchor")

    def torque(y, mode: str) -> tuple[float, str]:
        if mode == "free":
            return 0.0, "free"
        lo, hi = torque_bounds(y[3] / w_m, beta)
        if mode == "accel":
            return hi * tau_m, ("current_limited_accel" if hi >= beta else "voltage_limited_accel")
        if mode == "brake":
            return lo * tau_m, "braking"
        cmd = pd_torque_body(controller, theta_bf, y[0], y[1])
        if cmd >= hi * tau_m:
            return hi * tau_m, ("current_limited_accel" if hi >= beta else "voltage_limited_accel")
        if cmd <= lo * tau_m:
            return lo * tau_m, "braking"
        return cmd, "linear"

    def field(mode: str):
        def f(t, y):
            m11, m12, m22, c1, c2 = _mass_coriolis(p, y[2], y[1], y[3])
            tau, _ = torque(y, mode)
            r1, r2 = -c1, -tau - c2
            det = m11 * m22 - m12 * m12
            return np.array([y[1], (m22 * r1 - m12 * r2) / det, y[3], (m11 * r2 - m12 * r1) / det])
        return f

    def recorder(mode: str):
        def rec(t, y):
            tau, label = torque(y, mode)
            traj.append(t, y[0], y[1], y[2], y[3], tau, label)
        return rec

    y0 = np.array([0.0, initial_rates[0], theta_r0, initial_rates[1]])

    def rest(y):
        return -y[1]

    if controller is None:
        recorder("free")(0.0, y0)
        integrate(field("free"), 0.0, y0, dt, t_max, None, recorder("free"), tol)
        return traj
    if isinstance(controller, PDGains):
        recorder("pd")(0.0, y0)
        t, y, hit = integrate(field("pd"), 0.0, y0, dt, t_max, lambda y: settle_rate - y[1],
                              recorder("pd"), tol)
    else:
        recorder("accel")(0.0, y0)
        if isinstance(controller, BangBangSchedule):
            t, y, _ = integrate(field("accel"), 0.0, y0, dt, min(controller.t_s, t_max), None,
                                recorder("accel"), tol)
        elif isinstance(controller, EventGuard):
            target = controller.theta_s_tilde * theta_bf
            t, y, _ = integrate(field("accel"), 0.0, y0, dt, t_max, lambda y: y[0] - target,
                                recorder("accel"), tol)
        else:
            raise TypeError(f"unsupported controller {type(controller).__name__}")
        traj.switch_time = t
        t, y, hit = integrate(field("brake"), t, y, dt, t_max, rest, recorder("brake"), tol)
    if hit:
        traj.status = "halted"
        traj.halt_time = t
        traj.halt_angle = float(y[0])
        traj.phase[-1] = "halted"
    return traj


def nd_point_of(p: TailParams) -> dict:
    """Template-unit arguments of :func:`simulate_tail_nd` matching a physical tail."""
    reduced, dims = reduce_tail(p)
    template = reduced.template()
    gamma = gamma_of(template)
    base = p.I_b + dims.m_r * p.l_b**2
    return {
        "xi_t": dims.xi_t,
        "eta": dims.eta,
        "theta_bf": p.task.theta_bf,
        "omega_tilde": omega_tilde_of(template, gamma),
        "inertia_ratio": reduced.driven_inertia / base,
        "gamma": gamma,
    }
