"""Controllers for the template: switch schedule, event guard and saturated PD."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core_types import InvalidParameterError, TemplateParams, torque_bounds
from .gearing import critical_switch
from .integrate import integrate
from .template import accel_state, braking_flow, gamma_of
from .trajectory import Trajectory


@dataclass(frozen=True)
class BangBangSchedule:
    """Full positive voltage until ``t_s`` seconds, then full negative voltage."""

    t_s: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t_s) and self.t_s >= 0):
            raise InvalidParameterError(f"t_s must be >= 0, got {self.t_s}")


@dataclass(frozen=True)
class EventGuard:
    """Switch to braking once the body passes ``theta_s_tilde * theta_bf``."""

    theta_s_tilde: float

    def __post_init__(self) -> None:
        if not 0 < self.theta_s_tilde < 1:
            raise InvalidParameterError(f"theta_s_tilde must lie in (0, 1), got {self.theta_s_tilde}")


@dataclass(frozen=True)
class PDGains:
    K_p: float
    K_d: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.K_p) and self.K_p > 0):
            raise InvalidParameterError(f"K_p must be positive, got {self.K_p}")
        if not (math.isfinite(self.K_d) and self.K_d >= 0):
            raise InvalidParameterError(f"K_d must be >= 0, got {self.K_d}")

    def internal(self, effectiveness: float) -> "PDGains":
        """Gains acting on the appendage angle, ``K' = xi * K``."""
        return PDGains(effectiveness * self.K_p, effectiveness * self.K_d)


@dataclass(frozen=True)
class EventGuardRun:
    t_switch: float
    t_halt: float
    theta_halt: float


def guard_angle(omega_tilde: float, beta: float = 1.0) -> float:
    """Body angle reached at the critical switch."""
    th, _ = accel_state(omega_tilde, critical_switch(omega_tilde, beta), beta)
    return th


def optimal_gain_ratio(omega_tilde: float, beta: float = 1.0) -> float:
    """``K_d/K_p`` in dimensionless form that zeroes the PD command at the critical switch."""
    th, thp = accel_state(omega_tilde, critical_switch(omega_tilde, beta), beta)
    return (1.0 - th) / thp


def physical_gain_ratio(omega_tilde: float, beta: float, gamma: float) -> float:
    """``K_d/K_p`` in seconds for a body with rescale factor ``gamma``."""
    return optimal_gain_ratio(omega_tilde, beta) / gamma


def gains_from_dimensionless(p: TemplateParams, kp_tilde: float, ratio: float) -> PDGains:
    """Physical gains from ``K_p~ = K_p/(gamma**2 I_d)`` and ``K_d~/K_p~``."""
    gamma = gamma_of(p)
    return PDGains(kp_tilde * gamma**2 * p.driven_inertia, ratio * kp_tilde * gamma * p.driven_inertia)


def pd_torque_body(gains: PDGains, theta_bd: float, theta_b: float, theta_b_dot: float) -> float:
    return gains.K_p * (theta_bd - theta_b) - gains.K_d * theta_b_dot


def pd_torque_internal(gains: PDGains, theta_rd: float, theta_r: float, theta_r_dot: float) -> float:
    """PD law written on the appendage angle; ``gains`` are the internal ones."""
    return -gains.K_p * (theta_rd - theta_r) + gains.K_d * theta_r_dot


def run_event_guard(omega_tilde: float, beta: float, theta_s_tilde: float) -> EventGuardRun:
    """Execute the event guard on the closed-form flows."""
    if not 0 < theta_s_tilde < 1:
        raise InvalidParameterError(f"theta_s_tilde must lie in (0, 1), got {theta_s_tilde}")

    def residual(t: float) -> float:
        return accel_state(omega_tilde, t, beta)[0] - theta_s_tilde

    hi = 1.0
    while residual(hi) < 0:
        hi *= 2.0
    t_sw = brentq(residual, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    _, thp = accel_state(omega_tilde, t_sw, beta)
    t_h = t_sw + omega_tilde * thp / beta
    th_h, _ = braking_flow(omega_tilde, t_sw, t_h, beta)
    return EventGuardRun(t_sw, t_h, th_h)


def _accel_label(hi: float, beta: float) -> str:
    return "current_limited_accel" if hi >= beta else "voltage_limited_accel"


def simulate_template(
    p: TemplateParams,
    controller: BangBangSchedule | EventGuard | PDGains,
    dt: float | None = None,
    t_max: float | None = None,
    settle_rate: float | None = None,
) -> Trajectory:
    """Integrate the template body under a controller with the motor limits.

    The body obeys ``I_d theta_b'' = tau`` and the appendage is slaved,
    ``theta_r = -theta_b / xi``. Integration is fixed-step RK4 with
    ``dt = 1e-4 t_f`` by default. The run halts when the body rate
    falls through zero after braking starts; the crossing is refined by
    bisection to ``1e-10 t_f``.

    A PD loop may settle without the rate changing sign, so under PD the
    halt fires once the rate, having exceeded ``settle_rate``, falls back
    below it. The default is ``1e-3 gamma theta_bf``.
    """
    xi, I_d = p.effectiveness, p.driven_inertia
    beta = p.motor.current_limit_fraction
    tau_m, w_m = p.motor.stall_torque, p.motor.no_load_speed
    theta_bf, t_f = p.task.theta_bf, p.task.t_f
    if dt is None:
        dt = 1e-4 * t_f
    if dt <= 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    gamma = gamma_of(p)
    if t_max is None:
        t_max = 2.0 * t_f + 50.0 / gamma
    if settle_rate is None:
        settle_rate = 1e-3 * gamma * theta_bf
    tol = 1e-10 * t_f
    traj = Trajectory(model="template")

    def torque(y: np.ndarray, mode: str) -> tuple[float, str]:
        lo, hi = torque_bounds(-y[1] / (xi * w_m), beta)
        if mode == "accel":
            return hi * tau_m, _accel_label(hi, beta)
        if mode == "brake":
            return lo * tau_m, "braking"
        cmd = pd_torque_body(controller, theta_bf, y[0], y[1])
        if cmd >= hi * tau_m:
            return hi * tau_m, _accel_label(hi, beta)
        if cmd <= lo * tau_m:
            return lo * tau_m, "braking"
        return cmd, "linear"

    def field(mode: str):
        def f(t: float, y: np.ndarray) -> np.ndarray:
            return np.array([y[1], torque(y, mode)[0] / I_d])
        return f

    def recorder(mode: str):
        def rec(t: float, y: np.ndarray) -> None:
            tau, label = torque(y, mode)
            traj.append(t, y[0], y[1], -y[0] / xi, -y[1] / xi, tau, label)
        return rec

    y0 = np.zeros(2)
    first = "pd" if isinstance(controller, PDGains) else "accel"
    recorder(first)(0.0, y0)

    def rest_event(y: np.ndarray) -> float:
        return -y[1]

    if isinstance(controller, PDGains):
        # the event arms only once the rate has exceeded the threshold
        def settled(y: np.ndarray) -> float:
            return settle_rate - y[1]

        t, y, hit = integrate(field("pd"), 0.0, y0, dt, t_max, settled, recorder("pd"), tol)
    else:
        if isinstance(controller, BangBangSchedule):
            t, y, _ = integrate(field("accel"), 0.0, y0, dt, min(controller.t_s, t_max),
                                None, recorder("accel"), tol)
        elif isinstance(controller, EventGuard):
            target = controller.theta_s_tilde * theta_bf

            def guard(y: np.ndarray) -> float:
                return y[0] - target

            t, y, _ = integrate(field("accel"), 0.0, y0, dt, t_max, guard, recorder("accel"), tol)
        else:
            raise TypeError(f"unsupported controller {type(controller).__name__}")
        traj.switch_time = t
        t, y, hit = integrate(field("brake"), t, y, dt, t_max, rest_event, recorder("brake"), tol)
    if hit:
        traj.status = "halted"
        traj.halt_time = t
        traj.halt_angle = float(y[0])
        traj.phase[-1] = "halted"
    return traj


def simulate_pd(p: TemplateParams, gains: PDGains, dt: float | None = None,
                t_max: float | None = None, settle_rate: float | None = None) -> Trajectory:
    """Saturated PD regulation of the body angle to ``theta_bf``."""
    return simulate_template(p, gains, dt, t_max, settle_rate)
