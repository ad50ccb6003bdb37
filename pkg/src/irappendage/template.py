"""Closed-form behaviour of the switched template, dimensioned and dimensionless.

Dimensionless time is ``t~ = gamma * t`` and body angle is ``theta~ = theta_b / theta_bf``.
Under a bang-bang command the body accelerates with back-EMF limited torque,
``theta~'' = (1/w)(1 - theta~'/w)``, then brakes at ``theta~'' = -beta/w`` where
``w`` is the dimensionless no-load speed. With a current limit ``beta < 1``
the acceleration phase starts with a constant-torque segment that lasts
until ``t~_l = (1 - beta)/beta * w**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core_types import InvalidParameterError, TemplateParams

PHASES = ("current_limited_accel", "voltage_limited_accel", "braking", "halted")


@dataclass(frozen=True)
class PhaseFlowState:
    theta_tilde: float
    theta_tilde_prime: float
    t_tilde: float
    phase: str


def _one_minus_exp(x: float) -> float:
    return -math.expm1(-x)


def _ramp_gap(x: float) -> float:
    """``x - (1 - exp(-x))`` without cancellation for small ``x``."""
    if abs(x) < 1e-3:
        return x * x * (0.5 - x * (1 / 6 - x * (1 / 24 - x / 120)))
    return x + math.expm1(-x)


def _check_beta(beta: float) -> None:
    if not 0 < beta <= 1:
        raise InvalidParameterError(f"beta must lie in (0, 1], got {beta}")


def gamma_of(p: TemplateParams) -> float:
    """Rescale factor ``(4 P xi / (I_d theta_bf**2))**(1/3)`` in 1/s."""
    return (
        4.0 * p.motor.peak_power * p.effectiveness
        / (p.driven_inertia * p.task.theta_bf**2)
    ) ** (1.0 / 3.0)


def omega_tilde_of(p: TemplateParams, gamma: float | None = None) -> float:
    """Dimensionless no-load speed ``xi * omega_m / (gamma * theta_bf)``."""
    if gamma is None:
        gamma = gamma_of(p)
    return p.effectiveness * p.motor.no_load_speed / (gamma * p.task.theta_bf)


def accel_flow(omega_tilde: float, t_tilde: float) -> tuple[float, float]:
    """Body angle and rate after ``t_tilde`` of full-voltage acceleration from rest."""
    w = omega_tilde
    x = t_tilde / (w * w)
    return w**3 * _ramp_gap(x), w * _one_minus_exp(x)


def transition_time(omega_tilde: float, beta: float) -> float:
    """Time at which the current limit stops binding, ``(1 - beta)/beta * w**2``."""
    _check_beta(beta)
    return (1.0 - beta) / beta * omega_tilde**2


def accel_state(omega_tilde: float, t_tilde: float, beta: float = 1.0) -> tuple[float, float]:
    """Acceleration-phase state with a current limit ``beta``."""
    w = omega_tilde
    t_l = transition_time(w, beta)
    if t_tilde <= t_l:
        return beta * t_tilde**2 / (2.0 * w), beta * t_tilde / w
    d = t_tilde - t_l
    x = d / (w * w)
    th_l = (1.0 - beta) ** 2 / (2.0 * beta) * w**3
    # split so the small-d limit keeps full precision
    th = th_l + w * (1.0 - beta) * d + beta * w**3 * _ramp_gap(x)
    thp = w * (1.0 - beta) + beta * w * _one_minus_exp(x)
    return th, thp


def braking_flow(
    omega_tilde: float, t_s_tilde: float, t_tilde: float, beta: float = 1.0
) -> tuple[float, float]:
    """Constant deceleration ``-beta/w`` continuing the acceleration flow from ``t_s``."""
    if t_tilde < t_s_tilde:
        raise InvalidParameterError(f"t_tilde={t_tilde} precedes the switch at {t_s_tilde}")
    th_s, thp_s = accel_state(omega_tilde, t_s_tilde, beta)
    d = t_tilde - t_s_tilde
    a = beta / omega_tilde
    return th_s + thp_s * d - 0.5 * a * d * d, thp_s - a * d


def g_theta_tilde(omega_tilde: float, t_s_tilde: float) -> float:
    """Halting angle ``w t_s - (w**3/2)(1 - exp(-2 t_s / w**2))``."""
    w = omega_tilde
    return 0.5 * w**3 * _ramp_gap(2.0 * t_s_tilde / (w * w))


def g_h_tilde(omega_tilde: float, t_s_tilde: float) -> float:
    """Halting time ``t_s + w**2 (1 - exp(-t_s / w**2))``."""
    w = omega_tilde
    return t_s_tilde + w * w * _one_minus_exp(t_s_tilde / (w * w))


def g_theta_tilde_beta(omega_tilde: float, t_s_tilde: float, beta: float) -> float:
    """Halting angle under a current limit.

    Composed as the switch state plus the braking distance
    ``theta~(t_s) + (w / 2 beta) theta~'(t_s)**2``. When ``t_s`` falls inside
    the constant-torque segment this reduces to ``beta t_s**2 / w``.
    """
    _check_beta(beta)
    th, thp = accel_state(omega_tilde, t_s_tilde, beta)
    return th + omega_tilde / (2.0 * beta) * thp * thp


def g_h_tilde_beta(omega_tilde: float, t_s_tilde: float, beta: float) -> float:
    """Halting time under a current limit; ``2 t_s`` inside the constant-torque segment."""
    _check_beta(beta)
    _, thp = accel_state(omega_tilde, t_s_tilde, beta)
    return t_s_tilde + omega_tilde / beta * thp


def _dimensionless_point(p: TemplateParams) -> tuple[float, float, float]:
    if p.switch_time is None:
        raise InvalidParameterError("switch_time is required for halting-state evaluation")
    gamma = gamma_of(p)
    return gamma, omega_tilde_of(p, gamma), gamma * p.switch_time


def g_theta_phys(p: TemplateParams) -> float:
    """Body angle at rest after the bang-bang maneuver, in rad."""
    _, w, ts = _dimensionless_point(p)
    return p.task.theta_bf * g_theta_tilde_beta(w, ts, p.motor.current_limit_fraction)


def g_h_phys(p: TemplateParams) -> float:
    """Halting time of the bang-bang maneuver, in s."""
    gamma, w, ts = _dimensionless_point(p)
    return g_h_tilde_beta(w, ts, p.motor.current_limit_fraction) / gamma


def current_limited_flow(
    omega_tilde: float, beta: float, t_tilde: float, t_s_tilde: float | None = None
) -> PhaseFlowState:
    """Three-phase flow at ``t_tilde``.

    Without ``t_s_tilde`` the motor never switches and the flow stays in the
    acceleration phases. After halting the state is held at rest.
    """
    _check_beta(beta)
    if t_tilde < 0:
        raise InvalidParameterError(f"t_tilde must be >= 0, got {t_tilde}")
    w = omega_tilde
    if t_s_tilde is None or t_tilde < t_s_tilde:
        th, thp = accel_state(w, t_tilde, beta)
        phase = "current_limited_accel" if t_tilde < transition_time(w, beta) else "voltage_limited_accel"
        return PhaseFlowState(th, thp, t_tilde, phase)
    t_h = g_h_tilde_beta(w, t_s_tilde, beta)
    if t_tilde >= t_h:
        return PhaseFlowState(g_theta_tilde_beta(w, t_s_tilde, beta), 0.0, t_tilde, "halted")
    th, thp = braking_flow(w, t_s_tilde, t_tilde, beta)
    return PhaseFlowState(th, thp, t_tilde, "braking")
