"""Task feasibility, task-space projection, tail selection and scaling."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Sequence

from .core_types import InvalidParameterError, MotorModel, Stroke, TailParams, TaskSpec, TemplateParams
from .gearing import critical_switch, optimize_gearing
from .reductions import ReducedTemplate, TailDimensionless, reduce_tail
from .template import g_h_tilde_beta, g_theta_tilde_beta, gamma_of, omega_tilde_of

REL_TOL = 1e-9
ANGLE_TOL = 1e-6


@dataclass(frozen=True)
class FeasibilityReport:
    stroke_ok: bool
    stroke_margin: float
    time_ok: bool
    time_margin: float
    angle_ok: bool
    angle_residual: float
    overall: bool
    limiting: tuple[str, ...]
    switch_time: float | None = None
    no_load_speed: float | None = None


@dataclass(frozen=True)
class DesignSolution:
    feasible: bool
    binding: tuple[str, ...]
    xi_required: float
    l_t: float | None
    tail: TailParams | None
    reduced: ReducedTemplate | None
    dims: TailDimensionless | None
    min_power: float | None
    no_load_speed: float | None
    k_p: float


@dataclass(frozen=True)
class ProjectionRow:
    t_f: float
    theta_max: float
    limiting: str


def _report(stroke_margin, time_margin, angle_residual, t_f, theta_bf, ts=None, w_m=None):
    stroke_ok = stroke_margin >= -REL_TOL * theta_bf
    time_ok = time_margin >= -REL_TOL * t_f
    angle_ok = abs(angle_residual) <= ANGLE_TOL * theta_bf
    limiting = tuple(name for name, ok in (("stroke", stroke_ok), ("time", time_ok), ("angle", angle_ok)) if not ok)
    return FeasibilityReport(stroke_ok, stroke_margin, time_ok, time_margin, angle_ok, angle_residual,
                             stroke_ok and time_ok and angle_ok, limiting, ts, w_m)


def membership_R(p: TemplateParams) -> FeasibilityReport:
    """Check the stroke, time and angle constraints for fully specified template parameters.

    Without a switch time the angle constraint is read as "some switch time
    reaches the target", and the critical switch is used for the time check.
    """
    xi, theta_bf, t_f = p.effectiveness, p.task.theta_bf, p.task.t_f
    beta = p.motor.current_limit_fraction
    stroke_margin = p.stroke.body_limit(xi) - theta_bf
    gamma = gamma_of(p)
    w = omega_tilde_of(p, gamma)
    if p.switch_time is None:
        ts_tilde = critical_switch(w, beta)
        residual = 0.0
    else:
        ts_tilde = gamma * p.switch_time
        residual = theta_bf - theta_bf * g_theta_tilde_beta(w, ts_tilde, beta)
    time_margin = t_f - g_h_tilde_beta(w, ts_tilde, beta) / gamma
    return _report(stroke_margin, time_margin, residual, t_f, theta_bf, ts_tilde / gamma, p.motor.no_load_speed)


def minimum_power(effectiveness: float, driven_inertia: float, task: TaskSpec, k_p: float | None = None) -> float:
    """Smallest peak power meeting the task, ``k_p theta_bf**2 I_d / (xi t_f**3)``."""
    if k_p is None:
        k_p = optimize_gearing(1.0).k_p
    return k_p * task.theta_bf**2 * driven_inertia / (effectiveness * task.t_f**3)


def membership_Rstar(
    effectiveness: float,
    driven_inertia: float,
    stroke: Stroke,
    peak_power: float,
    task: TaskSpec,
    beta: float = 1.0,
) -> FeasibilityReport:
    """Feasibility when gearing and switch time are slaved to their optimal values.

    The report carries the slaved no-load speed ``k_s theta_bf / (xi t_f)``
    and switch time ``k_t / gamma``.
    """
    c = optimize_gearing(beta)
    xi, theta_bf, t_f = effectiveness, task.theta_bf, task.t_f
    gamma = (4.0 * peak_power * xi / (driven_inertia * theta_bf**2)) ** (1.0 / 3.0)
    w_m = c.k_s * theta_bf / (xi * t_f)
    ts = c.k_t / gamma
    stroke_margin = stroke.body_limit(xi) - theta_bf
    time_margin = t_f - c.t_h_star / gamma
    return _report(stroke_margin, time_margin, 0.0, t_f, theta_bf, ts, w_m)


def slaved_template(
    effectiveness: float,
    driven_inertia: float,
    stroke: Stroke,
    peak_power: float,
    task: TaskSpec,
    beta: float = 1.0,
) -> TemplateParams:
    """Template parameters geared at the optimum for the given power.

    The no-load speed keeps ``w~ = w~*`` at the actual rescale factor,
    ``omega_m = w~* gamma theta_bf / xi``, and the switch is ``k_t / gamma``,
    so the maneuver lands on ``theta_bf`` for any power. At the equality
    power this coincides with the slaved values of :func:`membership_Rstar`.
    """
    c = optimize_gearing(beta)
    gamma = (4.0 * peak_power * effectiveness / (driven_inertia * task.theta_bf**2)) ** (1.0 / 3.0)
    w_m = c.omega_tilde_star * gamma * task.theta_bf / effectiveness
    motor = MotorModel(peak_power, w_m, beta)
    return TemplateParams(effectiveness, driven_inertia, stroke, motor, c.k_t / gamma, task)


def _reachable(xi, I_d, P, w_m, beta, theta, t_f) -> bool:
    gamma = (4.0 * P * xi / (I_d * theta**2)) ** (1.0 / 3.0)
    w = xi * w_m / (gamma * theta)
    t_h = g_h_tilde_beta(w, critical_switch(w, beta), beta) / gamma
    return t_h <= t_f


def task_projection(
    effectiveness: float,
    driven_inertia: float,
    peak_power: float,
    stroke: Stroke,
    no_load_speed: float,
    t_f_values: Sequence[float],
    beta: float = 1.0,
    tol: float = 1e-6,
) -> list[ProjectionRow]:
    """Largest reachable body rotation for each allowed time, at a fixed body and motor.

    The switch time is free to vary with the task. Feasibility shrinks
    monotonically with the target angle, so each boundary point is found
    by bisection on the angle.
    """
    rows = []
    args = (effectiveness, driven_inertia, peak_power, no_load_speed, beta)
    limit = stroke.body_limit(effectiveness)
    for t_f in t_f_values:
        if t_f <= 0:
            raise InvalidParameterError(f"t_f must be positive, got {t_f}")
        if math.isfinite(limit) and _reachable(*args, limit, t_f):
            rows.append(ProjectionRow(float(t_f), limit, "stroke"))
            continue
        lo, hi = 0.0, limit if math.isfinite(limit) else 1.0
        while not math.isfinite(limit) and _reachable(*args, hi, t_f):
            lo, hi = hi, 2.0 * hi
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _reachable(*args, mid, t_f):
                lo = mid
            else:
                hi = mid
        rows.append(ProjectionRow(float(t_f), lo, "time"))
    return rows


def projection_csv(rows: Sequence[ProjectionRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("t_f", "theta_max_rad", "limiting_constraint"))
    for r in rows:
        writer.writerow((format(r.t_f, ".10g"), format(r.theta_max, ".10g"), r.limiting))
    return buf.getvalue()


def select_tail_body(
    task: TaskSpec,
    m_b: float,
    I_b: float,
    m_t: float,
    l_b: float,
    stroke: Stroke,
    I_t: float = 0.0,
    beta: float = 1.0,
) -> DesignSolution:
    """Shortest tail within the mass cap ``m_t`` whose effectiveness covers the task within the stroke.

    The required effectiveness is ``theta_bf / s_r``; inverting the
    effectiveness of the tail for ``l_t`` gives the minimal length, and the
    optimal power constant gives the minimal power and no-load speed.
    """
    c = optimize_gearing(beta)
    if stroke.is_unbounded:
        raise InvalidParameterError("tail selection needs a bounded stroke")
    xi_req = task.theta_bf / stroke.angle
    if xi_req >= 1.0:
        return DesignSolution(False, ("stroke",), xi_req, None, None, None, None, None, None, c.k_p)
    m_r = m_b * m_t / (m_b + m_t)
    num = xi_req * (I_b + I_t + m_r * l_b**2) - I_t
    if num <= 0:
        l_t = 0.0
    else:
        l_t = math.sqrt(num / (m_r * (1.0 - xi_req)))
    placeholder = MotorModel(1.0, 1.0, beta)
    tail = TailParams(m_b, m_t, I_b, I_t, l_b, l_t, stroke, placeholder, task)
    reduced, dims = reduce_tail(tail)
    xi = reduced.effectiveness
    power = minimum_power(xi, reduced.driven_inertia, task, c.k_p)
    w_m = c.k_s * task.theta_bf / (xi * task.t_f)
    tail = replace(tail, motor=MotorModel(power, w_m, beta))
    reduced, dims = reduce_tail(tail)
    return DesignSolution(True, ("stroke", "time"), xi_req, l_t, tail, reduced, dims, power, w_m, c.k_p)


def power_density_scaling(length_ratio: float) -> float:
    """Change in required power per unit mass when all lengths scale by ``length_ratio``.

    Under dynamic similarity ``t_f`` grows as the square root of length, so
    ``P/m ~ I_d / (t_f**3 m) ~ L**5 / (L**1.5 L**3)``.
    """
    if not length_ratio > 0:
        raise InvalidParameterError(f"length_ratio must be positive, got {length_ratio}")
    return math.sqrt(length_ratio)
