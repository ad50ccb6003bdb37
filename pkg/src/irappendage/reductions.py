"""Maps from tail, wheel and limb morphologies onto the template.

Angular momentum about the pivot is zero throughout a maneuver, which ties
the body rate to the appendage rate through a connection field. For a
tail the connection depends on the joint angle via the nonlinearity
parameter ``eta``; wheels have a constant connection and limbs with the
right symmetry do too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core_types import (
    InvalidParameterError,
    LimbParams,
    MotorModel,
    Stroke,
    TailParams,
    TaskSpec,
    TemplateParams,
    WheelParams,
    validate_tail_domain,
)

XI_STRATEGIES = ("constant", "at_180", "stroke_average")


class UnsupportedConfigurationError(ValueError):
    """Limb layout that does not decouple into a constant connection."""


@dataclass(frozen=True)
class TailDimensionless:
    xi_t: float
    eta: float
    m_r: float


@dataclass(frozen=True)
class ReducedTemplate:
    effectiveness: float
    driven_inertia: float
    stroke: Stroke
    motor: MotorModel
    task: TaskSpec
    switch_time: float | None = None

    def template(self) -> TemplateParams:
        return TemplateParams(self.effectiveness, self.driven_inertia, self.stroke,
                              self.motor, self.switch_time, self.task)


@dataclass(frozen=True)
class Sweep:
    """Appendage sweep of width ``stroke`` centered on ``center`` (rad)."""

    stroke: float
    center: float = math.pi

    @property
    def bounds(self) -> tuple[float, float]:
        return self.center - 0.5 * self.stroke, self.center + 0.5 * self.stroke


HALF_SWEEP = Sweep(math.pi)


def tail_connection(xi_t: float, eta: float, theta_r: float) -> float:
    """Body rotation per unit joint rotation, ``d theta_b / d theta_r``."""
    c = math.cos(theta_r)
    return -xi_t * (1.0 - eta * c) / (1.0 - 2.0 * xi_t * eta * c)


def tail_connection_physical(p: TailParams, theta_r: float) -> float:
    """The same connection evaluated directly from the physical parameters."""
    m_r = p.reduced_mass
    c = math.cos(theta_r)
    num = p.I_t + m_r * (p.l_t**2 - p.l_b * p.l_t * c)
    den = p.I_b + p.I_t + m_r * (p.l_t**2 + p.l_b**2 - 2.0 * p.l_b * p.l_t * c)
    return -num / den


def _unwrapped_arctan(k: float, theta: float) -> float:
    """Continuous branch of ``arctan(k tan(theta/2))``.

    The principal branch jumps by ``-pi`` at every ``theta = pi + 2 n pi``;
    counting those crossings and adding ``pi`` for each keeps it continuous.
    """
    half = 0.5 * theta
    crossings = math.floor((theta + math.pi) / (2.0 * math.pi))
    base = math.atan(k * math.tan(half))
    # at a singularity itself use the limit from below
    if math.isclose(math.cos(half), 0.0, abs_tol=1e-15):
        return (crossings - 0.5) * math.pi
    return base + crossings * math.pi


def integrate_connection(xi_t: float, eta: float, theta_r1: float, theta_r2: float) -> float:
    """Body rotation while the joint moves from ``theta_r1`` to ``theta_r2``."""
    if 2.0 * xi_t * eta >= 1.0:
        raise InvalidParameterError(f"2*xi_t*eta = {2 * xi_t * eta} must be below 1")
    q = 2.0 * xi_t * eta
    k = math.sqrt((1.0 + q) / (1.0 - q))
    scale = (1.0 - 2.0 * xi_t) / math.sqrt(1.0 - q * q)
    d_r = theta_r2 - theta_r1
    return -0.5 * d_r + scale * (_unwrapped_arctan(k, theta_r2) - _unwrapped_arctan(k, theta_r1))


def kinematic_error(xi_t: float, eta: float, sweep: Sweep = HALF_SWEEP) -> float:
    """Relative body-rotation error of the constant-``xi_t`` approximation."""
    lo, hi = sweep.bounds
    theta_bf = abs(integrate_connection(xi_t, eta, lo, hi))
    if theta_bf == 0.0:
        raise ZeroDivisionError("the sweep produces no body rotation")
    return (theta_bf - xi_t * sweep.stroke) / theta_bf


def _base_inertia(p: TailParams) -> float:
    return p.I_b + p.reduced_mass * p.l_b**2


def driven_inertia_profile(p: TailParams, theta_r: float) -> float:
    """Configuration-dependent ratio of joint torque to body acceleration."""
    verdict = validate_tail_domain(p)
    if not verdict.valid:
        raise InvalidParameterError(verdict.reason)
    xi, eta = verdict.xi_t, verdict.eta
    c = math.cos(theta_r)
    b = _base_inertia(p)
    if eta == 0.0:
        return b
    return b * (1.0 - eta * eta * xi / (1.0 - xi) * c * c) / (1.0 - eta * c)


def averaged_driven_inertia(p: TailParams) -> float:
    """Mean of the ``xi_t = 0.5`` inertia profile over a half sweep, ``B (1 - 2 eta / pi)``."""
    eta = validate_tail_domain(p).eta
    return _base_inertia(p) * (1.0 - 2.0 * eta / math.pi)


def effectiveness_strategy(xi_t: float, eta: float, strategy: str, stroke: Stroke | None = None) -> float:
    """Effectiveness under one of ``XI_STRATEGIES``.

    ``constant`` ignores ``eta``; ``at_180`` evaluates the connection with the
    tail opposite the body; ``stroke_average`` divides the exact rotation of a
    stroke centered there by the stroke.
    """
    if strategy == "constant":
        return xi_t
    if strategy == "at_180":
        return -tail_connection(xi_t, eta, math.pi)
    if strategy == "stroke_average":
        if stroke is None or stroke.is_unbounded:
            raise InvalidParameterError("stroke averaging needs a bounded stroke")
        s = Sweep(stroke.angle)
        lo, hi = s.bounds
        return abs(integrate_connection(xi_t, eta, lo, hi)) / stroke.angle
    raise InvalidParameterError(f"unknown effectiveness strategy {strategy!r}")


def reduce_tail(p: TailParams, xi_strategy: str = "constant") -> tuple[ReducedTemplate, TailDimensionless]:
    """Template parameters for a tailed body."""
    verdict = validate_tail_domain(p)
    if not verdict.valid:
        raise InvalidParameterError(f"tail outside valid domain: {verdict.reason}")
    dims = TailDimensionless(verdict.xi_t, verdict.eta, p.reduced_mass)
    xi = effectiveness_strategy(dims.xi_t, dims.eta, xi_strategy, p.stroke)
    reduced = ReducedTemplate(xi, averaged_driven_inertia(p), p.stroke, p.motor, p.task, p.switch_time)
    return reduced, dims


def reduce_wheel(p: WheelParams) -> ReducedTemplate:
    """Template parameters for a body with a reaction wheel; the mapping is exact."""
    m_r = p.m_b * p.m_w / (p.m_b + p.m_w)
    base = p.I_b + m_r * p.l_b**2
    xi = p.I_w / (p.I_w + base)
    return ReducedTemplate(xi, base, p.stroke, p.motor, p.task, p.switch_time)


def check_limb_independence(p: LimbParams) -> bool:
    """Whether the limb layout gives a configuration-independent connection."""
    m_tot = p.total_mass
    c = -sum(p.m_t * limb.phase * p.l_t for limb in p.limbs) / m_tot
    total = sum(p.m_t * limb.offset * (c + limb.phase * p.l_t) for limb in p.limbs)
    scale = max(p.m_t * max(abs(limb.offset) for limb in p.limbs) * (abs(c) + p.l_t), 1e-300)
    return abs(total) <= 1e-12 * scale


def limb_phasing(p: LimbParams) -> str:
    """``in_phase`` or ``anti_phase``; anything else is unsupported."""
    n = len(p.limbs)
    s = sum(limb.phase for limb in p.limbs)
    if abs(s) == n:
        return "in_phase"
    if s == 0:
        return "anti_phase"
    raise UnsupportedConfigurationError(
        f"limb phases sum to {s}; only all-equal or balanced phasing is supported"
    )


def reduce_limbs(p: LimbParams) -> ReducedTemplate:
    """Template parameters for ``N`` identical limbs.

    In-phase limbs couple through the reduced mass ``m_b m_t / m_tot``;
    balanced anti-phase limbs leave the system COM fixed and couple through
    the full limb mass.
    """
    offsets = [limb.offset for limb in p.limbs]
    moment = sum(p.m_t * x for x in offsets)
    if abs(moment) > 1e-12 * p.m_t * max(1e-300, max(abs(x) for x in offsets)) * len(offsets):
        raise UnsupportedConfigurationError(f"limb pivots are not mass balanced (sum m*l = {moment:.6g})")
    phasing = limb_phasing(p)
    if not check_limb_independence(p):
        raise UnsupportedConfigurationError("limb layout violates the configuration-independence criterion")
    n = len(p.limbs)
    m_k = p.m_t if phasing == "anti_phase" else p.m_b * p.m_t / p.total_mass
    rotating = p.I_b + p.m_t * sum(x * x for x in offsets)
    limb_term = n * (p.I_t + m_k * p.l_t**2)
    xi = limb_term / (rotating + limb_term)
    return ReducedTemplate(xi, rotating, p.stroke, p.motor, p.task, p.switch_time)
