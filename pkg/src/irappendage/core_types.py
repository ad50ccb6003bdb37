"""Domain types, unit handling and physical-validity checks.

All quantities are stored in SI units with angles in radians. Every type is
a frozen dataclass, so values can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence


class InvalidParameterError(ValueError):
    """A physical parameter is non-finite, out of range or outside the valid domain."""


class IngestionError(ValueError):
    """A raw record could not be converted to SI units."""


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Stroke:
    """Allowed appendage range of motion.

    Use :meth:`bounded` or :meth:`unbounded`; an unbounded stroke carries no
    numeric value at all.
    """

    angle: float | None = None

    def __post_init__(self) -> None:
        if self.angle is not None:
            _require_finite("stroke", self.angle)
            if self.angle <= 0:
                raise InvalidParameterError(f"stroke must be positive, got {self.angle}")

    @classmethod
    def bounded(cls, angle: float) -> "Stroke":
        return cls(float(angle))

    @classmethod
    def unbounded(cls) -> "Stroke":
        return cls(None)

    @property
    def is_unbounded(self) -> bool:
        return self.angle is None

    def body_limit(self, effectiveness: float) -> float:
        """Largest body rotation the stroke permits, ``xi * s_r`` (inf when unbounded)."""
        if self.angle is None:
            return math.inf
        return effectiveness * self.angle


@dataclass(frozen=True)
class TaskSpec:
    theta_bf: float
    t_f: float

    def __post_init__(self) -> None:
        _require_finite("theta_bf", self.theta_bf)
        _require_finite("t_f", self.t_f)
        if self.theta_bf <= 0:
            raise InvalidParameterError(f"theta_bf must be positive, got {self.theta_bf}")
        if self.t_f <= 0:
            raise InvalidParameterError(f"t_f must be positive, got {self.t_f}")


@dataclass(frozen=True)
class MotorModel:
    """Linear torque-speed motor referred to the appendage joint.

    Parameters
    ----------
    peak_power : float
        Peak mechanical power ``P = tau_m * omega_m / 4`` in W.
    no_load_speed : float
        Appendage-relative no-load speed in rad/s, after the gearbox.
    current_limit_fraction : float
        Fraction ``beta`` of stall torque the drive may deliver.
    """

    peak_power: float
    no_load_speed: float
    current_limit_fraction: float = 1.0

    def __post_init__(self) -> None:
        _require_finite("peak_power", self.peak_power)
        _require_finite("no_load_speed", self.no_load_speed)
        _require_finite("current_limit_fraction", self.current_limit_fraction)
        if self.peak_power <= 0:
            raise InvalidParameterError(f"peak_power must be positive, got {self.peak_power}")
        if self.no_load_speed <= 0:
            raise InvalidParameterError(f"no_load_speed must be positive, got {self.no_load_speed}")
        if not 0 < self.current_limit_fraction <= 1:
            raise InvalidParameterError(
                f"current_limit_fraction must lie in (0, 1], got {self.current_limit_fraction}"
            )

    @property
    def stall_torque(self) -> float:
        return 4.0 * self.peak_power / self.no_load_speed


def torque_bounds(speed_ratio: float, beta: float) -> tuple[float, float]:
    """Available joint torque range in units of stall torque.

    ``speed_ratio`` is the appendage-relative speed divided by the no-load
    speed. Torque that opposes the current motion is only current limited;
    torque along the motion also falls linearly with back-EMF.
    """
    hi = min(beta, 1.0 + speed_ratio) if speed_ratio < 0 else beta
    lo = -min(beta, 1.0 - speed_ratio) if speed_ratio > 0 else -beta
    return lo, hi


@dataclass(frozen=True)
class TemplateParams:
    """Template parameter vector. ``switch_time`` may be ``None`` when it is to be solved for."""

    effectiveness: float
    driven_inertia: float
    stroke: Stroke
    motor: MotorModel
    switch_time: float | None
    task: TaskSpec

    def __post_init__(self) -> None:
        _require_finite("effectiveness", self.effectiveness)
        _require_finite("driven_inertia", self.driven_inertia)
        if not 0 < self.effectiveness <= 1:
            raise InvalidParameterError(f"effectiveness must lie in (0, 1], got {self.effectiveness}")
        if self.driven_inertia <= 0:
            raise InvalidParameterError(f"driven_inertia must be positive, got {self.driven_inertia}")
        if self.switch_time is not None:
            _require_finite("switch_time", self.switch_time)
            if self.switch_time < 0:
                raise InvalidParameterError(f"switch_time must be >= 0, got {self.switch_time}")


def _check_physical(names: Sequence[str], values: Sequence[float], positive: bool) -> None:
    for name, value in zip(names, values):
        _require_finite(name, value)
        if positive and value <= 0:
            raise InvalidParameterError(f"{name} must be positive, got {value}")
        if not positive and value < 0:
            raise InvalidParameterError(f"{name} must be non-negative, got {value}")


@dataclass(frozen=True)
class TailParams:
    m_b: float
    m_t: float
    I_b: float
    I_t: float
    l_b: float
    l_t: float
    stroke: Stroke
    motor: MotorModel
    task: TaskSpec
    switch_time: float | None = None

    def __post_init__(self) -> None:
        _check_physical(("m_b", "m_t"), (self.m_b, self.m_t), positive=True)
        _check_physical(
            ("I_b", "I_t", "l_b", "l_t"), (self.I_b, self.I_t, self.l_b, self.l_t), positive=False
        )

    @property
    def reduced_mass(self) -> float:
        return self.m_b * self.m_t / (self.m_b + self.m_t)


@dataclass(frozen=True)
class WheelParams:
    m_b: float
    m_w: float
    I_b: float
    I_w: float
    l_b: float
    motor: MotorModel
    task: TaskSpec
    stroke: Stroke = field(default_factory=Stroke.unbounded)
    switch_time: float | None = None

    def __post_init__(self) -> None:
        _check_physical(("m_b", "m_w"), (self.m_b, self.m_w), positive=True)
        _check_physical(("I_b", "I_w", "l_b"), (self.I_b, self.I_w, self.l_b), positive=False)

    def as_tail(self) -> TailParams:
        """The equivalent tail with its COM on the pivot."""
        return TailParams(
            m_b=self.m_b, m_t=self.m_w, I_b=self.I_b, I_t=self.I_w, l_b=self.l_b, l_t=0.0,
            stroke=self.stroke, motor=self.motor, task=self.task, switch_time=self.switch_time,
        )


@dataclass(frozen=True)
class Limb:
    offset: float
    phase: int

    def __post_init__(self) -> None:
        _require_finite("offset", self.offset)
        if self.phase not in (-1, 1):
            raise InvalidParameterError(f"limb phase must be +1 or -1, got {self.phase}")


@dataclass(frozen=True)
class LimbParams:
    """Body with ``N`` identical limbs; ``motor.peak_power`` is summed over all limbs."""

    m_b: float
    I_b: float
    limbs: tuple[Limb, ...]
    m_t: float
    I_t: float
    l_t: float
    stroke: Stroke
    motor: MotorModel
    task: TaskSpec
    switch_time: float | None = None

    def __post_init__(self) -> None:
        _check_physical(("m_b", "m_t"), (self.m_b, self.m_t), positive=True)
        _check_physical(("I_b", "I_t", "l_t"), (self.I_b, self.I_t, self.l_t), positive=False)
        if not self.limbs:
            raise InvalidParameterError("at least one limb is required")
        object.__setattr__(self, "limbs", tuple(self.limbs))

    @property
    def total_mass(self) -> float:
        return self.m_b + len(self.limbs) * self.m_t


@dataclass(frozen=True)
class DimensionlessGearing:
    omega_tilde: float
    t_s_tilde: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.omega_tilde) and self.omega_tilde > 0):
            raise InvalidParameterError(f"omega_tilde must be positive, got {self.omega_tilde}")
        if not (math.isfinite(self.t_s_tilde) and self.t_s_tilde >= 0):
            raise InvalidParameterError(f"t_s_tilde must be >= 0, got {self.t_s_tilde}")
        if not 0 < self.beta <= 1:
            raise InvalidParameterError(f"beta must lie in (0, 1], got {self.beta}")


@dataclass(frozen=True)
class DomainVerdict:
    valid: bool
    xi_t: float
    eta: float
    reason: str = ""


def tail_dimensionless(p: TailParams) -> tuple[float, float]:
    """Effectiveness ``xi_t`` and nonlinearity ``eta`` of a tailed body."""
    m_r = p.reduced_mass
    tail = p.I_t + m_r * p.l_t**2
    denom = tail + p.I_b + m_r * p.l_b**2
    if denom <= 0:
        raise InvalidParameterError("total inertia about the pivot must be positive")
    xi_t = tail / denom
    eta = m_r * p.l_b * p.l_t / tail if tail > 0 else 0.0
    return xi_t, eta


def domain_ok(xi_t: float, eta: float) -> bool:
    """True when ``(xi_t, eta)`` lies where the nonlinear tail model is well posed."""
    if not 0 < xi_t <= 1 or eta < 0:
        return False
    if xi_t == 1:
        return eta == 0
    return eta < math.sqrt((1 - xi_t) / xi_t) and 2 * xi_t * eta < 1


def validate_tail_domain(p: TailParams) -> DomainVerdict:
    """Derive ``(xi_t, eta)`` and check the bounds on ``eta``.

    Raises
    ------
    InvalidParameterError
        If a physical field is non-finite or negative (checked on construction)
        or the inertias vanish entirely.
    """
    xi_t, eta = tail_dimensionless(p)
    if domain_ok(xi_t, eta):
        return DomainVerdict(True, xi_t, eta)
    if xi_t <= 0:
        reason = "tail contributes no inertia"
    elif 2 * xi_t * eta >= 1:
        reason = f"2*xi_t*eta = {2 * xi_t * eta:.6g} >= 1"
    else:
        reason = f"eta = {eta:.6g} >= sqrt((1 - xi_t)/xi_t) = {math.sqrt((1 - xi_t) / xi_t):.6g}"
    return DomainVerdict(False, xi_t, eta, reason)


# Unit conversion. Factors map one source unit onto SI.
_UNIT_FACTORS: dict[str, float] = {
    "kg": 1.0,
    "g": 1e-3,
    "m": 1.0,
    "cm": 1e-2,
    "mm": 1e-3,
    "rad": 1.0,
    "deg": math.pi / 180.0,
    "rad/s": 1.0,
    "RPM": 2.0 * math.pi / 60.0,
    "Hz": 2.0 * math.pi,
    "kg*m^2": 1.0,
    "W": 1.0,
    "s": 1.0,
    "1": 1.0,
    "%": 1e-2,
}


def unit_factor(unit: str) -> float:
    try:
        return _UNIT_FACTORS[unit]
    except KeyError:
        raise IngestionError(f"unknown unit tag {unit!r}") from None


def to_si(value: float, unit: str) -> float:
    return value * unit_factor(unit)


def from_si(value: float, unit: str) -> float:
    return value / unit_factor(unit)


def convert_units(raw: dict) -> dict:
    """Convert a record of ``{field: {"value": v, "unit": u}}`` entries to SI.

    Lists of values are converted element-wise. Entries that are not unit
    tagged mappings are passed through unchanged.
    """
    out = {}
    for key, entry in raw.items():
        if isinstance(entry, dict) and "unit" in entry:
            if "value" not in entry:
                raise IngestionError(f"field {key!r} has a unit tag but no value")
            factor = unit_factor(entry["unit"])
            value = entry["value"]
            if isinstance(value, list):
                out[key] = [float(v) * factor for v in value]
            else:
                out[key] = float(value) * factor
        else:
            out[key] = entry
    return out
