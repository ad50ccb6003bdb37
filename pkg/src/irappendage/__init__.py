"""Design and analysis of inertial reorientation appendages.

The template is a body and a concentric appendage joined by a motor. Its
bang-bang maneuver has closed-form behaviour, which makes gearing
optimization and task feasibility cheap. Tails, reaction wheels and limbs
reduce onto the template, and the full nonlinear tail dynamics can be
simulated to measure what the reduction misses.
"""

from .control import BangBangSchedule, EventGuard, PDGains, guard_angle, optimal_gain_ratio, simulate_pd
from .core_types import (
    DimensionlessGearing,
    Limb,
    LimbParams,
    MotorModel,
    Stroke,
    TailParams,
    TaskSpec,
    TemplateParams,
    WheelParams,
    convert_units,
    validate_tail_domain,
)
from .gearing import GearingConstants, beta_sweep, constants_at, critical_switch, optimize_gearing
from .reductions import (
    HALF_SWEEP,
    Sweep,
    integrate_connection,
    kinematic_error,
    reduce_limbs,
    reduce_tail,
    reduce_wheel,
    tail_connection,
)
from .simulator import anchoring_errors, error_map, simulate_tail_nd, simulate_tail_phys
from .template import (
    accel_flow,
    braking_flow,
    current_limited_flow,
    g_h_tilde,
    g_h_tilde_beta,
    g_theta_tilde,
    g_theta_tilde_beta,
    gamma_of,
)

__version__ = "0.1.0"

__all__ = [
    "BangBangSchedule",
    "DimensionlessGearing",
    "EventGuard",
    "GearingConstants",
    "HALF_SWEEP",
    "Limb",
    "LimbParams",
    "MotorModel",
    "PDGains",
    "Stroke",
    "Sweep",
    "TailParams",
    "TaskSpec",
    "TemplateParams",
    "WheelParams",
    "accel_flow",
    "anchoring_errors",
    "beta_sweep",
    "braking_flow",
    "constants_at",
    "convert_units",
    "critical_switch",
    "current_limited_flow",
    "error_map",
    "g_h_tilde",
    "g_h_tilde_beta",
    "g_theta_tilde",
    "g_theta_tilde_beta",
    "gamma_of",
    "guard_angle",
    "integrate_connection",
    "kinematic_error",
    "optimal_gain_ratio",
    "optimize_gearing",
    "reduce_limbs",
    "reduce_tail",
    "reduce_wheel",
    "simulate_pd",
    "simulate_tail_nd",
    "simulate_tail_phys",
    "tail_connection",
    "validate_tail_domain",
]
