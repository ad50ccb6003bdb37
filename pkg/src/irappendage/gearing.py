"""Critical switching, gearing optimization and the derived design constants."""

from __future__ import annotations

import csv
import functools
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core_types import InvalidParameterError
from .template import accel_state, g_h_tilde_beta, g_theta_tilde_beta

OMEGA_RANGE = (0.05, 5.0)
COARSE_POINTS = 200


@dataclass(frozen=True)
class GearingConstants:
    """Design constants at one gearing.

    ``k_p = t_h**3 / 4`` scales the power requirement, ``k_t`` is the critical
    switch time and ``k_s = w * t_h`` maps onto the no-load speed.
    """

    beta: float
    omega_tilde_star: float
    t_c_star: float
    t_h_star: float
    k_p: float
    k_t: float
    k_s: float
    switch_fraction: float


@dataclass(frozen=True)
class BetaSweepRow:
    beta: float
    switch_fraction: float
    k_s: float
    k_p: float
    theta_s_tilde: float


def critical_switch(omega_tilde: float, beta: float = 1.0) -> float:
    """Switch time at which the body comes to rest exactly at the target.

    The halting angle grows monotonically with the switch time, so the root
    is bracketed by doubling an upper bound and then refined with Brent's
    method.
    """
    if not omega_tilde > 0:
        raise InvalidParameterError(f"omega_tilde must be positive, got {omega_tilde}")
    if not 0 < beta <= 1:
        raise InvalidParameterError(f"beta must lie in (0, 1], got {beta}")

    def residual(ts: float) -> float:
        return g_theta_tilde_beta(omega_tilde, ts, beta) - 1.0

    hi = 1.0
    while residual(hi) <= 0:
        hi *= 2.0
    return brentq(residual, 0.0, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=500)


def halting_time_at(omega_tilde: float, beta: float = 1.0) -> float:
    """Halting time with critical switching, the quantity minimized over gearing."""
    return g_h_tilde_beta(omega_tilde, critical_switch(omega_tilde, beta), beta)


def constants_at(omega_tilde: float, beta: float = 1.0) -> GearingConstants:
    """Constants for a given, possibly suboptimal, gearing."""
    t_c = critical_switch(omega_tilde, beta)
    t_h = g_h_tilde_beta(omega_tilde, t_c, beta)
    return GearingConstants(
        beta=beta,
        omega_tilde_star=omega_tilde,
        t_c_star=t_c,
        t_h_star=t_h,
        k_p=t_h**3 / 4.0,
        k_t=t_c,
        k_s=omega_tilde * t_h,
        switch_fraction=t_c / t_h,
    )


@functools.lru_cache(maxsize=128)
def optimize_gearing(beta: float = 1.0) -> GearingConstants:
    """Gearing that minimizes the halting time, and its constants.

    A coarse scan over ``OMEGA_RANGE`` locates the basin so a kink in the
    objective cannot trap the golden-section refinement.
    """
    if not 0 < beta <= 1:
        raise InvalidParameterError(f"beta must lie in (0, 1], got {beta}")
    grid = np.linspace(*OMEGA_RANGE, COARSE_POINTS)
    values = np.array([halting_time_at(w, beta) for w in grid])
    i = int(np.argmin(values))
    i = min(max(i, 1), len(grid) - 2)
    res = minimize_scalar(
        halting_time_at,
        bracket=(grid[i - 1], grid[i], grid[i + 1]),
        args=(beta,),
        method="golden",
        options={"xtol": 1e-8},
    )
    return constants_at(float(res.x), beta)


def beta_sweep(betas: Iterable[float]) -> list[BetaSweepRow]:
    """Optimal constants and guard angle for each current-limit fraction."""
    rows = []
    for beta in betas:
        c = optimize_gearing(float(beta))
        theta_s, _ = accel_state(c.omega_tilde_star, c.t_c_star, c.beta)
        rows.append(BetaSweepRow(c.beta, c.switch_fraction, c.k_s, c.k_p, theta_s))
    return rows


def beta_sweep_csv(rows: Sequence[BetaSweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("beta", "switch_fraction", "k_s", "k_p", "theta_s_tilde"))
    for r in rows:
        writer.writerow([format(v, ".10g") for v in (r.beta, r.switch_fraction, r.k_s, r.k_p, r.theta_s_tilde)])
    return buf.getvalue()
