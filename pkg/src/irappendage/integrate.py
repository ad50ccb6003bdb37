"""Fixed-step RK4 with cubic Hermite dense output and event location."""

from __future__ import annotations

from typing import Callable

import numpy as np

Field = Callable[[float, np.ndarray], np.ndarray]


def rk4_step(f: Field, t: float, y: np.ndarray, h: float, k1: np.ndarray | None = None) -> np.ndarray:
    if k1 is None:
        k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def hermite(y0, f0, y1, f1, h: float, s):
    """Cubic Hermite interpolant on a step of length ``h`` at fraction ``s``."""
    s2 = s * s
    s3 = s2 * s
    return (
        (2 * s3 - 3 * s2 + 1) * y0
        + (s3 - 2 * s2 + s) * h * f0
        + (3 * s2 - 2 * s3) * y1
        + (s3 - s2) * h * f1
    )


def locate(g: Callable[[float], float], h: float, tol: float) -> float:
    """Bisect for the sign change of ``g`` on ``[0, h]`` with ``g(0) < 0 <= g(h)``."""
    lo, hi = 0.0, h
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return hi


def integrate(
    f: Field,
    t0: float,
    y0: np.ndarray,
    dt: float,
    t_end: float,
    event: Callable[[np.ndarray], float] | None = None,
    on_sample: Callable[[float, np.ndarray], None] | None = None,
    tol: float = 1e-10,
) -> tuple[float, np.ndarray, bool]:
    """Integrate until ``t_end`` or until ``event`` rises through zero.

    The final step is shortened so a fixed end time is hit exactly. When the
    event fires inside a step its time is found by bisection on the Hermite
    interpolant of that step, and the interpolated state is returned.
    ``on_sample`` sees every accepted state except the starting one.
    """
    t, y = t0, np.asarray(y0, dtype=float)
    k = f(t, y)
    g_prev = event(y) if event is not None else None
    n = max(1, int(np.ceil((t_end - t0) / dt - 1e-9))) if np.isfinite(t_end) else None
    h = (t_end - t0) / n if n is not None else dt
    i = 0
    while n is None or i < n:
        y_new = rk4_step(f, t, y, h, k)
        t_new = t0 + (i + 1) * h if n is not None else t + h
        k_new = f(t_new, y_new)
        if event is not None:
            g_new = event(y_new)
            if g_prev < 0 <= g_new:
                y_a, k_a, t_a = y, k, t

                def g_at(s: float) -> float:
                    return event(hermite(y_a, k_a, y_new, k_new, h, s / h))

                s = locate(g_at, h, tol)
                y_ev = hermite(y_a, k_a, y_new, k_new, h, s / h)
                if on_sample is not None:
                    on_sample(t_a + s, y_ev)
                return t_a + s, y_ev, True
            g_prev = g_new
        t, y, k = t_new, y_new, k_new
        if on_sample is not None:
            on_sample(t, y)
        i += 1
    return t, y, False
