"""Time-indexed simulation results and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

TEMPLATE_COLUMNS = ("t", "theta_b", "theta_b_dot", "tau", "phase")
ANCHOR_COLUMNS = ("t", "theta_b", "theta_b_dot", "theta_r", "theta_r_dot", "tau", "phase")


@dataclass
class Trajectory:
    """Samples of ``(t, theta_b, theta_b_dot, theta_r, theta_r_dot, tau, phase)``.

    ``status`` is ``"halted"`` when the body came to rest and ``"timeout"``
    otherwise. ``model`` selects the CSV layout: template runs omit the
    appendage columns because the appendage angle is slaved to the body.
    """

    model: str
    t: list = field(default_factory=list)
    theta_b: list = field(default_factory=list)
    theta_b_dot: list = field(default_factory=list)
    theta_r: list = field(default_factory=list)
    theta_r_dot: list = field(default_factory=list)
    tau: list = field(default_factory=list)
    phase: list = field(default_factory=list)
    status: str = "timeout"
    halt_time: float | None = None
    halt_angle: float | None = None
    switch_time: float | None = None

    def append(self, t, theta_b, theta_b_dot, theta_r, theta_r_dot, tau, phase) -> None:
        self.t.append(float(t))
        self.theta_b.append(float(theta_b))
        self.theta_b_dot.append(float(theta_b_dot))
        self.theta_r.append(float(theta_r))
        self.theta_r_dot.append(float(theta_r_dot))
        self.tau.append(float(tau))
        self.phase.append(phase)

    def __len__(self) -> int:
        return len(self.t)

    def array(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    def samples(self):
        return zip(self.t, self.theta_b, self.theta_b_dot, self.theta_r,
                   self.theta_r_dot, self.tau, self.phase)

    @property
    def columns(self) -> tuple[str, ...]:
        return TEMPLATE_COLUMNS if self.model == "template" else ANCHOR_COLUMNS

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = self.columns
        writer.writerow(cols)
        for row in self.samples():
            rec = dict(zip(ANCHOR_COLUMNS, row))
            writer.writerow([rec[c] if c == "phase" else format(rec[c], ".10g") for c in cols])
        return buf.getvalue()
