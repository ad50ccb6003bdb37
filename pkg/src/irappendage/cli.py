"""Command-line front end. Every subcommand is a thin wrapper over the library."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from .control import (
    BangBangSchedule,
    EventGuard,
    gains_from_dimensionless,
    guard_angle,
    optimal_gain_ratio,
    simulate_template,
)
from .core_types import (
    IngestionError,
    InvalidParameterError,
    MotorModel,
    Stroke,
    TaskSpec,
    TemplateParams,
    convert_units,
)
from .corpus import find_record, load_records, regress
from .design import membership_R
from .gearing import beta_sweep, beta_sweep_csv, critical_switch, optimize_gearing
from .reductions import HALF_SWEEP, Sweep, UnsupportedConfigurationError
from .simulator import error_map, error_map_csv, simulate_tail_phys
from .template import gamma_of, omega_tilde_of

INPUT_ERRORS = (InvalidParameterError, IngestionError, UnsupportedConfigurationError, OSError, KeyError)


class CliError(Exception):
    """Bad command-line input."""


def _clean(value):
    if is_dataclass(value):
        value = asdict(value)
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return float(f"{value:.10g}") if math.isfinite(value) else None
    return value


def dumps(obj) -> str:
    """JSON with floats at 10 significant digits and non-finite values as null."""
    return json.dumps(_clean(obj), indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _stroke_json(stroke: Stroke):
    return None if stroke.is_unbounded else stroke.angle


def cmd_optimize(args) -> int:
    if args.beta_grid is not None:
        start, stop, n = args.beta_grid
        n = int(n)
        if n < 1 or not 0 < start <= 1 or not 0 < stop <= 1:
            raise CliError("--beta-grid needs START and STOP in (0, 1] and N >= 1")
        _emit(beta_sweep_csv(beta_sweep(np.linspace(start, stop, n))), args.out)
        return 0
    c = optimize_gearing(args.beta)
    out = asdict(c)
    out["theta_s_tilde"] = guard_angle(c.omega_tilde_star, c.beta)
    out["gain_ratio_tilde"] = optimal_gain_ratio(c.omega_tilde_star, c.beta)
    _emit(dumps(out), args.out)
    return 0


def _reduction_json(rec) -> dict:
    reduced, dims = rec.reduce()
    out = {
        "name": rec.name,
        "kind": rec.kind,
        "effectiveness": reduced.effectiveness,
        "driven_inertia": reduced.driven_inertia,
        "stroke": _stroke_json(reduced.stroke),
    }
    if dims is not None:
        out.update(xi_t=dims.xi_t, eta=dims.eta, m_r=dims.m_r)
    return out


def cmd_reduce(args) -> int:
    if args.robot:
        result = _reduction_json(find_record(args.robot))
    else:
        recs = load_records(args.file)
        result = [_reduction_json(r) for r in recs.values()]
        if len(result) == 1:
            result = result[0]
    _emit(dumps(result), args.out)
    return 0


def _task(args, rec=None) -> TaskSpec:
    if args.theta_deg is None and args.tf is None and rec is not None:
        return rec.default_task()
    base = rec.default_task() if rec is not None else None
    theta = math.radians(args.theta_deg) if args.theta_deg is not None else base.theta_bf
    t_f = args.tf if args.tf is not None else base.t_f
    return TaskSpec(theta, t_f)


def cmd_simulate(args) -> int:
    rec = find_record(args.robot)
    task = _task(args, rec)
    reduced, _ = rec.reduce(task)
    template = reduced.template()
    gamma = gamma_of(template)
    w = omega_tilde_of(template, gamma)
    beta = template.motor.current_limit_fraction
    if args.controller == "bang":
        controller = BangBangSchedule(critical_switch(w, beta) / gamma)
    elif args.controller == "event":
        controller = EventGuard(guard_angle(w, beta))
    else:
        controller = gains_from_dimensionless(template, args.gain_scale, optimal_gain_ratio(w, beta))
    if rec.kind == "limbs":
        traj = simulate_template(template, controller, dt=args.dt)
    else:
        p = rec.params(task)
        tail = p if rec.kind == "tail" else p.as_tail()
        traj = simulate_tail_phys(tail, controller, dt=args.dt)
    _emit(traj.to_csv(), args.out)
    summary = {"robot": rec.name, "controller": args.controller, "status": traj.status,
               "halt_time": traj.halt_time, "halt_angle": traj.halt_angle,
               "theta_bf": task.theta_bf, "samples": len(traj)}
    sys.stdout.write(dumps(summary))
    return 0


def _template_from_file(path: str, task: TaskSpec) -> TemplateParams:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise IngestionError(f"{path}: malformed JSON ({exc})") from exc
    try:
        si = convert_units(raw)
        stroke = si.get("stroke", "unbounded")
        stroke = Stroke.unbounded() if stroke in (None, "unbounded") else Stroke.bounded(float(stroke))
        motor = MotorModel(float(si["peak_power"]), float(si["no_load_speed"]),
                           float(si.get("current_limit_fraction", 1.0)))
        ts = si.get("switch_time")
        return TemplateParams(float(si["effectiveness"]), float(si["driven_inertia"]), stroke, motor,
                              None if ts is None else float(ts), task)
    except KeyError as exc:
        raise IngestionError(f"{path}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParameterError):
            raise
        raise IngestionError(f"{path}: {exc}") from exc


def cmd_feasible(args) -> int:
    if args.robot:
        rec = find_record(args.robot)
        task = _task(args, rec)
        template = rec.reduce(task)[0].template()
    else:
        if args.theta_deg is None or args.tf is None:
            raise CliError("--theta-deg and --tf are required with --template-params")
        task = TaskSpec(math.radians(args.theta_deg), args.tf)
        template = _template_from_file(args.template_params, task)
    report = membership_R(template)
    out = asdict(report)
    out["limiting"] = list(report.limiting)
    _emit(dumps(out), args.out)
    return 0 if report.overall else 1


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        n, m = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise CliError(f"--grid must look like NxM, got {text!r}") from None
    if n < 1 or m < 1:
        raise CliError("--grid dimensions must be positive")
    return n, m


def cmd_errormap(args) -> int:
    n, m = _parse_grid(args.grid)
    if args.sweep == "half180":
        sweep = HALF_SWEEP
    else:
        if args.stroke_deg is None or args.stroke_deg <= 0:
            raise CliError("--sweep stroke needs a positive --stroke-deg")
        sweep = Sweep(math.radians(args.stroke_deg))
    xi_lo, xi_hi = args.xi_range
    eta_lo, eta_hi = args.eta_range
    if not (0 < xi_lo <= xi_hi <= 1 and 0 <= eta_lo <= eta_hi):
        raise CliError("--xi-range must lie in (0, 1] and --eta-range must be non-negative and ordered")
    rows = error_map(np.linspace(xi_lo, xi_hi, n), np.linspace(eta_lo, eta_hi, m), sweep, dt=args.dt)
    _emit(error_map_csv(rows), args.out)
    return 0


def cmd_regress(args) -> int:
    records = load_records(args.file) if args.file else None
    rows = regress(records, anchoring=not args.no_anchoring)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("robot", "column", "computed", "expected", "criterion", "status"))
    for r in rows:
        writer.writerow((r.robot, r.column, format(r.computed, ".10g"),
                         "" if r.expected is None else format(r.expected, ".10g"),
                         r.criterion, "pass" if r.passed else "FAIL"))
    _emit(buf.getvalue(), args.out)
    return 0 if all(r.passed for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irappendage", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="optimal gearing constants")
    p.add_argument("--beta", type=float, default=1.0, help="current limit fraction")
    p.add_argument("--beta-grid", type=float, nargs=3, metavar=("START", "STOP", "N"),
                   help="write a CSV sweep over N evenly spaced current limits instead")
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("reduce", help="reduce an anchor to template parameters")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--robot")
    g.add_argument("--file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("simulate", help="simulate a corpus robot under a template controller")
    p.add_argument("--robot", required=True)
    p.add_argument("--controller", choices=("bang", "event", "pd"), default="bang")
    p.add_argument("--theta-deg", type=float)
    p.add_argument("--tf", type=float)
    p.add_argument("--gain-scale", type=float, default=1000.0, help="dimensionless proportional gain for pd")
    p.add_argument("--dt", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("feasible", help="check a task against a body")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--robot")
    g.add_argument("--template-params")
    p.add_argument("--theta-deg", type=float)
    p.add_argument("--tf", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_feasible)

    p = sub.add_parser("errormap", help="kinematic and anchoring errors over (xi_t, eta)")
    p.add_argument("--grid", default="10x10")
    p.add_argument("--sweep", choices=("half180", "stroke"), default="half180")
    p.add_argument("--stroke-deg", type=float)
    p.add_argument("--xi-range", type=float, nargs=2, default=(0.1, 0.9))
    p.add_argument("--eta-range", type=float, nargs=2, default=(0.0, 1.0))
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_errormap)

    p = sub.add_parser("regress", help="compare the corpus with computed values")
    p.add_argument("--file")
    p.add_argument("--no-anchoring", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_regress)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, *INPUT_ERRORS) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"error: {msg}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
