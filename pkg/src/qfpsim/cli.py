"""Command-line front end: ``qfpsim <subcommand> [--config cfg.json] [--out dir]``.

Every subcommand writes a CSV whose first line records the SHA-256 of the
validated config, followed by a header row. Errors are reported as one JSON
object on stderr with a nonzero exit status.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from qfpsim.broadband import NyquistQubit, propagate, wavepacket_metrics
from qfpsim.config import ConfigError, RunConfig, build_spec, build_stack, load_config
from qfpsim.engine import (
    GateReport,
    align_eoms,
    drive_fidelity_evaluator,
    evaluate,
    sweep_loss,
    sweep_offset,
    sweep_order,
    sweep_spacing,
)
from qfpsim.eom import ModulatorDrive, optimize_drive, phase_waveform
from qfpsim.shaper import response
from qfpsim.waveguide import db_per_cm_to_alpha

GHZ = 2 * math.pi * 1e9

# (start, stop, steps) used when neither the flags nor the config give a range
DEFAULT_RANGES = {
    "sweep-offset": (-5.0, 5.0, 101),
    "sweep-spacing": (10.0, 60.0, 51),
    "sweep-loss": (0.0, 1.0, 11),
    "sweep-order": (0.2, 5.0, 25),
    "sweep-bandwidth": (0.0, 2.0, 21),
    "optimize-eom": (0.0, 24.0, 13),
}
UNITS = {
    "sweep-offset": "offset_GHz",
    "sweep-spacing": "spacing_GHz",
    "sweep-loss": "loss_dB_per_cm",
    "sweep-order": "spacing_GHz",
}


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


class Output:
    """Writes artifacts for one run into ``directory``."""

    def __init__(self, cfg: RunConfig, directory: Path, svg: bool):
        self.cfg = cfg
        self.dir = directory
        self.svg = svg
        self.written: list[str] = []
        self.dir.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header: Sequence[str], rows, comments: Sequence[str] = ()) -> Path:
        path = self.dir / name
        lines = [f"# config_sha256: {self.cfg.digest()}"]
        lines += [f"# {c}" for c in comments]
        lines.append(",".join(header))
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n")
        self.written.append(str(path))
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self.dir / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.written.append(str(path))
        return path

    def plot(self, name: str, x, series: dict[str, Sequence[float]], xlabel: str) -> None:
        if not self.svg:
            return
        import matplotlib

        matplotlib.use("Agg")
        matplotlib.rcParams["svg.hashsalt"] = "qfpsim"
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        for label, ys in series.items():
            ax.plot(x, ys, label=label)
        ax.set_xlabel(xlabel)
        ax.legend()
        path = self.dir / name
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        self.written.append(str(path))


def _range(args, cfg: RunConfig, command: str) -> np.ndarray:
    sw = cfg.sweep
    if getattr(args, "at", None) is not None:
        return np.array([args.at], dtype=float)
    if args.values is not None:
        return np.array(args.values, dtype=float)
    if sw.values is not None and args.start is None and args.stop is None:
        return np.array(sw.values, dtype=float)
    start, stop, steps = DEFAULT_RANGES[command]
    start = args.start if args.start is not None else (sw.start if sw.start is not None else start)
    stop = args.stop if args.stop is not None else (sw.stop if sw.stop is not None else stop)
    steps = args.steps if args.steps is not None else (sw.steps if sw.steps is not None else steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return np.linspace(start, stop, steps) if steps > 1 else np.array([start], dtype=float)


def _report_rows(reports: Sequence[GateReport], xs) -> list[tuple]:
    return [(x, r.fidelity, r.success_prob, r.success_prob_normalized) for x, r in zip(xs, reports)]


def _w_payload(reports: Sequence[GateReport], xs, unit: str) -> dict:
    return {
        "sweep_variable": unit,
        "points": [
            {
                "sweep_variable": float(x),
                "fidelity": r.fidelity,
                "success_prob": r.success_prob,
                "success_prob_normalized": r.success_prob_normalized,
                "degenerate": r.degenerate,
                "w": [[[float(z.real), float(z.imag)] for z in row] for row in r.w],
            }
            for x, r in zip(xs, reports)
        ],
    }


SWEEP_HEADER = ("sweep_variable", "fidelity", "success_prob", "success_prob_normalized")


def _emit_sweep(out: Output, name: str, reports, xs, unit: str, json_report: bool) -> None:
    out.csv(f"{name}.csv", SWEEP_HEADER, _report_rows(reports, xs), [f"sweep_variable: {unit}"])
    out.plot(
        f"{name}.svg",
        xs,
        {"fidelity": [r.fidelity for r in reports], "P normalized": [r.success_prob_normalized for r in reports]},
        unit,
    )
    if json_report:
        out.json(f"{name}.json", _w_payload(reports, xs, unit))


# ---------------------------------------------------------------- commands


def cmd_shaper_response(args, cfg: RunConfig, out: Output, threads) -> None:
    stack = build_stack(cfg)
    grid = stack.shaper.grid
    center = grid.omega0 + 2.5 * grid.spacing
    half = args.span if args.span is not None else 60.0
    step = args.step if args.step is not None else 0.01
    count = int(round(2 * half / step)) + 1
    f_ghz = -half + step * np.arange(count)
    h = response(stack.shaper, center + f_ghz * GHZ)
    f_abs = (center / GHZ) + f_ghz
    rows = zip(f_abs, np.abs(h) ** 2, np.angle(h))
    out.csv(
        "shaper_response.csv",
        ("f_GHz", "abs_H_sq", "arg_H"),
        rows,
        [f"centre_GHz: {_fmt(center / GHZ)}"],
    )
    out.plot("shaper_response.svg", f_ghz, {"|H|^2": np.abs(h) ** 2}, "detuning from band centre (GHz)")


def cmd_sweep_offset(args, cfg, out, threads) -> None:
    spec = build_spec(cfg)
    stack = align_eoms(build_stack(cfg), spec)
    xs = _range(args, cfg, "sweep-offset")
    reports = sweep_offset(stack, spec, xs * GHZ, threads=threads)
    _emit_sweep(out, "sweep_offset", reports, xs, UNITS["sweep-offset"], args.json or cfg.output.json_report)


def cmd_sweep_spacing(args, cfg, out, threads) -> None:
    spec = build_spec(cfg)
    xs = _range(args, cfg, "sweep-spacing")
    reports = sweep_spacing(build_stack(cfg), spec, xs * GHZ, threads=threads)
    _emit_sweep(out, "sweep_spacing", reports, xs, UNITS["sweep-spacing"], args.json or cfg.output.json_report)


def cmd_sweep_loss(args, cfg, out, threads) -> None:
    spec = build_spec(cfg)
    xs = _range(args, cfg, "sweep-loss")
    alphas = [db_per_cm_to_alpha(x) for x in xs]
    reports = sweep_loss(build_stack(cfg), spec, alphas, threads=threads)
    _emit_sweep(out, "sweep_loss", reports, xs, UNITS["sweep-loss"], args.json or cfg.output.json_report)


def cmd_sweep_order(args, cfg, out, threads) -> None:
    from qfpsim.config import coupling_table

    spec = build_spec(cfg)
    xs = _range(args, cfg, "sweep-order")
    orders = args.orders if args.orders is not None else cfg.sweep.orders
    grid = sweep_order(
        build_stack(cfg), spec, orders, xs * GHZ, ratio_table=coupling_table(cfg), threads=threads
    )
    rows = [
        (n, x, r.fidelity, r.success_prob, r.success_prob_normalized)
        for n in orders
        for x, r in zip(xs, grid[n])
    ]
    out.csv(
        "sweep_order.csv",
        ("order",) + SWEEP_HEADER,
        rows,
        [f"sweep_variable: {UNITS['sweep-order']}", "success_prob_normalized: relative to lowest order at widest spacing"],
    )
    out.plot("sweep_order_fidelity.svg", xs, {f"N={n}": [r.fidelity for r in grid[n]] for n in orders}, "spacing (GHz)")
    out.plot(
        "sweep_order_prob.svg",
        xs,
        {f"N={n}": [r.success_prob_normalized for r in grid[n]] for n in orders},
        "spacing (GHz)",
    )
    if args.json or cfg.output.json_report:
        out.json(
            "sweep_order.json",
            {str(n): _w_payload(grid[n], xs, UNITS["sweep-order"]) for n in orders},
        )


def cmd_sweep_bandwidth(args, cfg, out, threads) -> None:
    spec = build_spec(cfg)
    stack = align_eoms(build_stack(cfg), spec)
    xs = _range(args, cfg, "sweep-bandwidth")
    state = args.state or cfg.sweep.state
    modes = spec.computational_modes[:2]
    rows = []
    for bw in xs:
        qubit = NyquistQubit.named(state, float(bw) * GHZ, modes)
        g, y = propagate(stack, qubit, spec, cfg.sweep.quadrature_points, threads=threads)
        f, p = wavepacket_metrics(g, y)
        rows.append((bw, f, p))
    out.csv("sweep_bandwidth.csv", ("bandwidth_GHz", "F_y", "P_y"), rows, [f"state: {state}"])
    out.plot("sweep_bandwidth.svg", xs, {"F_y": [r[1] for r in rows], "P_y": [r[2] for r in rows]}, "bandwidth (GHz)")


def cmd_optimize_eom(args, cfg, out, threads) -> None:
    e = cfg.eom
    spec = build_spec(cfg)
    # the drive study uses the ideal shaper; log drives need a wider sideband window
    truncation = max(e.truncation, 24)
    template = replace(
        build_stack(cfg.model_copy(update={"shaper": cfg.shaper.model_copy(update={"mode": "ideal"})})),
        truncation=truncation,
        guard_modes=max(e.guard_modes, truncation),
    )
    evaluator = drive_fidelity_evaluator(spec, template)
    xs = _range(args, cfg, "optimize-eom")
    results = optimize_drive(xs, e.a, e.v_0, evaluator, grid_points=args.grid_points)
    out.csv(
        "optimize_eom_bias.csv",
        ("v_dc_V", "v_1_opt_V", "fidelity"),
        results,
        [f"a: {_fmt(e.a)}", f"v_0_V: {_fmt(e.v_0)}", "shaper: ideal"],
    )
    out.plot("optimize_eom_bias.svg", xs, {"1 - F": [max(1 - r[2], 1e-16) for r in results]}, "V_dc (V)")

    v_dc = cfg.sweep.waveform_v_dc
    (_, v1, _), = optimize_drive([v_dc], e.a, e.v_0, evaluator, grid_points=args.grid_points)
    drive = ModulatorDrive("log_voltage", v_dc=v_dc, v_1=v1, a=e.a, v_0=e.v_0)
    t = np.arange(256) / 256
    volts = drive.voltage(t)
    phi = phase_waveform(drive, t)
    # small-signal model evaluated on the same voltage
    phi_lin = e.a / e.v_0 * volts
    out.csv(
        "optimize_eom_waveform.csv",
        ("t_period", "voltage_V", "phi_rad", "phi_linear_rad"),
        zip(t, volts, phi, phi_lin),
        [f"v_dc_V: {_fmt(v_dc)}", f"v_1_V: {_fmt(v1)}"],
    )
    out.plot("optimize_eom_waveform.svg", t, {"log model": phi, "linear": phi_lin}, "t / period")


COMMANDS = {
    "shaper-response": cmd_shaper_response,
    "sweep-offset": cmd_sweep_offset,
    "sweep-spacing": cmd_sweep_spacing,
    "sweep-loss": cmd_sweep_loss,
    "sweep-order": cmd_sweep_order,
    "sweep-bandwidth": cmd_sweep_bandwidth,
    "optimize-eom": cmd_optimize_eom,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfpsim", description="Integrated quantum frequency processor simulator.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration (default: baseline)")
    common.add_argument("--out", type=Path, help="output directory (default: config output.dir)")
    common.add_argument("--svg", action="store_true", help="also write SVG line plots")
    common.add_argument("--threads", type=int, help="worker threads (fallback: QFPSIM_THREADS)")
    common.add_argument("--json", action="store_true", help="also write a JSON report with W entries")

    ranged = argparse.ArgumentParser(add_help=False)
    ranged.add_argument("--start", type=float)
    ranged.add_argument("--stop", type=float)
    ranged.add_argument("--steps", type=int)
    ranged.add_argument("--values", type=float, nargs="+", help="explicit sweep points")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("shaper-response", parents=[common], help="|H|^2 and arg H around the band centre")
    p.add_argument("--span", type=float, help="half-span in GHz (default 60)")
    p.add_argument("--step", type=float, help="step in GHz (default 0.01)")
    p = sub.add_parser("sweep-offset", parents=[common, ranged], help="gate metrics versus comb offset (GHz)")
    p.add_argument("--at", type=float, help="single offset in GHz")
    sub.add_parser("sweep-spacing", parents=[common, ranged], help="gate metrics versus bin spacing (GHz)")
    sub.add_parser("sweep-loss", parents=[common, ranged], help="gate metrics versus loss (dB/cm)")
    p = sub.add_parser("sweep-order", parents=[common, ranged], help="gate metrics versus filter order and spacing")
    p.add_argument("--orders", type=int, nargs="+")
    p = sub.add_parser("sweep-bandwidth", parents=[common, ranged], help="wavepacket metrics versus bandwidth (GHz)")
    p.add_argument("--state", choices=["0", "1", "+", "-", "+i", "-i"])
    p = sub.add_parser("optimize-eom", parents=[common, ranged], help="log-voltage drive optimisation versus bias (V)")
    p.add_argument("--grid-points", type=int, default=16)
    return parser


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("QFPSIM_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"QFPSIM_THREADS must be an integer, got {env!r}") from None
    return None


def _fail(kind: str, message: str, details=None, code: int = 1) -> int:
    payload = {"error": kind, "message": message}
    if details is not None:
        payload["details"] = details
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail("ConfigError", str(exc), [{"path": p, "message": m} for p, m in exc.errors], code=2)
    except OSError as exc:
        return _fail(type(exc).__name__, str(exc), code=2)
    try:
        threads = _threads(args)
        out = Output(cfg, args.out or Path(cfg.output.dir), args.svg or cfg.output.svg)
        COMMANDS[args.command](args, cfg, out, threads)
    except ConfigError as exc:
        return _fail("ConfigError", str(exc), [{"path": p, "message": m} for p, m in exc.errors], code=2)
    except Exception as exc:  # every module error becomes a JSON report
        return _fail(type(exc).__name__, str(exc))
    print(json.dumps({"written": out.written}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
