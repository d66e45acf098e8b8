"""Command-line interface.

    pikfnn [--config PATH] [--out DIR] [--seed N] COMMAND [options]

Commands: fit, predict, sweep, verify, gen-array, gen-sources,
oracle-sphere, synth-field.  Results go to ``--out`` (default ``.``);
diagnostics go to stderr and every failure exits nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import warnings
from pathlib import Path

from ..errors import PikfnnError, SeriesNotConvergedWarning
from ..geometry import sonar_array
from . import io
from .config import RunConfig
from .workflows import (
    analytic_samples,
    fit_command,
    predict_command,
    provide_samples,
    sweep_command,
    synthetic_samples,
    verify_command,
)

logger = logging.getLogger("pikfnn")


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="PATH", default=default, help="flat key = value run configuration")
    parser.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS if suppress else ".", help="output directory")
    parser.add_argument(
        "--seed", metavar="U64", type=int, default=argparse.SUPPRESS if suppress else 0,
        help="seed for synthetic monopole placement",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pikfnn", description="Kernel-network underwater sound field prediction.")
    _global_options(parser, suppress=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="train a network on boundary samples")
    p.add_argument("--samples", metavar="CSV", help="sample file; default uses samples.provider")

    p = sub.add_parser("predict", parents=[common], help="evaluate a trained network")
    p.add_argument("--network", metavar="PATH", required=True)
    p.add_argument("--points", metavar="CSV", help="x_m,y_m,z_m point file; default is the configured grid")

    p = sub.add_parser("sweep", parents=[common], help="fit and probe over a frequency sweep")
    p.add_argument("--samples-dir", metavar="DIR", help="directory holding per-frequency sample files")

    p = sub.add_parser("verify", parents=[common], help="tolerance and sample-count studies")
    p.add_argument("--strict", action="store_true", help="exit nonzero when a check fails")

    sub.add_parser("gen-array", parents=[common], help="write the sonar array points")
    sub.add_parser("gen-sources", parents=[common], help="write the source sphere points")

    for name, helptext in (("oracle-sphere", "pulsating-sphere pressures"), ("synth-field", "synthetic monopole-cloud pressures")):
        p = sub.add_parser(name, parents=[common], help=f"write {helptext} as a sample file")
        p.add_argument("--target", choices=("array", "grid", "probes"), default="array")
        p.add_argument("--points", metavar="CSV", help="evaluate at these points instead of --target")
    return parser


def _target_points(args, config):
    if getattr(args, "points", None):
        return io.load_points(args.points)
    return {"array": lambda: sonar_array(config.array_spec()), "grid": config.grid, "probes": config.probes}[args.target]()


def _num(x) -> str:
    return "n/a" if x is None else f"{x:.3e}"


def run(args) -> int:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    out = Path(args.out)
    cmd = args.command

    if cmd == "fit":
        samples = io.load_samples(args.samples) if args.samples else provide_samples(config, config.context(), args.seed)
        res = fit_command(config, samples, out)
        print(f"network: {res['network']}")
        print(f"iterations: {res['iterations']}  stop: {res['stop_reason']}  final loss: {res['final_loss']:.6e} Pa^2")
        return 0

    if cmd == "predict":
        points = io.load_points(args.points) if args.points else None
        res = predict_command(args.network, config, out, points)
        print(f"field: {res['field']} ({res['rows']} rows)")
        if "grid" in res:
            print(f"grid: {res['grid']}")
        return 0

    if cmd == "sweep":
        res = sweep_command(config, out, args.seed, args.samples_dir)
        print(f"sweep: {res.path} ({len(res.rows)} rows, {len(res.failures)} failed frequencies)")
        for freq, msg in res.failures.items():
            print(f"{freq:g} Hz failed: {msg}", file=sys.stderr)
        return 0 if res.ok else 1

    if cmd == "verify":
        report = verify_command(config)
        path = io.write_text_atomic(out / config["output.report"], json.dumps(report, indent=2) + "\n")
        for cell in report["table1"]:
            print(f"tol={cell['tol']:.0e}  Lrerr={_num(cell['lrerr'])}  iters={cell['iterations']}  stop={cell['stop_reason']}")
        for cell in report["table2"]:
            print(f"N={cell['n']:<4d} Lrerr={_num(cell['lrerr'])}  iters={cell['iterations']}  stop={cell['stop_reason']}")
        for check in report["checks"]:
            print(f"[{'PASS' if check['passed'] else 'FAIL'}] {check['name']}")
        print(f"report: {path}")
        return 1 if args.strict and not report["passed"] else 0

    if cmd == "gen-array":
        print(io.save_points(out / "array.csv", sonar_array(config.array_spec())))
        return 0

    if cmd == "gen-sources":
        print(io.save_points(out / "sources.csv", config.sources()))
        return 0

    if cmd in ("oracle-sphere", "synth-field"):
        points = _target_points(args, config)
        ctx = config.context()
        if cmd == "oracle-sphere":
            samples = analytic_samples(config.updated(environment__variant="unbounded"), ctx, points)
        else:
            samples = synthetic_samples(config, ctx, points, args.seed)
        name = "sphere" if cmd == "oracle-sphere" else "synthetic"
        print(io.save_samples(out / f"{name}_{args.target if not getattr(args, 'points', None) else 'points'}.csv", samples))
        return 0

    raise AssertionError(cmd)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    warnings.simplefilter("default", SeriesNotConvergedWarning)
    started = time.time()
    try:
        status = run(args)
    except (PikfnnError, OSError, ValueError) as exc:
        print(f"pikfnn {args.command}: error: {exc}", file=sys.stderr)
        status = 2
    _write_meta(args, started, status)
    return status


def _write_meta(args, started: float, status: int) -> None:
    # Timestamps live here so result files stay bit-reproducible.
    meta = {
        "command": args.command,
        "started_unix": started,
        "finished_unix": time.time(),
        "exit_status": status,
        "seed": args.seed,
        "config": args.config,
    }
    try:
        io.write_text_atomic(Path(args.out) / "run_meta.json", json.dumps(meta, indent=2) + "\n")
    except OSError as exc:
        print(f"pikfnn: could not write run metadata: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
