"""
Command line: simulate, verify and sweep.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 blow-up detected, 4 numerical failure.
"""

import argparse
import os
import sys
from typing import List, Optional

import numpy as np

from src.analysis import sweep
from src.coefficients import RegionLabel, classify_region
from src.errors import BeamLabError, InvalidConfigError, OutOfRegionError
from src.pipeline import SimulationPipeline
from src.report_writer import write_run, write_sweep
from src.run_config import RunConfig, load_run_config
from src.verification import SUITES, VerificationRunner


def parse_range(text: str) -> np.ndarray:
    """
    Parse start:stop:count into count evenly spaced values.

    Raises:
        InvalidConfigError: If the text is not start:stop:count with count >= 1
    """
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError(text)
        start, stop, count = float(parts[0]), float(parts[1]), float(parts[2])
        if count < 1 or not count.is_integer():
            raise ValueError(text)
    except ValueError:
        raise InvalidConfigError(f"Range must look like start:stop:count, got {text!r}") from None
    return np.linspace(start, stop, int(count))


def _load(args) -> RunConfig:
    config = load_run_config(args.config)
    overrides = {}
    if args.out:
        overrides["out_dir"] = args.out
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    return config.with_overrides(**overrides) if overrides else config


def cmd_simulate(args) -> int:
    config = _load(args)
    overrides = {k: getattr(args, k) for k in ("alpha", "beta") if getattr(args, k) is not None}
    if overrides:
        config = config.with_overrides(**overrides)

    region = classify_region(config.alpha, config.beta)
    if region is not RegionLabel.OMEGA1 and not args.force:
        raise OutOfRegionError(
            f"(alpha, beta) = ({config.alpha}, {config.beta}) lies in {region.value}, outside "
            f"Omega1 where the decay theorem applies; use --force for an exploratory run")

    print(f"Simulating alpha={config.alpha}, beta={config.beta} ({region.value}), "
          f"mu={config.mu}, p={config.p}, epsilon={config.epsilon}")
    debug_file = os.path.join(config.out_dir, "simulate_debug.txt") if args.debug else None
    if debug_file:
        os.makedirs(config.out_dir, exist_ok=True)
    pipeline = SimulationPipeline(config, debug=args.debug, debug_file=debug_file)
    result = pipeline.run(exploratory=args.force and region is not RegionLabel.OMEGA1)
    written = write_run(result, config.out_dir, config.formats)

    summary = result.summary
    print(f"m* = {summary['m_star']:.6e} (tail spread {summary['tail_spread']:.2e})")
    print(f"Decay slope {summary['slope']:.4f} over s in {summary['fit_window']} "
          f"(r^2 = {summary['r_squared']:.4f}, threshold {summary['slope_threshold']})")
    if summary["exploratory"]:
        print("Exploratory run: no decay claim outside Omega1")
    else:
        print(f"Checks: {'PASS' if summary['passed'] else 'FAIL'} "
              + ", ".join(f"{k}={'ok' if v else 'failed'}" for k, v in summary["checks"].items()))
    print(f"Wrote {len(written)} files to {config.out_dir}")
    return 0


def cmd_verify(args) -> int:
    out_dir = args.out or "output"
    debug_file = None
    if args.debug:
        os.makedirs(out_dir, exist_ok=True)
        debug_file = os.path.join(out_dir, "verify_debug.txt")
    runner = VerificationRunner(debug=args.debug, debug_file=debug_file)
    report = runner.run(args.suite)
    path = runner.write_report(out_dir, args.suite)

    for row in report.itertuples():
        print(f"[{row.suite}] {row.check}: {'PASS' if row.passed else 'FAIL'} {row.note}".rstrip())
    failed = report[~report["passed"]]
    print(f"\n{len(report) - len(failed)}/{len(report)} checks passed; report written to {path}")
    if len(failed):
        print("Failing checks: " + "; ".join(failed["check"]))
        return 1
    return 0


def cmd_sweep(args) -> int:
    config = _load(args)
    alphas = parse_range(args.alpha) if args.alpha else np.array([config.alpha])
    betas = parse_range(args.beta) if args.beta else np.array([config.beta])
    print(f"Sweeping {len(alphas)} x {len(betas)} points with {config.workers} worker(s)")
    frame = sweep(alphas.tolist(), betas.tolist(), config, workers=config.workers)
    write_sweep(frame, config.out_dir, config.formats, config.to_dict())

    for row in frame.itertuples():
        print(f"  ({row.alpha:g}, {row.beta:g}) {row.region}: {row.status}"
              + (f" - {row.note}" if row.note else ""))
    print(f"Wrote sweep map to {config.out_dir}")
    if (frame["status"] == "error").all():
        print("ERROR: every sweep point failed")
        return 4
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Decay of solutions to the damped beam equation with time-dependent coefficients.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    simulate = subparsers.add_parser("simulate", help="Run one configuration and write its results")
    simulate.add_argument("--config", help="Path to a KEY=value run config")
    simulate.add_argument("--out", help="Output directory (overrides out_dir)")
    simulate.add_argument("--alpha", type=float, help="Override alpha")
    simulate.add_argument("--beta", type=float, help="Override beta")
    simulate.add_argument("--force", action="store_true",
                          help="Run outside Omega1 as an exploratory run")
    simulate.add_argument("--debug", action="store_true", help="Print and log step diagnostics")
    simulate.set_defaults(handler=cmd_simulate)

    verify = subparsers.add_parser("verify", help="Run verification suites")
    verify.add_argument("suite", nargs="?", default="all", choices=SUITES + ("all",))
    verify.add_argument("--out", help="Directory for verify_report.json")
    verify.add_argument("--debug", action="store_true", help="Print and log per-check diagnostics")
    verify.set_defaults(handler=cmd_verify)

    sweep_parser = subparsers.add_parser("sweep", help="Run a grid of (alpha, beta) points")
    sweep_parser.add_argument("--config", help="Path to a KEY=value run config")
    sweep_parser.add_argument("--out", help="Output directory (overrides out_dir)")
    sweep_parser.add_argument("--alpha", help="alpha range start:stop:count (use --alpha=-1:1:3)")
    sweep_parser.add_argument("--beta", help="beta range start:stop:count")
    sweep_parser.add_argument("--workers", type=int, help="Worker processes (overrides workers)")
    sweep_parser.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and dispatch to the subcommand.

    Returns:
        int: Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors and 0 on --help
        return int(e.code or 0)
    try:
        return args.handler(args)
    except BeamLabError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return e.exit_code
    except ValueError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return 2
