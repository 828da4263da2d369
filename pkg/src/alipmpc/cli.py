"""Command-line front end: synthesize orbits, run scenarios, compute metrics.

Exit codes: 0 success (and no fall for `run`), 1 the robot fell,
2 configuration or synthesis error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import NumericalError, OrbitSynthesisError, ScenarioError
from .scenario import parse_scenario
from .sim import metrics, read_csv, run_scenario, write_metrics
from .trajectory import save_orbit

EXIT_OK = 0
EXIT_FELL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="alipmpc",
        description="Stair-climbing pendulum gaits under ankle-torque MPC",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_syn = sub.add_parser("synthesize", help="synthesize and save a periodic orbit")
    p_syn.add_argument("--scenario", required=True, help="scenario file")
    p_syn.add_argument("--out", default=".", help="output directory")

    p_run = sub.add_parser("run", help="run a closed-loop scenario")
    p_run.add_argument("--scenario", required=True, help="scenario file")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")

    p_met = sub.add_parser("metrics", help="summarize an existing CSV log")
    p_met.add_argument("--csv", required=True, help="log produced by `run`")
    p_met.add_argument("--out", default=None,
                       help="directory for the summary file (default stdout only)")
    return parser


def _print_metrics(summary):
    for key, value in summary.items():
        if isinstance(value, bool):
            print(f"{key} = {str(value).lower()}")
        elif isinstance(value, float):
            print(f"{key} = {value:.6g}")
        else:
            print(f"{key} = {value}")


def cmd_synthesize(args) -> int:
    scenario = parse_scenario(args.scenario)
    orbit = scenario.build_orbit()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{scenario.name}.orbit"
    save_orbit(orbit, out_path)
    print(f"orbit written to {out_path}")
    print(f"periodicity residual (rad) = {orbit.residual[0]:.3e}")
    print(f"periodicity residual (kg*m^2/s) = {orbit.residual[1]:.3e}")
    lo, hi = orbit.theta_range()
    print(f"angle range (rad) = [{lo:.4f}, {hi:.4f}]")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = parse_scenario(args.scenario)
    if args.seed is not None:
        scenario.sim.seed = args.seed
    orbit = scenario.build_orbit()
    log = run_scenario(scenario.sim, orbit, scenario.terrain)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{scenario.name}.csv"
    log.to_csv(csv_path)
    summary = metrics(log)
    metrics_path = out_dir / f"{scenario.name}_metrics.txt"
    write_metrics(summary, metrics_path)
    print(f"log written to {csv_path}")
    print(f"metrics written to {metrics_path}")
    _print_metrics(summary)
    return EXIT_FELL if summary["fell"] else EXIT_OK


def cmd_metrics(args) -> int:
    log = read_csv(args.csv)
    summary = metrics(log)
    if args.out is not None:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = Path(args.csv).stem
        write_metrics(summary, out_dir / f"{stem}_metrics.txt")
    _print_metrics(summary)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "synthesize":
            return cmd_synthesize(args)
        if args.command == "run":
            return cmd_run(args)
        return cmd_metrics(args)
    except (ScenarioError, OrbitSynthesisError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
