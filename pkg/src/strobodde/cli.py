"""``avg`` command-line entry point.

    avg convergence --config FILE [--out DIR]
    avg trajectory  --config FILE [--out DIR]
    avg verify      [--config FILE] [--seed N]

Exit status: 0 success, 1 check failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .errors import ConfigError, NonStroboscopic
from .harness import cmd_convergence, cmd_trajectory, cmd_verify

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="avg", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    conv = sub.add_parser("convergence", help="max stroboscopic errors against Omega")
    conv.add_argument("--config", default=None)
    conv.add_argument("--out", default=None)

    traj = sub.add_parser("trajectory", help="long-time trajectories and timings")
    traj.add_argument("--config", default=None)
    traj.add_argument("--out", default=None)

    ver = sub.add_parser("verify", help="algebraic and segmentation identity checks")
    ver.add_argument("--config", default=None)
    ver.add_argument("--seed", type=int, default=None)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    overrides = {"out": getattr(args, "out", None), "seed": getattr(args, "seed", None)}
    try:
        cfg = load_config(args.config, args.command, **overrides)
    except (ConfigError, NonStroboscopic, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "convergence":
        report = cmd_convergence(cfg)
        sys.stdout.write(report.csv_text())
        print(report.summary())
        return EXIT_OK
    if args.command == "trajectory":
        report = cmd_trajectory(cfg)
        for n, d in report.discrepancy.items():
            print(f"max stroboscopic |u - U| order {n}: {d:.3e}")
        sys.stdout.write(report.timing_text())
        return EXIT_OK
    report = cmd_verify(cfg)
    sys.stdout.write(report.text())
    return EXIT_OK if report.passed else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
