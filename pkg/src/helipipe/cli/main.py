"""Command-line entry point.

Exit codes: 0 all checks passed, 1 a check failed or the run aborted
(CFL violation, constraint blow-up), 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

from ..navier_stokes import CFLError
from .config import (EXPERIMENTS, ConfigError, apply_overrides,
                     default_manifest, load_config)
from .experiments import RUNNERS

_DESCRIPTIONS = {
    "ns-converge": "viscous sweep: difference to the planar run vs sigma",
    "euler-converge": "inviscid sweep: stream-function difference vs sigma",
    "energy-audit": "energy-identity residual along one viscous run",
    "operator-check": "exact operator and projection identities",
    "lift-check": "lift round trip, covariance, scalings, no-swirl",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helipipe",
        description="Sweep harness for the reduced helical flow solvers.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=_DESCRIPTIONS[name])
        p.add_argument("--config", metavar="PATH",
                       help="INI-style run configuration")
        p.add_argument("--out", metavar="DIR", default="out",
                       help="output directory (default: ./out)")
        p.add_argument("--jobs", type=int, metavar="N",
                       help="parallel sweep workers "
                            "(default: HELIX_JOBS or CPU count)")
        p.add_argument("--sigma", metavar="LIST",
                       help="override the sigma list, e.g. '2,4,8'")
    return parser


def resolve_jobs(requested, n_sigmas: int) -> int:
    if requested is None:
        env = os.environ.get("HELIX_JOBS", "").strip()
        if env:
            try:
                requested = int(env)
            except ValueError:
                raise ConfigError(f"HELIX_JOBS={env!r} is not an integer")
        else:
            requested = os.cpu_count() or 1
    if requested < 1:
        raise ConfigError("--jobs must be at least 1")
    return min(requested, max(n_sigmas, 1))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            man = load_config(args.config, args.experiment)
        else:
            man = default_manifest(args.experiment)
        man = apply_overrides(man, args.sigma)
        jobs = resolve_jobs(args.jobs, len(man.sigmas))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    try:
        outcome = RUNNERS[man.experiment](man, args.out, jobs)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (CFLError, RuntimeError, ValueError) as e:
        print(f"run failed: {e}", file=sys.stderr)
        return 1

    for line in outcome.lines:
        print(line)
    print(f"wrote {outcome.csv_path} and {outcome.manifest_path}")
    print("PASS" if outcome.ok else "FAIL")
    return 0 if outcome.ok else 1


if __name__ == "__main__":
    sys.exit(main())
