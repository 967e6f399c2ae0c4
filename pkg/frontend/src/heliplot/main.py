"""Command line entry point: render one figure from one CSV."""

from __future__ import annotations

import argparse
import sys

from .figures import plot_convergence, plot_energy

_KINDS = {"convergence": plot_convergence, "energy": plot_energy}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="heliplot",
        description="Render figures from sweep-harness CSV files.")
    sub = p.add_subparsers(dest="kind", required=True)
    for kind, help_text in (("convergence",
                             "log-log error vs sigma with fitted slopes"),
                            ("energy",
                             "stacked energy budget over time")):
        sp = sub.add_parser(kind, help=help_text)
        sp.add_argument("--csv", required=True, help="input CSV path")
        sp.add_argument("--out", required=True, help="output figure path")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = _KINDS[args.kind](args.csv, args.out)
    except ValueError as e:
        print(f"heliplot: {e}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
