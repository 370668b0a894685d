"""Command-line entry point.

Subcommands: solve | verify | norm-check | limit-scan | gram | probe.
Each reads a flat key=value config file, prints one JSON record per case on
stdout and a human summary on stderr, and exits 0 exactly when every proven
(non-conjectural) verdict passes.
"""

from __future__ import annotations

import argparse
import sys

from . import harness


_COMMANDS = {
    "solve": harness.cmd_solve,
    "verify": harness.cmd_verify,
    "norm-check": harness.cmd_norm_check,
    "limit-scan": harness.cmd_limit_scan,
    "gram": harness.cmd_gram,
    "probe": harness.cmd_probe,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alcovebethe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="path to a key=value experiment file")
        p.add_argument("--out", default=None, help="also write the report to this path")
        p.add_argument("--format", default=None, choices=["json", "csv"])
        p.add_argument("--seed", default=None, type=int, help="override the config seed")
        p.add_argument("--depth", default=None, type=int, help="override the quadrature depth")
        p.add_argument("--rank-cap", default=None, type=int, help="override the Weyl enumeration cap")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = harness.ExperimentConfig.from_file(args.config)
        for key in ("out", "format", "seed", "depth"):
            value = getattr(args, key)
            if value is not None:
                setattr(config, key, value)
        if args.rank_cap is not None:
            config.rank_cap = args.rank_cap
        report = _COMMANDS[args.command](config)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report.emit(fmt=config.format, out=config.out)
    return 0 if report.all_proven_pass else 1


if __name__ == "__main__":
    sys.exit(main())
