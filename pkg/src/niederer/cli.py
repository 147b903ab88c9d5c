"""Command line entry point: ``niederer --suite group --seed 42``.

Exit status is 0 when every check passes, 1 when any check fails and 2 on a
usage or configuration error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError
from .report import SUITES, SuiteConfig, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="niederer", description="Seeded verification suites for the Schroedinger invariance group.")
    p.add_argument("--suite", default=None, help=f"one of {', '.join(SUITES + ('all',))} (default all)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dim", type=int, default=None, help="spatial dimension for group and charge checks")
    p.add_argument("--out", default=None, help="write the JSON report here (default stdout)")
    p.add_argument("--csv-dir", default=None, help="directory for CSV artifacts")
    p.add_argument("--config", default=None, help="JSON configuration file")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="tol.<check>=x or <param>=x; repeatable")
    p.add_argument("--quiet", action="store_true", help="suppress the per-check summary on stderr")
    return p


def make_config(args) -> SuiteConfig:
    cfg = SuiteConfig.from_file(args.config) if args.config else SuiteConfig()
    for key in ("suite", "seed", "dim", "out", "csv_dir"):
        if getattr(args, key) is not None:
            setattr(cfg, key, getattr(args, key))
    return cfg.with_overrides(args.override)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = make_config(args)
        if cfg.csv_dir:
            Path(cfg.csv_dir).mkdir(parents=True, exist_ok=True)
    except ConfigError as exc:
        print(f"niederer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run_suite(cfg)
    text = report.to_json()
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if not args.quiet:
        for line in report.summary_lines():
            print(line, file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
