"""Command-line driver.

    invexkit run SCENARIO [--format json|text|csv] [--seed N] [--jobs N]
                          [--set key=value ...] [--output PATH] [--timing]
    invexkit list-catalog

Exit codes: 0 every expectation met, 1 some expectation missed,
2 falsification event, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .catalog import format_catalog, scenario_path
from .errors import ConfigError
from .scenario import emit_report, run_scenario, write_atomic

EXIT_CONFIG_ERROR = 3


def _parse_set(values):
    out = []
    for item in values or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        out.append((key, value))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invexkit",
        description="Run declarative generalized-convexity check scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario file and emit its report")
    run_p.add_argument("scenario", help="path to a scenario JSON file, or a shipped scenario name")
    run_p.add_argument("--format", choices=["json", "text", "csv"], default="json")
    run_p.add_argument("--seed", type=int, default=None, help="override every rng_seed in the file")
    run_p.add_argument(
        "--jobs",
        type=int,
        default=int(os.environ.get("INVEXKIT_JOBS", "1")),
        help="parallel descent starts (default: $INVEXKIT_JOBS or 1)",
    )
    run_p.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a scenario value, e.g. checks[0].scheme.n_pairs=200",
    )
    run_p.add_argument("--output", default=None, help="write the report to a file (atomically)")
    run_p.add_argument(
        "--timing",
        action="store_true",
        help="include wall-clock milliseconds (breaks byte-identical replay)",
    )

    sub.add_parser("list-catalog", help="print descriptor vocabulary and shipped scenarios")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-catalog":
        sys.stdout.write(format_catalog())
        return 0

    path = args.scenario
    if not os.path.exists(path):
        try:
            path = scenario_path(args.scenario)
        except FileNotFoundError:
            sys.stderr.write(f"error: no scenario file or shipped scenario {args.scenario!r}\n")
            return EXIT_CONFIG_ERROR
    try:
        overrides = _parse_set(args.set)
        report = run_scenario(
            path,
            seed=args.seed,
            set_overrides=overrides,
            jobs=max(1, args.jobs),
            include_timing=args.timing,
        )
        rendered = emit_report(report, args.format)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG_ERROR
    if args.output:
        write_atomic(args.output, rendered)
    else:
        sys.stdout.write(rendered)
    return report.exit_code()


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
