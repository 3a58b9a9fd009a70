"""Command-line experiment runner.

Subcommands: run (execute an experiment matrix), profile (fixed-allocation
workload profiling), sweep (static-threshold trade-off), compare (aggregate
result bundles, optionally enforcing the expected orderings).

Exit codes: 0 on success, 2 on configuration/validation errors, 1 when
`compare --check` finds a violated ordering.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from sara.harness import (
    SWEEP_CSV_HEADER,
    ConfigError,
    compare,
    load_experiments,
    profile_task,
    run_experiment,
    sweep_threshold,
    write_profile_report,
    _write_csv,
)

DEFAULT_SWEEP_GRID = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0]


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment YAML file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sara", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the experiment matrix")
    _add_config_args(run_p)
    run_p.add_argument("--allocators", default=None,
                       help="comma-separated subset of the config's allocators")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel cells")
    run_p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="comparison table format (bundles are always CSV+JSON)")

    profile_p = sub.add_parser("profile", help="profile the soft RT workload")
    _add_config_args(profile_p)
    profile_p.add_argument("--fit-limit-mb", type=float, default=None,
                           help="fixed limit for the stall/execution-time fit")

    sweep_p = sub.add_parser("sweep", help="sweep static stall-percentage thresholds")
    _add_config_args(sweep_p)
    sweep_p.add_argument("--grid", default=None,
                         help="comma-separated threshold percents (default 10..90)")

    compare_p = sub.add_parser("compare", help="aggregate result bundles")
    compare_p.add_argument("bundles", nargs="+", help="result directories from `sara run`")
    compare_p.add_argument("--out", required=True, help="output directory")
    compare_p.add_argument("--check", action="store_true",
                           help="fail (exit 1) when an expected ordering is violated")
    compare_p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            allocator_filter = args.allocators.split(",") if args.allocators else None
            configs = load_experiments(args.config, seed_override=args.seed,
                                       allocator_filter=allocator_filter)
            rows = run_experiment(configs, args.out, jobs=args.jobs)
            compare([args.out], args.out, check=False, fmt=args.format)
            for row in rows:
                print(f"{row.config} {row.allocator} seed={row.seed} "
                      f"hit={row.deadline_hit_ratio:.4f} "
                      f"tput={row.nonrt_throughput_units_per_s:.3f}/s")
            return 0
        if args.command == "profile":
            configs = load_experiments(args.config, seed_override=args.seed)
            for config in configs:
                report = profile_task(config.scenario, fit_limit_mb=args.fit_limit_mb)
                out = Path(args.out) / config.label
                write_profile_report(report, out)
                print(f"{config.label}: bcet={report.t_bcet_measured_us} us "
                      f"slope={report.fit.slope:.3f} r2={report.fit.r_squared:.3f} "
                      f"mn_candidates={list(report.mn_candidates)}")
            return 0
        if args.command == "sweep":
            grid = ([float(g) for g in args.grid.split(",")] if args.grid
                    else DEFAULT_SWEEP_GRID)
            configs = load_experiments(args.config, seed_override=args.seed)
            for config in configs:
                rows = sweep_threshold(config.scenario, grid)
                out = Path(args.out) / config.label
                out.mkdir(parents=True, exist_ok=True)
                _write_csv(out / "sweep.csv", SWEEP_CSV_HEADER, rows)
                for threshold, hit, tput, elapsed in rows:
                    print(f"{config.label} thr={threshold:.1f}% hit={hit:.4f} "
                          f"tput={tput:.3f}/s elapsed={elapsed / 1e6:.3f}s")
            return 0
        if args.command == "compare":
            checks, table = compare(args.bundles, args.out, check=args.check, fmt=args.format)
            for name, ok in checks:
                print(f"[{'PASS' if ok else 'FAIL'}] {name}")
            print(f"wrote {table}")
            return 1 if any(not ok for _, ok in checks) else 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
