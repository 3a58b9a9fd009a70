"""Experiment harness: config loading, matrix execution, profiling, threshold
sweeps, and comparison reports.

Every run writes a self-contained bundle: per-period, per-interval, and
memory-trace CSVs plus a summary JSON. Bundles carry no timestamps or
absolute paths, so identical configs produce byte-identical bundles. All
summary statistics are recomputable from the per-period CSVs.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import yaml

from sara.allocators import ALLOCATOR_NAMES, make_allocator, StaticAllocator
from sara.allocators.baselines import PeriodThresholdAllocator
from sara.metrics import LinearFit, fit_stall_linearity
from sara.presets import MEMORY_FRACTIONS, SSD_PROFILES, WORKLOADS, build_scenario
from sara.simulator import (
    LongStallConfig,
    ScenarioConfig,
    TaskSpec,
    TraceLog,
    nonrt_throughput,
    run_scenario,
)

__all__ = [
    "SCHEMA_VERSION",
    "PERIOD_CSV_HEADER",
    "INTERVAL_CSV_HEADER",
    "MEMORY_CSV_HEADER",
    "SWEEP_CSV_HEADER",
    "SUMMARY_CSV_HEADER",
    "COMPARE_CSV_HEADER",
    "ConfigError",
    "AllocatorSpec",
    "ExperimentConfig",
    "SummaryRow",
    "ProfileReport",
    "load_experiments",
    "summarize",
    "write_trace_bundle",
    "run_experiment",
    "profile_task",
    "sweep_threshold",
    "compare",
    "ordering_checks",
]

SCHEMA_VERSION = 1

PERIOD_CSV_HEADER = (
    "period_index,t_wait_us,t_exec_us,elapsed_us,s_period_us,deadline_met,dropped"
)
INTERVAL_CSV_HEADER = "time_us,task,s_mem_us,s_io_us,s_intv_us,limit_mb"
MEMORY_CSV_HEADER = "time_us,task,limit_mb,resident_mb,demand_mb"
SWEEP_CSV_HEADER = "threshold_percent,hit_ratio,throughput_units_per_s,mean_elapsed_us"
SUMMARY_CSV_HEADER = (
    "config,allocator,deadline_hit_ratio,nonrt_throughput_units_per_s,mean_elapsed_us,"
    "drop_count,mean_soft_rt_limit_mb"
)
COMPARE_CSV_HEADER = SUMMARY_CSV_HEADER + ",throughput_ratio_vs_greedy,hit_delta_vs_sara"


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field path."""


@dataclass(frozen=True)
class AllocatorSpec:
    name: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentConfig:
    """One cellable experiment: a scenario plus the allocators to run on it."""

    label: str
    scenario: ScenarioConfig
    allocators: tuple[AllocatorSpec, ...]
    repetitions: int = 1

    def seeds(self) -> list[int]:
        return [self.scenario.seed + i for i in range(self.repetitions)]


@dataclass(frozen=True)
class SummaryRow:
    config: str
    allocator: str
    seed: int
    deadline_hit_ratio: float
    nonrt_throughput_units_per_s: float
    mean_elapsed_us: float
    drop_count: int
    mean_soft_rt_limit_mb: float


# -- config loading ----------------------------------------------------------


def _expect(mapping: dict, key: str, types, path: str, default=None, required=False):
    if key not in mapping:
        if required:
            raise ConfigError(f"{path}.{key}: required field is missing")
        return default
    value = mapping[key]
    if not isinstance(value, types):
        raise ConfigError(
            f"{path}.{key}: expected {getattr(types, '__name__', types)}, "
            f"got {type(value).__name__}"
        )
    return value


def _as_list(value) -> list:
    return value if isinstance(value, list) else [value]


def _parse_task(spec, path: str, kind_default: str) -> TaskSpec:
    if isinstance(spec, str):
        if spec not in WORKLOADS:
            raise ConfigError(f"{path}: unknown workload preset {spec!r}")
        return WORKLOADS[spec]
    if not isinstance(spec, dict):
        raise ConfigError(f"{path}: expected preset name or mapping")
    from sara.simulator import WorkingSet

    ws = _expect(spec, "working_set", dict, path, required=True)
    try:
        working_set = WorkingSet(
            min_mb=float(ws["min_mb"]), avg_mb=float(ws["avg_mb"]), max_mb=float(ws["max_mb"])
        )
    except KeyError as exc:
        raise ConfigError(f"{path}.working_set.{exc.args[0]}: required field is missing")
    return TaskSpec(
        name=_expect(spec, "name", str, path, required=True),
        kind=spec.get("kind", kind_default),
        working_set=working_set,
        touch_rate_pages_per_us=float(_expect(spec, "touch_rate_pages_per_us", (int, float), path, required=True)),
        demand_jitter=float(spec.get("demand_jitter", 0.5)),
        period_us=int(spec.get("period_us", 0)),
        deadline_us=int(spec.get("deadline_us", 0)),
        t_bcet_us=int(spec.get("t_bcet_us", 0)),
    )


def _parse_allocators(raw, path: str) -> tuple[AllocatorSpec, ...]:
    specs = []
    for i, entry in enumerate(raw):
        if isinstance(entry, str):
            name, params = entry, {}
        elif isinstance(entry, dict):
            name = _expect(entry, "name", str, f"{path}[{i}]", required=True)
            params = {k: v for k, v in entry.items() if k != "name"}
        else:
            raise ConfigError(f"{path}[{i}]: expected allocator name or mapping")
        if name not in ALLOCATOR_NAMES:
            raise ConfigError(
                f"{path}[{i}]: unknown allocator {name!r}; expected one of {ALLOCATOR_NAMES}"
            )
        specs.append(AllocatorSpec(name=name, params=params))
    if not specs:
        raise ConfigError(f"{path}: at least one allocator is required")
    return tuple(specs)


def load_experiments(path: str | Path, seed_override: int | None = None,
                     allocator_filter: Sequence[str] | None = None) -> list[ExperimentConfig]:
    """Load a YAML experiment file, expanding ssd/memory_fraction lists into cells."""
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a mapping")
    workload = _parse_task(raw.get("workload", "sphinx"), "config.workload", "soft_rt")
    nonrt = _parse_task(raw.get("nonrt", "graphchi"), "config.nonrt", "non_rt")
    ssds = _as_list(raw.get("ssd", "slow"))
    fractions = _as_list(raw.get("memory_fraction", 0.6))
    allocators = _parse_allocators(_as_list(raw.get("allocators", ["sara"])), "config.allocators")
    if allocator_filter:
        allocators = tuple(a for a in allocators if a.name in set(allocator_filter))
        if not allocators:
            raise ConfigError("config.allocators: filter removed every allocator")
    seed = seed_override if seed_override is not None else int(raw.get("seed", 42))
    repetitions = int(raw.get("repetitions", 1))
    if repetitions < 1:
        raise ConfigError("config.repetitions: must be >= 1")
    ls_raw = raw.get("long_stall", {})
    if not isinstance(ls_raw, dict):
        raise ConfigError("config.long_stall: expected a mapping")
    long_stall = LongStallConfig(
        probability_per_period=float(ls_raw.get("probability_per_period", 0.0)),
        min_duration_us=int(ls_raw.get("min_duration_us", 8_000_000)),
        max_duration_us=int(ls_raw.get("max_duration_us", 16_000_000)),
    )

    fraction_names = {v: k for k, v in MEMORY_FRACTIONS.items()}
    experiments = []
    for fraction in fractions:
        if not isinstance(fraction, (int, float)) or not 0 < fraction <= 1:
            raise ConfigError(f"config.memory_fraction: must be in (0, 1], got {fraction!r}")
        for ssd in ssds:
            if not isinstance(ssd, str) or ssd not in SSD_PROFILES:
                raise ConfigError(
                    f"config.ssd: unknown profile {ssd!r}; expected one of {sorted(SSD_PROFILES)}"
                )
            mem_name = fraction_names.get(fraction, f"mem{int(round(fraction * 100))}")
            try:
                scenario = build_scenario(
                    workload=workload,
                    nonrt=nonrt,
                    ssd=ssd,
                    memory_fraction=float(fraction),
                    seed=seed,
                    horizon_periods=int(raw.get("horizon_periods", 500)),
                    l_intv_us=int(raw.get("l_intv_us", 5000)),
                    base_unit_mb=float(raw.get("base_unit_mb", 8.0)),
                    long_stall=long_stall,
                )
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"config: {exc}") from exc
            experiments.append(ExperimentConfig(
                label=f"{mem_name}-{ssd}",
                scenario=scenario,
                allocators=allocators,
                repetitions=repetitions,
            ))
    return experiments


# -- summaries and bundles ---------------------------------------------------


def summarize(trace: TraceLog, config_label: str) -> SummaryRow:
    periods = trace.periods
    rt_rows = trace.intervals[trace.scenario.soft_rt_task.name]
    return SummaryRow(
        config=config_label,
        allocator=trace.allocator_name,
        seed=trace.scenario.seed,
        deadline_hit_ratio=sum(r.deadline_met for r in periods) / len(periods),
        nonrt_throughput_units_per_s=nonrt_throughput(trace),
        mean_elapsed_us=sum(r.elapsed_us for r in periods) / len(periods),
        drop_count=sum(r.dropped for r in periods),
        mean_soft_rt_limit_mb=sum(row[3] for row in rt_rows) / len(rt_rows),
    )


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: str, rows: Iterable[tuple]) -> None:
    with path.open("w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_format(v) for v in row) + "\n")


def write_trace_bundle(trace: TraceLog, out_dir: str | Path, config_label: str) -> SummaryRow:
    """Write periods.csv, intervals.csv, memory.csv, and summary.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "periods.csv", PERIOD_CSV_HEADER, (
        (r.period_index, r.t_wait_us, r.t_exec_us, r.elapsed_us, r.s_period_us,
         r.deadline_met, r.dropped)
        for r in trace.periods
    ))

    def interval_rows():
        for name in sorted(trace.intervals):
            for time_us, s_mem, s_io, limit, _resident, _demand in trace.intervals[name]:
                yield time_us, name, s_mem, s_io, max(s_mem, s_io), limit

    def memory_rows():
        for name in sorted(trace.intervals):
            for time_us, _s_mem, _s_io, limit, resident, demand in trace.intervals[name]:
                yield time_us, name, limit, resident, demand

    _write_csv(out / "intervals.csv", INTERVAL_CSV_HEADER, interval_rows())
    _write_csv(out / "memory.csv", MEMORY_CSV_HEADER, memory_rows())
    summary = summarize(trace, config_label)
    payload = {
        "schema_version": SCHEMA_VERSION,
        **asdict(summary),
        "horizon_periods": trace.scenario.horizon_periods,
        "total_memory_mb": trace.scenario.total_memory_mb,
        "ssd": trace.scenario.ssd.name,
        "long_stall_windows_us": trace.long_stall_windows,
        "wall_time_us": trace.wall_time_us,
    }
    (out / "summary.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return summary


def _run_cell(args: tuple) -> SummaryRow:
    label, scenario, spec, seed, out_dir = args
    scenario = scenario.replace(seed=seed)
    allocator = make_allocator(spec.name, scenario, **spec.params)
    trace = run_scenario(scenario, allocator)
    return write_trace_bundle(trace, Path(out_dir), label)


def run_experiment(configs: Sequence[ExperimentConfig], out_dir: str | Path,
                   jobs: int = 1) -> list[SummaryRow]:
    """Run every (config, allocator, seed) cell and write result bundles.

    Cells are independent; with jobs > 1 they run in separate processes.
    Bundle layout: <out>/<config>/<allocator>/seed-<seed>/.
    """
    out = Path(out_dir)
    cells = []
    for config in configs:
        for spec in config.allocators:
            for seed in config.seeds():
                cell_dir = out / config.label / spec.name / f"seed-{seed}"
                cells.append((config.label, config.scenario, spec, seed, str(cell_dir)))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(cell) for cell in cells]
    _write_csv(out / "summaries.csv", SUMMARY_CSV_HEADER, (
        (r.config, r.allocator, r.deadline_hit_ratio, r.nonrt_throughput_units_per_s,
         r.mean_elapsed_us, r.drop_count, r.mean_soft_rt_limit_mb)
        for r in rows
    ))
    return rows


# -- profiling ---------------------------------------------------------------


@dataclass(frozen=True)
class ProfileReport:
    """Per-workload profiling outputs.

    mn_candidates are the (m, n) percentage pairs that cleanly separate the
    injected long-stall periods from normal ones when flagging periods whose
    share of intervals stalled beyond n% of the interval reaches m%.
    """

    t_bcet_measured_us: int
    fit: LinearFit
    fit_point_count: int
    mn_candidates: tuple[tuple[int, int], ...]
    severe_percent_rows: tuple[tuple[int, bool, dict[int, float]], ...]


M_GRID = (50, 60, 70, 80, 90)
N_GRID = (50, 60, 70, 80, 90, 95)


def profile_task(scenario: ScenarioConfig, fit_limit_mb: float | None = None,
                 fit_periods: int = 300) -> ProfileReport:
    """Fixed-allocation profiling runs for one scenario's soft RT task.

    Three runs: an uncontended run measuring best-case execution time, a
    fixed-limit run under contention for the execution-time/stall fit, and,
    when the scenario injects long stalls, a fixed-at-average run to find the
    (m, n) cells that separate long-stall periods from normal ones.
    """
    task = scenario.soft_rt_task
    calm = scenario.replace(
        long_stall=LongStallConfig(probability_per_period=0.0),
        horizon_periods=min(30, scenario.horizon_periods),
    )
    bcet_trace = run_scenario(calm, StaticAllocator(task.working_set.max_mb))
    t_bcet_measured = min(r.t_exec_us for r in bcet_trace.periods)

    if fit_limit_mb is None:
        ws = task.working_set
        fit_limit_mb = ws.avg_mb - 0.3 * (ws.avg_mb - ws.min_mb)
    fit_scenario = scenario.replace(horizon_periods=fit_periods)
    fit_trace = run_scenario(fit_scenario, StaticAllocator(fit_limit_mb))
    points = [
        (float(r.s_period_us), float(r.t_exec_us))
        for r in fit_trace.periods
        if not r.dropped and not fit_trace.overlaps_long_stall(r)
    ]
    fit = fit_stall_linearity(points)

    severe_rows: list[tuple[int, bool, dict[int, float]]] = []
    candidates: list[tuple[int, int]] = []
    if scenario.long_stall.probability_per_period > 0:
        mn_trace = run_scenario(
            scenario.replace(horizon_periods=fit_periods),
            StaticAllocator(task.working_set.avg_mb),
        )
        for record in mn_trace.periods:
            samples = mn_trace.job_samples(record)
            if not samples:
                continue
            pcts = {
                n: 100.0 * sum(
                    1 for s in samples if max(s.s_mem_us, s.s_io_us) > n / 100.0 * scenario.l_intv_us
                ) / len(samples)
                for n in N_GRID
            }
            severe_rows.append((record.period_index, mn_trace.overlaps_long_stall(record), pcts))
        for n in N_GRID:
            injected = [row[2][n] for row in severe_rows if row[1]]
            normal = [row[2][n] for row in severe_rows if not row[1]]
            if not injected or not normal:
                continue
            for m in M_GRID:
                if min(injected) >= m and max(normal) < m:
                    candidates.append((m, n))
    return ProfileReport(
        t_bcet_measured_us=t_bcet_measured,
        fit=fit,
        fit_point_count=len(points),
        mn_candidates=tuple(candidates),
        severe_percent_rows=tuple(severe_rows),
    )


def write_profile_report(report: ProfileReport, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "t_bcet_measured_us": report.t_bcet_measured_us,
        "fit": asdict(report.fit),
        "fit_point_count": report.fit_point_count,
        "mn_candidates": [list(c) for c in report.mn_candidates],
    }
    (out / "profile.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    header = "period_index,long_stall," + ",".join(f"severe_pct_n{n}" for n in N_GRID)
    _write_csv(out / "profile_severe.csv", header, (
        (idx, injected, *[pcts[n] for n in N_GRID])
        for idx, injected, pcts in report.severe_percent_rows
    ))


# -- threshold sweep ---------------------------------------------------------


def sweep_threshold(scenario: ScenarioConfig, grid: Sequence[float],
                    step_mb: float = 1.0) -> list[tuple]:
    """Static-threshold trade-off rows: (threshold, hit ratio, throughput, mean elapsed).

    Each grid point runs a controller holding the running job's per-period
    stall share at that threshold. A fine step keeps adjacent grid points'
    equilibria distinguishable.
    """
    if not grid:
        raise ConfigError("sweep: threshold grid must be non-empty")
    rows = []
    for threshold in grid:
        allocator = PeriodThresholdAllocator(float(threshold), step_mb=step_mb)
        trace = run_scenario(scenario, allocator)
        hit = sum(r.deadline_met for r in trace.periods) / len(trace.periods)
        mean_elapsed = sum(r.elapsed_us for r in trace.periods) / len(trace.periods)
        rows.append((float(threshold), hit, nonrt_throughput(trace), mean_elapsed))
    return rows


# -- comparison --------------------------------------------------------------


def load_summaries(bundle_dirs: Sequence[str | Path]) -> list[SummaryRow]:
    rows = []
    for root in bundle_dirs:
        paths = sorted(Path(root).rglob("summary.json"))
        if not paths:
            raise ConfigError(f"compare: no summary.json found under {root}")
        for path in paths:
            data = json.loads(path.read_text())
            rows.append(SummaryRow(
                config=data["config"],
                allocator=data["allocator"],
                seed=data["seed"],
                deadline_hit_ratio=data["deadline_hit_ratio"],
                nonrt_throughput_units_per_s=data["nonrt_throughput_units_per_s"],
                mean_elapsed_us=data["mean_elapsed_us"],
                drop_count=data["drop_count"],
                mean_soft_rt_limit_mb=data["mean_soft_rt_limit_mb"],
            ))
    return rows


def _aggregate(rows: Sequence[SummaryRow]) -> dict[tuple[str, str], SummaryRow]:
    grouped: dict[tuple[str, str], list[SummaryRow]] = {}
    for row in rows:
        grouped.setdefault((row.config, row.allocator), []).append(row)
    out = {}
    for key, group in grouped.items():
        n = len(group)
        out[key] = SummaryRow(
            config=key[0],
            allocator=key[1],
            seed=min(g.seed for g in group),
            deadline_hit_ratio=sum(g.deadline_hit_ratio for g in group) / n,
            nonrt_throughput_units_per_s=sum(g.nonrt_throughput_units_per_s for g in group) / n,
            mean_elapsed_us=sum(g.mean_elapsed_us for g in group) / n,
            drop_count=round(sum(g.drop_count for g in group) / n),
            mean_soft_rt_limit_mb=sum(g.mean_soft_rt_limit_mb for g in group) / n,
        )
    return out


def ordering_checks(aggregated: dict[tuple[str, str], SummaryRow]) -> list[tuple[str, bool]]:
    """The cross-allocator orderings a healthy run matrix must satisfy."""
    configs = sorted({config for config, _ in aggregated})
    checks: list[tuple[str, bool]] = []

    def get(config: str, allocator: str) -> SummaryRow | None:
        return aggregated.get((config, allocator))

    ratios: dict[str, float] = {}
    for config in configs:
        sara = get(config, "sara")
        if sara is None:
            continue
        greedy = get(config, "greedy")
        if greedy is not None:
            ratio = sara.nonrt_throughput_units_per_s / greedy.nonrt_throughput_units_per_s
            ratios[config] = ratio
            checks.append((f"{config}: throughput sara > greedy", ratio > 1.0))
            checks.append((
                f"{config}: mean limit sara < greedy",
                sara.mean_soft_rt_limit_mb < greedy.mean_soft_rt_limit_mb,
            ))
        tmo_low = get(config, "tmo-low")
        if tmo_low is not None:
            checks.append((
                f"{config}: throughput sara > tmo-low",
                sara.nonrt_throughput_units_per_s > tmo_low.nonrt_throughput_units_per_s,
            ))
        for rival in ("offline", "tmo-high"):
            row = get(config, rival)
            if row is not None:
                checks.append((
                    f"{config}: hit ratio sara > {rival}",
                    sara.deadline_hit_ratio > row.deadline_hit_ratio,
                ))
    if "small-fast" in ratios and len(ratios) == 4:
        best = max(ratios, key=ratios.get)
        checks.append(("sara/greedy throughput ratio peaks on small-fast", best == "small-fast"))
    return checks


def compare(bundle_dirs: Sequence[str | Path], out_dir: str | Path,
            check: bool = False, fmt: str = "csv") -> tuple[list[tuple[str, bool]], Path]:
    """Aggregate bundles into a comparison table and markdown report.

    Returns the ordering-check results (empty unless check=True) and the
    table path. Re-running over unchanged bundles rewrites identical output.
    """
    rows = load_summaries(bundle_dirs)
    aggregated = _aggregate(rows)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def ratio_vs(row: SummaryRow, rival: str) -> float | str:
        other = aggregated.get((row.config, rival))
        if other is None or other.nonrt_throughput_units_per_s == 0:
            return ""
        return row.nonrt_throughput_units_per_s / other.nonrt_throughput_units_per_s

    def hit_delta(row: SummaryRow) -> float | str:
        sara = aggregated.get((row.config, "sara"))
        if sara is None:
            return ""
        return row.deadline_hit_ratio - sara.deadline_hit_ratio

    ordered = [aggregated[key] for key in sorted(aggregated)]
    table_rows = [
        (r.config, r.allocator, r.deadline_hit_ratio, r.nonrt_throughput_units_per_s,
         r.mean_elapsed_us, r.drop_count, r.mean_soft_rt_limit_mb,
         ratio_vs(r, "greedy"), hit_delta(r))
        for r in ordered
    ]
    if fmt == "json":
        table_path = out / "compare.json"
        payload = [dict(zip(COMPARE_CSV_HEADER.split(","), row)) for row in table_rows]
        table_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        table_path = out / "compare.csv"
        _write_csv(table_path, COMPARE_CSV_HEADER, table_rows)

    checks = ordering_checks(aggregated) if check else []
    lines = ["# Allocator comparison", "", "| config | allocator | hit ratio | non-RT units/s | mean elapsed (s) | drops | mean limit (MB) |", "|---|---|---|---|---|---|---|"]
    for r in ordered:
        lines.append(
            f"| {r.config} | {r.allocator} | {r.deadline_hit_ratio:.4f} | "
            f"{r.nonrt_throughput_units_per_s:.3f} | {r.mean_elapsed_us / 1e6:.3f} | "
            f"{r.drop_count} | {r.mean_soft_rt_limit_mb:.1f} |"
        )
    if checks:
        lines += ["", "## Ordering checks", ""]
        lines += [f"- [{'x' if ok else ' '}] {name}" for name, ok in checks]
    (out / "compare.md").write_text("\n".join(lines) + "\n")
    return checks, table_path
