"""Deterministic interval-stepped model of memory contention.

One soft RT periodic task and one non-RT application share a fixed memory
budget and one swap SSD. Time advances in fixed monitoring intervals.

Paging model: each task's working set splits into resident pages, an
evicted backlog (pages pushed out to swap by limit squeezes or capacity
displacement), and never-touched pages, which materialize for free on first
touch. Touches land uniformly in the working set, so the per-touch swap-in
probability is q = evicted / demand; under a sustained limit squeeze the
backlog settles at demand - limit, the classic uniform deficit. The
resulting stall displaces execution progress within the interval:

    rho   = mu * touch_rate * q * fault_cost      (mu = max stall attribution)
    gain  = l_intv / (1 + rho)        (progress made this interval)
    raw   = touch_rate * gain * q * fault_cost    (expected fault stall)

so that gain + max(s_mem, s_io) == l_intv exactly, and a job's execution
time decomposes into best-case time plus its accumulated stall. Raising a
limit drains the backlog at the device's swap-in rate rather than
instantly. Long system-level stalls are injected as wall-clock windows
during which every task is fully stalled.

Runs are bit-deterministic for a given config: all randomness comes from
named streams derived from the scenario seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from sara.allocators.base import (
    Allocator,
    AllocatorDecision,
    IntervalObservation,
    LimitBounds,
    NO_CHANGE,
)
from sara.metrics import StallSample, interval_stall

__all__ = [
    "SOFT_RT",
    "NON_RT",
    "WorkingSet",
    "TaskSpec",
    "SsdProfile",
    "LongStallConfig",
    "StallAttribution",
    "ScenarioConfig",
    "PeriodRecord",
    "TraceLog",
    "SimulationError",
    "AllocatorProtocolError",
    "fault_cost",
    "Simulator",
    "run_scenario",
    "nonrt_throughput",
]

SOFT_RT = "soft_rt"
NON_RT = "non_rt"


class SimulationError(ValueError):
    """Invalid scenario configuration or simulation state."""


class AllocatorProtocolError(SimulationError):
    """An allocator decision violated the capacity contract."""


@dataclass(frozen=True)
class WorkingSet:
    """Working-set footprint in MB: minimum, average, and peak usage."""

    min_mb: float
    avg_mb: float
    max_mb: float

    def validate(self, name: str) -> None:
        if not (0 < self.min_mb <= self.avg_mb <= self.max_mb):
            raise SimulationError(
                f"task {name}: working set must satisfy 0 < min <= avg <= max, "
                f"got {self.min_mb}/{self.avg_mb}/{self.max_mb}"
            )


@dataclass(frozen=True)
class TaskSpec:
    """One workload: a soft RT periodic task or a throughput-oriented non-RT app.

    touch_rate_pages_per_us is the rate at which the task touches distinct
    working-set pages per microsecond of execution progress; together with
    the per-fault cost it sets how strongly a memory deficit stalls the task.
    """

    name: str
    kind: str
    working_set: WorkingSet
    touch_rate_pages_per_us: float
    demand_jitter: float = 0.5
    period_us: int = 0
    deadline_us: int = 0
    t_bcet_us: int = 0

    def validate(self) -> None:
        if self.kind not in (SOFT_RT, NON_RT):
            raise SimulationError(f"task {self.name}: unknown kind {self.kind!r}")
        self.working_set.validate(self.name)
        if self.touch_rate_pages_per_us <= 0:
            raise SimulationError(f"task {self.name}: touch rate must be positive")
        if not 0.0 <= self.demand_jitter <= 1.0:
            raise SimulationError(f"task {self.name}: demand_jitter must be in [0, 1]")
        if self.kind == SOFT_RT:
            if not 0 < self.t_bcet_us < self.deadline_us <= self.period_us:
                raise SimulationError(
                    f"task {self.name}: need 0 < t_bcet < deadline <= period, got "
                    f"{self.t_bcet_us}/{self.deadline_us}/{self.period_us}"
                )


@dataclass(frozen=True)
class SsdProfile:
    """Swap-device cost model."""

    name: str
    read_bw_bytes_per_s: float
    write_bw_bytes_per_s: float
    per_op_latency_us: float
    page_size_bytes: int = 4096

    def validate(self) -> None:
        if self.read_bw_bytes_per_s <= 0 or self.write_bw_bytes_per_s <= 0:
            raise SimulationError(f"ssd {self.name}: bandwidths must be positive")
        p = self.page_size_bytes
        if p <= 0 or p & (p - 1):
            raise SimulationError(f"ssd {self.name}: page size must be a power of two")


@dataclass(frozen=True)
class LongStallConfig:
    """Injection of system-level full stalls: per-period Bernoulli events."""

    probability_per_period: float = 0.0
    min_duration_us: int = 8_000_000
    max_duration_us: int = 16_000_000

    def validate(self) -> None:
        if not 0.0 <= self.probability_per_period <= 1.0:
            raise SimulationError("long-stall probability must be in [0, 1]")
        if not 0 < self.min_duration_us <= self.max_duration_us:
            raise SimulationError("long-stall duration range must satisfy 0 < min <= max")


@dataclass(frozen=True)
class StallAttribution:
    """How raw fault stall splits into the memory and I/O pressure channels.

    Fault latency can surface as memory stall, I/O stall, or both; keeping
    both fractions configurable exercises the max() in the interval metric
    from either side.
    """

    mem_fraction: float = 1.0
    io_fraction: float = 0.7

    def validate(self) -> None:
        if self.mem_fraction < 0 or self.io_fraction < 0:
            raise SimulationError("stall attribution fractions must be non-negative")
        if max(self.mem_fraction, self.io_fraction) <= 0:
            raise SimulationError("at least one stall attribution fraction must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a run needs: tasks, capacity, device, injection, and seed."""

    total_memory_mb: float
    ssd: SsdProfile
    tasks: tuple[TaskSpec, ...]
    l_intv_us: int = 5000
    base_unit_mb: float = 1.0
    long_stall: LongStallConfig = field(default_factory=LongStallConfig)
    stall_attribution: StallAttribution = field(default_factory=StallAttribution)
    seed: int = 42
    horizon_periods: int = 500
    dirty_fraction: float = 0.25
    nonrt_unit_cost_us: int = 100_000
    drop_cost_us: int = 10_000

    def validate(self) -> None:
        if self.horizon_periods <= 0:
            raise SimulationError("horizon_periods must be positive")
        if self.l_intv_us <= 0:
            raise SimulationError("l_intv_us must be positive")
        if self.base_unit_mb <= 0:
            raise SimulationError("base_unit_mb must be positive")
        if not 0.0 <= self.dirty_fraction <= 1.0:
            raise SimulationError("dirty_fraction must be in [0, 1]")
        self.ssd.validate()
        self.long_stall.validate()
        self.stall_attribution.validate()
        kinds = [t.kind for t in self.tasks]
        if kinds.count(SOFT_RT) != 1 or kinds.count(NON_RT) != 1 or len(self.tasks) != 2:
            raise SimulationError(
                "scenario needs exactly one soft RT task and one non-RT task"
            )
        names = {t.name for t in self.tasks}
        if len(names) != len(self.tasks):
            raise SimulationError("task names must be unique")
        for task in self.tasks:
            task.validate()
            if task.kind == SOFT_RT and task.period_us % self.l_intv_us:
                raise SimulationError(
                    f"task {task.name}: period {task.period_us} us is not a multiple "
                    f"of the monitoring interval {self.l_intv_us} us"
                )
        floor_sum = sum(t.working_set.min_mb for t in self.tasks)
        if self.total_memory_mb < floor_sum:
            raise SimulationError(
                f"total memory {self.total_memory_mb} MB cannot cover the working-set "
                f"minima ({floor_sum} MB)"
            )

    @property
    def soft_rt_task(self) -> TaskSpec:
        return next(t for t in self.tasks if t.kind == SOFT_RT)

    @property
    def nonrt_task(self) -> TaskSpec:
        return next(t for t in self.tasks if t.kind == NON_RT)

    @property
    def has_contention(self) -> bool:
        """False when memory covers every peak simultaneously (run permitted, trivial)."""
        return self.total_memory_mb < sum(t.working_set.max_mb for t in self.tasks)

    def bounds_for(self, task: TaskSpec) -> LimitBounds:
        other_min = sum(t.working_set.min_mb for t in self.tasks if t.name != task.name)
        return LimitBounds(
            floor_mb=task.working_set.min_mb,
            ceiling_mb=self.total_memory_mb - other_min,
        )

    def replace(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def replace_task(self, name: str, **changes) -> "ScenarioConfig":
        tasks = tuple(
            replace(t, **changes) if t.name == name else t for t in self.tasks
        )
        return replace(self, tasks=tasks)


@dataclass(frozen=True)
class PeriodRecord:
    """Outcome of one soft RT job."""

    period_index: int
    t_wait_us: int
    t_exec_us: int
    elapsed_us: int
    s_period_us: int
    deadline_met: bool
    dropped: bool


@dataclass
class TraceLog:
    """Complete record of one run.

    intervals maps task name to rows of
    (time_us, s_mem_us, s_io_us, limit_mb, resident_mb, demand_mb), one per
    monitoring interval, time being the interval start.
    """

    scenario: ScenarioConfig
    allocator_name: str
    periods: list[PeriodRecord]
    intervals: dict[str, list[tuple[int, int, int, float, float, float]]]
    nonrt_completions_us: list[int]
    long_stall_windows: list[tuple[int, int]]
    wall_time_us: int

    def interval_samples(self, task_name: str) -> list[StallSample]:
        return [
            StallSample(interval_index=i, s_mem_us=row[1], s_io_us=row[2])
            for i, row in enumerate(self.intervals[task_name])
        ]

    def job_window_us(self, record: PeriodRecord) -> tuple[int, int]:
        """Wall-clock [start, end) of the job that produced this record."""
        arrival = record.period_index * self.scenario.soft_rt_task.period_us
        return arrival + record.t_wait_us, arrival + record.elapsed_us

    def overlaps_long_stall(self, record: PeriodRecord) -> bool:
        start, end = self.job_window_us(record)
        return any(s < end and start < e for s, e in self.long_stall_windows)

    def job_samples(self, record: PeriodRecord) -> list[StallSample]:
        """The soft RT stall samples attributed to this record's job."""
        start, end = self.job_window_us(record)
        rows = self.intervals[self.scenario.soft_rt_task.name]
        l_intv = self.scenario.l_intv_us
        out = []
        for i in range(start // l_intv, min(end // l_intv, len(rows))):
            row = rows[i]
            out.append(StallSample(interval_index=i, s_mem_us=row[1], s_io_us=row[2]))
        return out


def fault_cost(ssd: SsdProfile, concurrent_faulting_tasks: int, dirty_fraction: float) -> float:
    """Expected cost of one page fault in microseconds.

    Device bandwidth is split evenly among concurrently faulting tasks; a
    dirty victim page additionally pays the write-back transfer.
    """
    if concurrent_faulting_tasks < 1:
        raise ValueError("concurrent_faulting_tasks must be >= 1")
    k = concurrent_faulting_tasks
    read_us = ssd.page_size_bytes / (ssd.read_bw_bytes_per_s / k) * 1e6
    write_us = ssd.page_size_bytes / (ssd.write_bw_bytes_per_s / k) * 1e6
    return ssd.per_op_latency_us + read_us + dirty_fraction * write_us


def _stall_us(l_intv_us: int, touch_rate: float, q: float, cost_us: float,
              attribution: StallAttribution) -> tuple[int, int]:
    """Per-interval (s_mem, s_io) for a task missing a q fraction of touches.

    Solves the self-consistent split of the interval into execution progress
    and fault stall: progress g satisfies g = l_intv - mu * raw(g), with
    raw(g) = touch_rate * g * q * cost.
    """
    if q <= 0.0:
        return 0, 0
    mu = max(attribution.mem_fraction, attribution.io_fraction)
    rho = mu * touch_rate * q * cost_us
    raw = touch_rate * q * cost_us * l_intv_us / (1.0 + rho)
    s_mem = min(l_intv_us, round(attribution.mem_fraction * raw))
    s_io = min(l_intv_us, round(attribution.io_fraction * raw))
    return s_mem, s_io


@dataclass
class _TaskState:
    spec: TaskSpec
    limit_mb: float
    demand_mb: float
    resident_mb: float
    evicted_mb: float = 0.0
    progress_us: int = 0

    def redraw_demand(self, new_demand_mb: float) -> None:
        """The working set evolves: surplus tracked pages fall out of the set."""
        known = self.resident_mb + self.evicted_mb
        if known > new_demand_mb:
            excess = known - new_demand_mb
            drop = min(self.evicted_mb, excess)
            self.evicted_mb -= drop
            self.resident_mb -= excess - drop
        self.demand_mb = new_demand_mb

    def page_accounting(self, touching: bool) -> float:
        """Squeeze and first-touch bookkeeping; returns the swap-in miss fraction.

        A limit below the resident set evicts the surplus. A touching task
        materializes untouched pages for free while room remains; beyond
        that, first touches displace resident pages into the backlog.
        """
        avail = min(self.demand_mb, self.limit_mb)
        if self.resident_mb > avail:
            self.evicted_mb += self.resident_mb - avail
            self.resident_mb = avail
        if touching:
            untouched = self.demand_mb - self.resident_mb - self.evicted_mb
            if untouched > 1e-12:
                grow = min(untouched, avail - self.resident_mb)
                self.resident_mb += grow
                self.evicted_mb += untouched - grow
        if self.evicted_mb <= 1e-12 or self.demand_mb <= 0:
            return 0.0
        return self.evicted_mb / self.demand_mb

    def swap_in(self, cap_mb: float) -> None:
        """Faults drain the backlog into free room, bounded by device bandwidth."""
        avail = min(self.demand_mb, self.limit_mb)
        room = avail - self.resident_mb
        if self.evicted_mb > 0 and room > 0:
            inflow = min(self.evicted_mb, room, cap_mb)
            self.resident_mb += inflow
            self.evicted_mb -= inflow


class Simulator:
    """Steps one scenario under one allocator.

    Use run_scenario() unless a test needs interval-level control via
    step_interval().
    """

    def __init__(self, config: ScenarioConfig, allocator: Allocator):
        config.validate()
        self.config = config
        self.allocator = allocator
        self.now_us = 0
        rt = config.soft_rt_task
        nonrt = config.nonrt_task
        self._rt_bounds = config.bounds_for(rt)
        allocator.bind(rt, config, self._rt_bounds)

        self._rt_demand = self._draw_demands(rt, config.horizon_periods)
        self._nonrt_demand: list[float] = []
        self._nonrt_rng = random.Random(f"{config.seed}:demand:{nonrt.name}")
        self.long_stall_windows = self._draw_long_stalls(rt)

        rt_limit = self._rt_bounds.clamp(allocator.initial_limit_mb())
        rt_demand0 = self._rt_demand[0]
        nonrt_limit = config.total_memory_mb - rt_limit
        nonrt_demand0 = self._nonrt_demand_at(0)
        self.rt = _TaskState(rt, rt_limit, rt_demand0, min(rt_demand0, rt_limit))
        self.nonrt = _TaskState(
            nonrt, nonrt_limit, nonrt_demand0, min(nonrt_demand0, nonrt_limit)
        )

        self.intervals: dict[str, list] = {rt.name: [], nonrt.name: []}
        self.periods: list[PeriodRecord] = []
        self.nonrt_completions_us: list[int] = []

        # Soft RT job lifecycle.
        self._next_period = 0
        self._job_index: int | None = None
        self._job_start_us = 0
        self._job_s_period = 0
        self._drop_end_us: int | None = None
        self._nonrt_epoch = 0

    # -- randomness ---------------------------------------------------------

    def _draw_demands(self, task: TaskSpec, count: int) -> list[float]:
        rng = random.Random(f"{self.config.seed}:demand:{task.name}")
        return [self._demand_draw(task, rng) for _ in range(count)]

    @staticmethod
    def _demand_draw(task: TaskSpec, rng: random.Random) -> float:
        ws, j = task.working_set, task.demand_jitter
        lo = ws.avg_mb - j * (ws.avg_mb - ws.min_mb)
        hi = ws.avg_mb + j * (ws.max_mb - ws.avg_mb)
        return rng.uniform(lo, hi)

    def _nonrt_demand_at(self, epoch: int) -> float:
        while len(self._nonrt_demand) <= epoch:
            self._nonrt_demand.append(self._demand_draw(self.nonrt_spec, self._nonrt_rng))
        return self._nonrt_demand[epoch]

    @property
    def nonrt_spec(self) -> TaskSpec:
        return self.config.nonrt_task

    def _draw_long_stalls(self, rt: TaskSpec) -> list[tuple[int, int]]:
        cfg = self.config.long_stall
        if cfg.probability_per_period <= 0.0:
            return []
        rng = random.Random(f"{self.config.seed}:long-stall")
        l_intv = self.config.l_intv_us
        windows: list[tuple[int, int]] = []
        for k in range(self.config.horizon_periods):
            # Consume the stream identically regardless of acceptance so the
            # event pattern is stable under config tweaks elsewhere.
            fires = rng.random() < cfg.probability_per_period
            offset = rng.uniform(0, rt.period_us)
            duration = rng.uniform(cfg.min_duration_us, cfg.max_duration_us)
            if not fires:
                continue
            start = (k * rt.period_us + int(offset)) // l_intv * l_intv
            end = -(-(start + int(duration)) // l_intv) * l_intv
            if windows and start < windows[-1][1]:
                continue  # no overlapping events
            windows.append((start, end))
        return windows

    def _in_long_stall(self, t_us: int) -> bool:
        for start, end in self.long_stall_windows:
            if start <= t_us < end:
                return True
            if start > t_us:
                return False
        return False

    # -- engine -------------------------------------------------------------

    def step_interval(self, decisions: Mapping[str, AllocatorDecision]) -> dict[str, StallSample]:
        """Apply decisions, advance one monitoring interval, return samples.

        Raises AllocatorProtocolError when a decision addresses the non-RT
        task (its limit is always the capacity remainder) or breaks the
        capacity invariant after clamping.
        """
        cfg = self.config
        rt, nonrt = self.rt, self.nonrt
        for name, decision in decisions.items():
            if name == nonrt.spec.name:
                raise AllocatorProtocolError(
                    f"non-RT task {name!r} is allocated by remainder, not by decision"
                )
            if name != rt.spec.name:
                raise AllocatorProtocolError(f"decision for unknown task {name!r}")
            self._apply_rt_decision(decision)
        if rt.limit_mb + nonrt.spec.working_set.min_mb > cfg.total_memory_mb + 1e-9:
            raise AllocatorProtocolError(
                f"soft RT limit {rt.limit_mb} MB leaves less than the non-RT minimum"
            )
        nonrt.limit_mb = cfg.total_memory_mb - rt.limit_mb

        l_intv = cfg.l_intv_us
        now = self.now_us
        dropping = self._drop_end_us is not None
        rt_running = self._job_index is not None and not dropping
        stalled = self._in_long_stall(now)

        rt_q = rt.page_accounting(touching=rt_running and not stalled)
        nonrt_q = nonrt.page_accounting(touching=not stalled)
        faulting = (rt_q > 0.0) + (nonrt_q > 0.0)
        cost = fault_cost(cfg.ssd, max(1, faulting), cfg.dirty_fraction) if faulting else 0.0

        if stalled:
            rt_s = (l_intv, l_intv) if rt_running else (0, 0)
            nonrt_s = (l_intv, l_intv)
        else:
            rt_s = (0, 0)
            if rt_running and rt_q > 0.0:
                rt_s = _stall_us(l_intv, rt.spec.touch_rate_pages_per_us, rt_q,
                                 cost, cfg.stall_attribution)
            nonrt_s = (0, 0)
            if nonrt_q > 0.0:
                nonrt_s = _stall_us(l_intv, nonrt.spec.touch_rate_pages_per_us, nonrt_q,
                                    cost, cfg.stall_attribution)

        rt_sample = StallSample(now // l_intv, rt_s[0], rt_s[1])
        nonrt_sample = StallSample(now // l_intv, nonrt_s[0], nonrt_s[1])

        if rt_running:
            gain = l_intv - interval_stall(rt_sample)
            rt.progress_us = min(rt.spec.t_bcet_us, rt.progress_us + gain)
            self._job_s_period += interval_stall(rt_sample)
        nonrt.progress_us += l_intv - interval_stall(nonrt_sample)
        while nonrt.progress_us >= cfg.nonrt_unit_cost_us:
            nonrt.progress_us -= cfg.nonrt_unit_cost_us
            self.nonrt_completions_us.append(now + l_intv)

        if not stalled:
            swap_cap_mb = cfg.ssd.read_bw_bytes_per_s / max(1, faulting) * l_intv / 1e12
            if rt_running:
                rt.swap_in(swap_cap_mb)
            nonrt.swap_in(swap_cap_mb)

        for state, sample in ((rt, rt_sample), (nonrt, nonrt_sample)):
            self.intervals[state.spec.name].append(
                (now, sample.s_mem_us, sample.s_io_us,
                 state.limit_mb, state.resident_mb, state.demand_mb)
            )

        self.now_us = now + l_intv
        return {rt.spec.name: rt_sample, nonrt.spec.name: nonrt_sample}

    def _apply_rt_decision(self, decision: AllocatorDecision) -> None:
        rt = self.rt
        if self._drop_end_us is not None:
            return  # decisions are inert while a drop is in flight
        if decision.drop_job and self._job_index is not None:
            # The release to the working-set floor happens once the drop
            # cost has been paid, not at decision time.
            l_intv = self.config.l_intv_us
            cost = -(-self.config.drop_cost_us // l_intv) * l_intv
            self._drop_end_us = self.now_us + cost
            return
        rt.limit_mb = self._rt_bounds.clamp(rt.limit_mb + decision.delta_mb)

    def _maybe_start_job(self) -> None:
        cfg = self.config
        if self._job_index is not None or self._next_period >= cfg.horizon_periods:
            return
        arrival = self._next_period * cfg.soft_rt_task.period_us
        if self.now_us < arrival:
            return
        self._job_index = self._next_period
        self._job_start_us = self.now_us
        self._job_s_period = 0
        self.rt.progress_us = 0
        self.rt.redraw_demand(self._rt_demand[self._job_index])
        self._next_period += 1
        decision = self.allocator.on_period_start(
            self.now_us - arrival, self.rt.demand_mb, self.rt.limit_mb
        )
        if decision is not None:
            self._apply_rt_decision(decision)

    def _maybe_finish_job(self) -> None:
        if self._job_index is None:
            return
        rt = self.rt
        dropped = False
        if self._drop_end_us is not None:
            if self.now_us < self._drop_end_us:
                return
            dropped = True
        elif rt.progress_us < rt.spec.t_bcet_us:
            return
        index = self._job_index
        arrival = index * rt.spec.period_us
        record = PeriodRecord(
            period_index=index,
            t_wait_us=self._job_start_us - arrival,
            t_exec_us=self.now_us - self._job_start_us,
            elapsed_us=self.now_us - arrival,
            s_period_us=self._job_s_period,
            deadline_met=not dropped and self.now_us - arrival <= rt.spec.deadline_us,
            dropped=dropped,
        )
        self.periods.append(record)
        self._job_index = None
        self._drop_end_us = None
        if dropped:
            rt.limit_mb = self._rt_bounds.floor_mb  # memory released after the drop cost
        self.allocator.on_job_complete(record)

    def run(self) -> TraceLog:
        cfg = self.config
        rt_name = self.rt.spec.name
        period = self.rt.spec.period_us
        decision = NO_CHANGE
        while len(self.periods) < cfg.horizon_periods:
            self._maybe_start_job()
            epoch = self.now_us // period
            if epoch != self._nonrt_epoch:
                self._nonrt_epoch = epoch
                self.nonrt.redraw_demand(self._nonrt_demand_at(epoch))
            samples = self.step_interval({rt_name: decision})
            job_running = self._job_index is not None and self._drop_end_us is None
            obs = IntervalObservation(
                sample=samples[rt_name],
                demand_mb=self.rt.demand_mb,
                limit_mb=self.rt.limit_mb,
                job_running=job_running,
            )
            decision = self.allocator.on_interval(obs)
            self._maybe_finish_job()
        return TraceLog(
            scenario=cfg,
            allocator_name=self.allocator.name,
            periods=self.periods,
            intervals=self.intervals,
            nonrt_completions_us=self.nonrt_completions_us,
            long_stall_windows=[
                w for w in self.long_stall_windows if w[0] < self.now_us
            ],
            wall_time_us=self.now_us,
        )


def run_scenario(config: ScenarioConfig, allocator: Allocator) -> TraceLog:
    """Run one scenario to completion and return its trace."""
    return Simulator(config, allocator).run()


def nonrt_throughput(trace: TraceLog) -> float:
    """Completed non-RT work units per second of simulated wall time."""
    if trace.wall_time_us <= 0:
        return 0.0
    return len(trace.nonrt_completions_us) / (trace.wall_time_us / 1e6)
