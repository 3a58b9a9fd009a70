"""Baseline allocation policies: greedy, offline-profiled static, and
threshold-driven reclaim in the style of pressure-targeting data-center
controllers (a conservative low-threshold variant and a searched high
threshold).

All of them implement the same callback interface as the stall-budget
controller and none of them ever drops a job.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from sara.allocators.base import (
    Allocator,
    AllocatorDecision,
    IntervalObservation,
    NO_CHANGE,
)
from sara.metrics import interval_stall, stall_percentage

__all__ = [
    "TmoConfig",
    "OfflineProfile",
    "InfeasibleTaskError",
    "greedy_decision",
    "tmo_decision",
    "GreedyAllocator",
    "StaticAllocator",
    "OfflineAllocator",
    "PeriodThresholdAllocator",
    "TmoAllocator",
    "offline_profile",
    "tmo_high_search",
    "DEFAULT_TMO_HIGH_GRID",
]


class InfeasibleTaskError(ValueError):
    """No allocation lets the task meet its deadline."""


@dataclass(frozen=True)
class TmoConfig:
    """Threshold controller parameters: target stall percentage over a window.

    Reclaim is rate limited to one step per reclaim_period_us (cautious
    probing), while grants apply at every monitoring interval (fast
    backoff), in the style of production reclaim daemons.
    """

    psi_threshold_percent: float
    window_us: int = 10_000_000
    step_mb: float = 1.0
    reclaim_period_us: int = 1_000_000

    def validate(self) -> None:
        if self.psi_threshold_percent <= 0:
            raise ValueError("psi_threshold_percent must be positive")
        if self.step_mb <= 0:
            raise ValueError("step_mb must be positive")
        if self.window_us <= 0:
            raise ValueError("window_us must be positive")
        if self.reclaim_period_us <= 0:
            raise ValueError("reclaim_period_us must be positive")


@dataclass(frozen=True)
class OfflineProfile:
    """Statically profiled limit for one soft RT task."""

    static_limit_mb: float


def greedy_decision(demand_mb: float, limit_mb: float) -> AllocatorDecision:
    """Track the task's actual usage: move the limit straight to demand."""
    return AllocatorDecision(delta_mb=demand_mb - limit_mb)


def tmo_decision(config: TmoConfig, recent_stall_percent: float) -> AllocatorDecision:
    """One fixed-size step toward the target stall percentage.

    Below the threshold memory is reclaimed for the non-RT side; above it
    memory is granted back. Never drops jobs.
    """
    if recent_stall_percent < config.psi_threshold_percent:
        return AllocatorDecision(delta_mb=-config.step_mb)
    if recent_stall_percent > config.psi_threshold_percent:
        return AllocatorDecision(delta_mb=config.step_mb)
    return NO_CHANGE


class GreedyAllocator(Allocator):
    """Give the soft RT task exactly what it asks for, every interval."""

    name = "greedy"

    def on_period_start(self, t_wait_us, demand_mb, limit_mb):
        return greedy_decision(demand_mb, limit_mb)

    def on_interval(self, obs: IntervalObservation) -> AllocatorDecision:
        return greedy_decision(obs.demand_mb, obs.limit_mb)


class StaticAllocator(Allocator):
    """Hold the limit at a fixed value (clamped by the engine)."""

    name = "static"

    def __init__(self, limit_mb: float):
        self.static_limit_mb = limit_mb

    def initial_limit_mb(self) -> float:
        return self.bounds.clamp(self.static_limit_mb)

    def on_interval(self, obs: IntervalObservation) -> AllocatorDecision:
        return AllocatorDecision(delta_mb=self.static_limit_mb - obs.limit_mb)


class OfflineAllocator(StaticAllocator):
    """Static limit from an offline profile."""

    name = "offline"

    def __init__(self, profile: OfflineProfile):
        super().__init__(profile.static_limit_mb)
        self.profile = profile


class PeriodThresholdAllocator(Allocator):
    """Static-threshold controller on the running job's stall share.

    Compares the percentage of the current period spent stalled against a
    fixed threshold and steps the limit toward it. This is the
    threshold-sweep policy: unlike the windowed variant below, idle time
    between jobs does not dilute the measurement.
    """

    name = "threshold"

    def __init__(self, threshold_percent: float, step_mb: float = 1.0):
        self.config = TmoConfig(psi_threshold_percent=threshold_percent, step_mb=step_mb)
        self.config.validate()
        self._accumulated_us = 0
        self._intervals = 0

    def on_period_start(self, t_wait_us, demand_mb, limit_mb):
        self._accumulated_us = 0
        self._intervals = 0
        return None

    def on_interval(self, obs: IntervalObservation) -> AllocatorDecision:
        if not obs.job_running:
            return NO_CHANGE
        self._accumulated_us += interval_stall(obs.sample)
        self._intervals += 1
        pct = stall_percentage(
            self._accumulated_us, self._intervals * self.scenario.l_intv_us
        )
        return tmo_decision(self.config, pct)


class TmoAllocator(Allocator):
    """Keep the task's windowed stall percentage near a threshold."""

    name = "tmo"

    def __init__(self, config: TmoConfig):
        config.validate()
        self.tmo_config = config
        self._window: deque[int] = deque()
        self._window_sum = 0

    def bind(self, task, scenario, bounds) -> None:
        super().bind(task, scenario, bounds)
        slots = max(1, self.tmo_config.window_us // scenario.l_intv_us)
        self._window = deque(maxlen=slots)
        self._window_sum = 0
        self._reclaim_slots = max(1, self.tmo_config.reclaim_period_us // scenario.l_intv_us)
        self._intervals_seen = 0

    def recent_stall_percent(self) -> float:
        if not self._window:
            return 0.0
        span = len(self._window) * self.scenario.l_intv_us
        return stall_percentage(self._window_sum, span)

    def on_interval(self, obs: IntervalObservation) -> AllocatorDecision:
        s = interval_stall(obs.sample)
        if self._window.maxlen and len(self._window) == self._window.maxlen:
            self._window_sum -= self._window[0]
        self._window.append(s)
        self._window_sum += s
        self._intervals_seen += 1
        decision = tmo_decision(self.tmo_config, self.recent_stall_percent())
        if decision.delta_mb < 0 and self._intervals_seen % self._reclaim_slots:
            return NO_CHANGE
        return decision


def _mean_elapsed_us(scenario, allocator) -> float:
    from sara.simulator import run_scenario

    trace = run_scenario(scenario, allocator)
    return sum(r.elapsed_us for r in trace.periods) / len(trace.periods)


def _profiling_scenario(scenario, horizon_periods: int):
    """Jitter-free, injection-free copy of the scenario for offline search."""
    cfg = scenario.replace(
        horizon_periods=horizon_periods,
        long_stall=type(scenario.long_stall)(probability_per_period=0.0),
    )
    for task in cfg.tasks:
        cfg = cfg.replace_task(task.name, demand_jitter=0.0)
    return cfg


def offline_profile(task, scenario, horizon_periods: int = 100) -> OfflineProfile:
    """Smallest static limit whose jitter-free mean elapsed time meets the deadline.

    Binary search at 1 MB resolution over the task's working-set range.
    Raises InfeasibleTaskError when even the peak working set misses.
    """
    if task.t_bcet_us > task.deadline_us:
        raise InfeasibleTaskError(
            f"task {task.name}: best-case execution time {task.t_bcet_us} us "
            f"exceeds the deadline {task.deadline_us} us"
        )
    cfg = _profiling_scenario(scenario, horizon_periods)
    lo = int(task.working_set.min_mb)
    hi = int(task.working_set.max_mb)
    if _mean_elapsed_us(cfg, StaticAllocator(hi)) > task.deadline_us:
        raise InfeasibleTaskError(
            f"task {task.name}: misses its deadline even at the peak working set ({hi} MB)"
        )
    if _mean_elapsed_us(cfg, StaticAllocator(lo)) <= task.deadline_us:
        return OfflineProfile(static_limit_mb=float(lo))
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _mean_elapsed_us(cfg, StaticAllocator(mid)) <= task.deadline_us:
            hi = mid
        else:
            lo = mid
    return OfflineProfile(static_limit_mb=float(hi))


DEFAULT_TMO_HIGH_GRID = (0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8, 25.0, 40.0, 55.0, 70.0, 85.0)


def tmo_high_search(task, scenario, grid=DEFAULT_TMO_HIGH_GRID,
                    window_us: int = 10_000_000, step_mb: float | None = None) -> TmoConfig:
    """Highest static threshold whose mean elapsed time still meets the deadline.

    Swept on the scenario as given (jitter included). Falls back to the
    lowest candidate when nothing is feasible.
    """
    if not grid:
        raise ValueError("threshold grid must be non-empty")
    step = 1.0 if step_mb is None else step_mb
    best = None
    for threshold in sorted(grid):
        config = TmoConfig(psi_threshold_percent=threshold, window_us=window_us, step_mb=step)
        if _mean_elapsed_us(scenario, TmoAllocator(config)) <= task.deadline_us:
            best = config
    if best is None:
        best = TmoConfig(psi_threshold_percent=min(grid), window_us=window_us, step_mb=step)
    return best
