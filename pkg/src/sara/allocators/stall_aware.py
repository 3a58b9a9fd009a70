"""Stall-aware dynamic memory allocation with early job dropping.

Each soft RT job gets a stall budget: the slack between its deadline and its
best-case execution time, less any late start. The budget is spread over the
remaining monitoring intervals; whenever an interval stalls longer than its
share, memory is granted in proportion to the excess, and reclaimed in
proportion to the shortfall. A job whose budget is exhausted while most of
its observed intervals were near-fully stalled is caught in a system-level
long stall and is dropped early, freeing memory instead of dragging the
following periods late.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from sara.allocators.base import (
    Allocator,
    AllocatorDecision,
    IntervalObservation,
    LimitBounds,
    NO_CHANGE,
)
from sara.metrics import StallSample, interval_stall

__all__ = [
    "SaraConfig",
    "SaraJobState",
    "ideal_period_stall",
    "ideal_interval_stall",
    "memory_adjustment",
    "is_long_stall",
    "should_drop",
    "on_period_start",
    "on_interval",
    "StallAwareAllocator",
]


@dataclass(frozen=True)
class SaraConfig:
    """Controller parameters.

    long_stall_m / long_stall_n: a job is considered caught in a long stall
    once at least m% of its observed intervals stalled for more than n% of
    the interval length. Both are per-workload profiling outputs.
    """

    base_unit_mb: float = 1.0
    l_intv_us: int = 5000
    long_stall_m: float = 80.0
    long_stall_n: float = 90.0
    drop_enabled: bool = True
    deadline_guard_us: int | None = None

    def validate(self) -> None:
        if self.base_unit_mb <= 0:
            raise ValueError("base_unit_mb must be positive")
        if self.l_intv_us <= 0:
            raise ValueError("l_intv_us must be positive")
        for label, value in (("m", self.long_stall_m), ("n", self.long_stall_n)):
            if not 0 < value <= 100:
                raise ValueError(f"long_stall_{label} must be in (0, 100], got {value}")
        if self.deadline_guard_us is not None and self.deadline_guard_us < 0:
            raise ValueError("deadline_guard_us must be non-negative")

    @property
    def severe_threshold_us(self) -> float:
        return self.long_stall_n / 100.0 * self.l_intv_us

    @property
    def effective_guard_us(self) -> int:
        """Completion headroom before the deadline.

        Interval quantization and the one-interval decision latency land
        completions within a couple of intervals of the aim point, so aiming
        exactly at the deadline would turn half of that scatter into misses.
        """
        if self.deadline_guard_us is None:
            return 3 * self.l_intv_us
        return self.deadline_guard_us


@dataclass(frozen=True)
class SaraJobState:
    """Per-job controller state, advanced once per monitoring interval."""

    s_ideal_period_us: int
    n_remain_intv: int
    accumulated_us: int = 0
    severe_interval_count: int = 0
    total_interval_count: int = 0
    current_limit_mb: float = 0.0


def ideal_period_stall(deadline_us: int, t_bcet_us: int, t_wait_us: int) -> int:
    """Stall a job can absorb and still finish at its deadline.

    A negative result means the deadline is already infeasible: the wait ate
    more than the period's slack.
    """
    return deadline_us - t_bcet_us - t_wait_us


def ideal_interval_stall(s_ideal_period_us: float, accumulated_us: int, n_remain: int) -> float:
    """Per-interval stall target: the unspent budget spread over what remains."""
    if n_remain < 1:
        raise ValueError(f"n_remain must be >= 1, got {n_remain}")
    return (s_ideal_period_us - accumulated_us) / n_remain


def memory_adjustment(base_unit_mb: float, s_intv_us: float, s_ideal_intv_us: float,
                      l_intv_us: int) -> float:
    """Limit delta in MB: positive grants memory, negative reclaims it.

    Proportional to the stall excess over the target, normalized by the
    interval length so one base unit corresponds to a fully mis-stalled
    interval.
    """
    return base_unit_mb * (s_intv_us - s_ideal_intv_us) / l_intv_us


def is_long_stall(severe_count: int, total_count: int, m_percent: float) -> bool:
    """True when at least m% of the counted intervals stalled severely."""
    if total_count < 1:
        raise ValueError("total_count must be >= 1")
    return severe_count * 100 >= m_percent * total_count


def should_drop(state: SaraJobState, config: SaraConfig) -> bool:
    """Drop once the budget is overdrawn during a long-stall pattern.

    Both legs are required: an overdrawn budget alone can still be a slow
    overload that granting memory fixes, and a severe pattern alone may
    still finish in time.
    """
    if not config.drop_enabled or state.total_interval_count < 1:
        return False
    if state.s_ideal_period_us - state.accumulated_us >= 0:
        return False
    return is_long_stall(
        state.severe_interval_count, state.total_interval_count, config.long_stall_m
    )


def on_period_start(deadline_us: int, t_bcet_us: int, period_us: int, t_wait_us: int,
                    config: SaraConfig, current_limit_mb: float) -> SaraJobState:
    """Fresh controller state for a job that started t_wait_us late.

    The wait consumes monitoring intervals off the period; at least one
    interval is always kept so the per-interval target stays defined even
    for jobs that start past their deadline. The configured guard is taken
    off the budget so completions aim slightly before the deadline.
    """
    n_total = period_us // config.l_intv_us
    n_remain = max(1, n_total - t_wait_us // config.l_intv_us)
    budget = ideal_period_stall(deadline_us, t_bcet_us, t_wait_us)
    return SaraJobState(
        s_ideal_period_us=budget - config.effective_guard_us,
        n_remain_intv=n_remain,
        current_limit_mb=current_limit_mb,
    )


def on_interval(state: SaraJobState, sample: StallSample, config: SaraConfig,
                bounds: LimitBounds) -> tuple[SaraJobState, AllocatorDecision]:
    """Advance the controller by one observed interval.

    Updates the stall ledger, recomputes the per-interval target from the
    unspent budget, and emits a proportional limit delta, or a drop
    directive when the long-stall exit fires. The returned delta is the
    clamped raw adjustment; MB quantization is left to the caller.
    """
    s_intv = interval_stall(sample)
    accumulated = state.accumulated_us + s_intv
    total = state.total_interval_count + 1
    severe = state.severe_interval_count + (s_intv > config.severe_threshold_us)
    updated = replace(
        state,
        accumulated_us=accumulated,
        total_interval_count=total,
        severe_interval_count=severe,
    )

    if should_drop(updated, config):
        release = bounds.floor_mb - state.current_limit_mb
        updated = replace(updated, current_limit_mb=bounds.floor_mb,
                          n_remain_intv=max(1, state.n_remain_intv - 1))
        return updated, AllocatorDecision(delta_mb=release, drop_job=True)

    target = ideal_interval_stall(
        updated.s_ideal_period_us, accumulated, max(1, updated.n_remain_intv)
    )
    delta = memory_adjustment(config.base_unit_mb, s_intv, target, config.l_intv_us)
    new_limit = bounds.clamp(state.current_limit_mb + delta)
    applied = new_limit - state.current_limit_mb
    updated = replace(updated, current_limit_mb=new_limit,
                      n_remain_intv=max(1, state.n_remain_intv - 1))
    return updated, AllocatorDecision(delta_mb=applied)


class StallAwareAllocator(Allocator):
    """Stateful wrapper wiring the controller into the engine callbacks.

    Applies MB-granular limit updates: fractional deltas pool in a residual
    and are emitted once a whole MB accumulates, since real limit interfaces
    are page granular. Residual that the clamp cannot honor is discarded to
    avoid windup against the bounds.
    """

    name = "sara"

    def __init__(self, config: SaraConfig | None = None, drop_enabled: bool | None = None):
        self._config = config
        self._drop_override = drop_enabled
        self._state: SaraJobState | None = None
        self._residual_mb = 0.0
        self._limit_mb = 0.0
        self._dropped = False

    def bind(self, task, scenario, bounds: LimitBounds) -> None:
        super().bind(task, scenario, bounds)
        if self._config is None:
            self._config = SaraConfig(
                base_unit_mb=scenario.base_unit_mb, l_intv_us=scenario.l_intv_us
            )
        elif self._config.l_intv_us != scenario.l_intv_us:
            self._config = replace(self._config, l_intv_us=scenario.l_intv_us)
        if self._drop_override is not None:
            self._config = replace(self._config, drop_enabled=self._drop_override)
        self._config.validate()
        self._limit_mb = self.initial_limit_mb()

    @property
    def config(self) -> SaraConfig:
        assert self._config is not None
        return self._config

    def on_period_start(self, t_wait_us: int, demand_mb: float, limit_mb: float) -> None:
        task = self.task
        self._dropped = False
        self._limit_mb = limit_mb
        self._state = on_period_start(
            task.deadline_us, task.t_bcet_us, task.period_us, t_wait_us,
            self.config, self._limit_mb,
        )
        return None

    def on_interval(self, obs: IntervalObservation) -> AllocatorDecision:
        if not obs.job_running or self._state is None or self._dropped:
            self._limit_mb = obs.limit_mb
            return NO_CHANGE
        state = replace(self._state, current_limit_mb=obs.limit_mb)
        new_state, decision = on_interval(state, obs.sample, self.config, self.bounds)
        self._state = new_state
        if decision.drop_job:
            self._dropped = True
            self._residual_mb = 0.0
            self._limit_mb = self.bounds.floor_mb
            return decision
        self._residual_mb += decision.delta_mb
        whole = math.trunc(self._residual_mb)
        applied = self.bounds.clamp(obs.limit_mb + whole) - obs.limit_mb
        self._residual_mb -= whole
        self._limit_mb = obs.limit_mb + applied
        self._state = replace(new_state, current_limit_mb=self._limit_mb)
        return AllocatorDecision(delta_mb=applied)

    def on_job_complete(self, record) -> None:
        self._state = None
