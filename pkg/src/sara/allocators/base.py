"""Allocator interface shared by the stall-budget controller and the baselines.

The simulation engine drives allocators through three callbacks: one at each
job arrival, one per monitoring interval, and one at job completion. The
per-interval callback returns a decision; the engine clamps and applies it
before stepping the next interval.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING

from sara.metrics import StallSample

if TYPE_CHECKING:
    from sara.simulator import PeriodRecord, ScenarioConfig, TaskSpec

__all__ = ["AllocatorDecision", "IntervalObservation", "LimitBounds", "Allocator"]

NO_CHANGE: "AllocatorDecision"


@dataclass(frozen=True)
class AllocatorDecision:
    """Signed memory-limit adjustment plus an optional drop directive.

    Positive delta grants memory to the soft RT task; negative delta
    reclaims it for the non-RT side. A drop directive aborts the running
    job and releases its memory down to the working-set minimum.
    """

    delta_mb: float = 0.0
    drop_job: bool = False


NO_CHANGE = AllocatorDecision()


@dataclass(frozen=True)
class IntervalObservation:
    """What an allocator may observe at an interval boundary.

    demand_mb models the unconstrained usage a greedy policy would read from
    the accounting files; limit_mb is the currently enforced limit after
    clamping, so allocator-side bookkeeping cannot drift from the engine.
    job_running is False between jobs (the sample is then all zeros).
    """

    sample: StallSample
    demand_mb: float
    limit_mb: float
    job_running: bool


@dataclass(frozen=True)
class LimitBounds:
    """Clamp range for one task's memory limit.

    Floor is the task's working-set minimum; ceiling leaves every other
    task's minimum available, so no decision can starve a peer outright.
    """

    floor_mb: float
    ceiling_mb: float

    def clamp(self, limit_mb: float) -> float:
        return min(self.ceiling_mb, max(self.floor_mb, limit_mb))


class Allocator(ABC):
    """Per-interval memory-limit policy for one soft RT task.

    Implementations are single-owner state machines: the engine calls them
    from one thread, in event order, and they share nothing between
    instances.
    """

    name = "allocator"

    def bind(self, task: "TaskSpec", scenario: "ScenarioConfig", bounds: LimitBounds) -> None:
        """Called once before the run with the task and its clamp bounds."""
        self.task = task
        self.scenario = scenario
        self.bounds = bounds

    def initial_limit_mb(self) -> float:
        """Limit applied before the first decision; defaults to the average working set."""
        return self.bounds.clamp(self.task.working_set.avg_mb)

    def on_period_start(self, t_wait_us: int, demand_mb: float,
                        limit_mb: float) -> "AllocatorDecision | None":
        """A new job arrived after waiting t_wait_us past its period boundary.

        May return a decision to apply before the job's first interval;
        usage-tracking policies use this to react to the new job's footprint
        without a one-interval lag.
        """
        return None

    @abstractmethod
    def on_interval(self, obs: IntervalObservation) -> AllocatorDecision:
        """Decide a limit adjustment from the latest interval's observation."""

    def on_job_complete(self, record: "PeriodRecord") -> None:
        """The running job finished or was dropped; record is its outcome."""
