"""Stall accounting primitives.

All stall quantities are absolute durations in integer microseconds, the
same unit the kernel's pressure counters report. Per-interval stall is the
max of memory stall and I/O stall (page-fault latency can surface on either
side); per-period stall is the sum of the per-interval values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "StallSample",
    "PeriodStallSummary",
    "LinearFit",
    "interval_stall",
    "accumulate_period",
    "stall_percentage",
    "fit_stall_linearity",
]


@dataclass(frozen=True)
class StallSample:
    """Memory and I/O stall observed for one task over one monitoring interval."""

    interval_index: int
    s_mem_us: int
    s_io_us: int


@dataclass(frozen=True)
class PeriodStallSummary:
    """Total stall accumulated by one job over its period."""

    period_index: int
    s_period_us: int
    sample_count: int


@dataclass(frozen=True)
class LinearFit:
    """Ordinary least squares fit of execution time against per-period stall."""

    slope: float
    intercept_us: float
    r_squared: float


def interval_stall(sample: StallSample) -> int:
    """Stall attributed to one interval: max of the memory and I/O stall."""
    return max(sample.s_mem_us, sample.s_io_us)


def accumulate_period(samples: Iterable[StallSample], period_index: int = 0) -> PeriodStallSummary:
    """Sum interval stalls over one period's sample stream.

    Samples must carry distinct interval indices; an empty stream yields a
    zero total.
    """
    total = 0
    count = 0
    seen: set[int] = set()
    for sample in samples:
        if sample.interval_index in seen:
            raise ValueError(
                f"duplicate interval_index {sample.interval_index} in period sample stream"
            )
        seen.add(sample.interval_index)
        total += interval_stall(sample)
        count += 1
    return PeriodStallSummary(period_index=period_index, s_period_us=total, sample_count=count)


def stall_percentage(total_stall_us: int, window_us: int) -> float:
    """Stall as a percentage of an observation window.

    10,000 us of stall over a 10 s window is 0.1%. Used by the
    threshold-driven baseline allocators; the stall-budget controller works
    on absolute durations instead.
    """
    if window_us <= 0:
        raise ValueError(f"window must be positive, got {window_us} us")
    if total_stall_us > window_us:
        raise ValueError(
            f"total stall {total_stall_us} us exceeds window {window_us} us"
        )
    return 100.0 * total_stall_us / window_us


def fit_stall_linearity(points: Sequence[tuple[float, float]]) -> LinearFit:
    """OLS fit of t_exec = slope * s_period + intercept over per-period points.

    Each point is (s_period_us, t_exec_us). Under memory pressure the
    per-period points of a fixed allocation line up with slope ~1 and
    intercept ~the task's best-case execution time; the fit quantifies that.

    Raises ValueError for fewer than two points or degenerate (constant x)
    input.
    """
    if len(points) < 2:
        raise ValueError(f"need at least 2 points for a fit, got {len(points)}")
    x = np.asarray([p[0] for p in points], dtype=float)
    y = np.asarray([p[1] for p in points], dtype=float)
    if np.ptp(x) == 0.0:
        raise ValueError(
            f"degenerate fit input: all {len(points)} points share s_period={x[0]:.0f} us"
        )
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    ss_res = float(np.dot(residuals, residuals))
    ss_tot = float(np.dot(y - y.mean(), y - y.mean()))
    # Constant y over varying x is fit exactly by the flat line.
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return LinearFit(slope=float(slope), intercept_us=float(intercept), r_squared=r_squared)
