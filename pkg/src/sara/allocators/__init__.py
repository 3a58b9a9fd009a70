"""Allocator implementations and the shared callback interface."""

from __future__ import annotations

from sara.allocators.base import (
    Allocator,
    AllocatorDecision,
    IntervalObservation,
    LimitBounds,
    NO_CHANGE,
)
from sara.allocators.baselines import (
    DEFAULT_TMO_HIGH_GRID,
    GreedyAllocator,
    InfeasibleTaskError,
    OfflineAllocator,
    OfflineProfile,
    PeriodThresholdAllocator,
    StaticAllocator,
    TmoAllocator,
    TmoConfig,
    greedy_decision,
    offline_profile,
    tmo_decision,
    tmo_high_search,
)
from sara.allocators.stall_aware import SaraConfig, SaraJobState, StallAwareAllocator

ALLOCATOR_NAMES = ("sara", "greedy", "offline", "tmo-low", "tmo-high")

TMO_LOW_THRESHOLD_PERCENT = 0.1

SEARCH_HORIZON_PERIODS = 150


def make_allocator(name: str, scenario, **params) -> Allocator:
    """Build a named allocator for a scenario.

    "offline" and "tmo-high" run their profiling searches here unless a
    static_limit_mb / threshold_percent parameter pins the result.
    """
    task = scenario.soft_rt_task
    if name == "sara":
        return StallAwareAllocator(
            config=params.get("config"), drop_enabled=params.get("drop_enabled")
        )
    if name == "greedy":
        return GreedyAllocator()
    if name == "static":
        return StaticAllocator(limit_mb=params["limit_mb"])
    if name == "offline":
        if "static_limit_mb" in params:
            profile = OfflineProfile(static_limit_mb=params["static_limit_mb"])
        else:
            profile = offline_profile(
                task, scenario.replace(horizon_periods=min(
                    100, scenario.horizon_periods)),
            )
        return OfflineAllocator(profile)
    if name == "tmo-low":
        allocator = TmoAllocator(TmoConfig(
            psi_threshold_percent=params.get("threshold_percent", TMO_LOW_THRESHOLD_PERCENT),
            window_us=params.get("window_us", 10_000_000),
            step_mb=params.get("step_mb", 1.0),
        ))
        allocator.name = "tmo-low"
        return allocator
    if name == "tmo-high":
        if "threshold_percent" in params:
            config = TmoConfig(
                psi_threshold_percent=params["threshold_percent"],
                window_us=params.get("window_us", 10_000_000),
                step_mb=params.get("step_mb", 1.0),
            )
        else:
            horizon = min(SEARCH_HORIZON_PERIODS, scenario.horizon_periods)
            config = tmo_high_search(
                task, scenario.replace(horizon_periods=horizon),
                window_us=params.get("window_us", 10_000_000),
            )
        allocator = TmoAllocator(config)
        allocator.name = "tmo-high"
        return allocator
    raise ValueError(f"unknown allocator {name!r}; expected one of {ALLOCATOR_NAMES}")


__all__ = [
    "Allocator",
    "AllocatorDecision",
    "IntervalObservation",
    "LimitBounds",
    "NO_CHANGE",
    "ALLOCATOR_NAMES",
    "make_allocator",
    "SaraConfig",
    "SaraJobState",
    "StallAwareAllocator",
    "GreedyAllocator",
    "StaticAllocator",
    "OfflineAllocator",
    "OfflineProfile",
    "PeriodThresholdAllocator",
    "TmoAllocator",
    "TmoConfig",
    "greedy_decision",
    "tmo_decision",
    "offline_profile",
    "tmo_high_search",
    "InfeasibleTaskError",
    "DEFAULT_TMO_HIGH_GRID",
    "TMO_LOW_THRESHOLD_PERCENT",
]
