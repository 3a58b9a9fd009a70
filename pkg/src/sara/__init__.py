"""sara: stall-aware memory allocation for mixed-criticality workloads.

A deterministic simulator of memory-constrained systems running one soft
real-time periodic task next to a throughput-oriented application, a
stall-budget memory allocator with early job dropping, the standard
comparison policies (greedy, offline-profiled static, threshold reclaim),
and a CLI harness that runs experiment matrices to CSV/JSON.
"""

from sara.allocators import (
    Allocator,
    AllocatorDecision,
    GreedyAllocator,
    IntervalObservation,
    OfflineAllocator,
    SaraConfig,
    StallAwareAllocator,
    StaticAllocator,
    TmoAllocator,
    TmoConfig,
    make_allocator,
    offline_profile,
    tmo_high_search,
)
from sara.metrics import (
    LinearFit,
    PeriodStallSummary,
    StallSample,
    accumulate_period,
    fit_stall_linearity,
    interval_stall,
    stall_percentage,
)
from sara.presets import build_scenario, standard_matrix
from sara.simulator import (
    LongStallConfig,
    PeriodRecord,
    ScenarioConfig,
    SsdProfile,
    TaskSpec,
    TraceLog,
    WorkingSet,
    fault_cost,
    nonrt_throughput,
    run_scenario,
)

__version__ = "0.1.0"
