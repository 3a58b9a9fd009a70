"""Built-in workload and device presets.

The workload numbers (deadline, best-case execution time, working-set
min/avg/max) are the measured characteristics of a speech-recognition task
(sphinx), an image-classification task (opencv), and a graph-processing
application (graphchi). Touch rates are simulator model parameters chosen so
that a full working-set deficit stalls a task well past its deadline slack on
either device class.

Presets are plain data; build_scenario() assembles them into configurations
whose total memory is a fraction of the workloads' aggregate peak usage.
"""

from __future__ import annotations

from sara.simulator import (
    NON_RT,
    SOFT_RT,
    LongStallConfig,
    ScenarioConfig,
    SsdProfile,
    TaskSpec,
    WorkingSet,
)

__all__ = [
    "WORKLOADS",
    "SSD_PROFILES",
    "MEMORY_FRACTIONS",
    "build_scenario",
    "standard_matrix",
]

WORKLOADS: dict[str, TaskSpec] = {
    "sphinx": TaskSpec(
        name="sphinx",
        kind=SOFT_RT,
        period_us=1_500_000,
        deadline_us=1_500_000,
        t_bcet_us=480_000,
        working_set=WorkingSet(min_mb=136, avg_mb=281, max_mb=338),
        touch_rate_pages_per_us=0.25,
    ),
    "opencv": TaskSpec(
        name="opencv",
        kind=SOFT_RT,
        period_us=800_000,
        deadline_us=800_000,
        t_bcet_us=140_000,
        working_set=WorkingSet(min_mb=97, avg_mb=166, max_mb=183),
        touch_rate_pages_per_us=0.25,
    ),
    "graphchi": TaskSpec(
        name="graphchi",
        kind=NON_RT,
        working_set=WorkingSet(min_mb=36, avg_mb=244, max_mb=272),
        touch_rate_pages_per_us=0.3,
    ),
}

SSD_PROFILES: dict[str, SsdProfile] = {
    "slow": SsdProfile(
        name="slow",
        read_bw_bytes_per_s=560e6,
        write_bw_bytes_per_s=510e6,
        per_op_latency_us=90.0,
    ),
    "fast": SsdProfile(
        name="fast",
        read_bw_bytes_per_s=2100e6,
        write_bw_bytes_per_s=1000e6,
        per_op_latency_us=20.0,
    ),
}

# small-memory / large-memory: fraction of the workloads' aggregate peak.
MEMORY_FRACTIONS: dict[str, float] = {"small": 0.6, "large": 0.8}


def build_scenario(
    workload: str | TaskSpec = "sphinx",
    nonrt: str | TaskSpec = "graphchi",
    ssd: str | SsdProfile = "slow",
    memory_fraction: float = 0.6,
    seed: int = 42,
    horizon_periods: int = 500,
    l_intv_us: int = 5000,
    base_unit_mb: float = 8.0,
    long_stall: LongStallConfig | None = None,
    **overrides,
) -> ScenarioConfig:
    """Assemble a scenario from presets or explicit specs."""
    rt = WORKLOADS[workload] if isinstance(workload, str) else workload
    bg = WORKLOADS[nonrt] if isinstance(nonrt, str) else nonrt
    device = SSD_PROFILES[ssd] if isinstance(ssd, str) else ssd
    if not 0.0 < memory_fraction <= 1.0:
        raise ValueError(f"memory_fraction must be in (0, 1], got {memory_fraction}")
    peak = rt.working_set.max_mb + bg.working_set.max_mb
    config = ScenarioConfig(
        total_memory_mb=round(memory_fraction * peak, 3),
        ssd=device,
        tasks=(rt, bg),
        l_intv_us=l_intv_us,
        base_unit_mb=base_unit_mb,
        long_stall=long_stall or LongStallConfig(),
        seed=seed,
        horizon_periods=horizon_periods,
        **overrides,
    )
    config.validate()
    return config


def standard_matrix(workload: str = "sphinx", seed: int = 42,
                    horizon_periods: int = 500) -> dict[str, ScenarioConfig]:
    """The four standard configurations: {small,large} memory x {slow,fast} SSD."""
    matrix = {}
    for mem_name, fraction in MEMORY_FRACTIONS.items():
        for ssd_name in SSD_PROFILES:
            matrix[f"{mem_name}-{ssd_name}"] = build_scenario(
                workload=workload,
                ssd=ssd_name,
                memory_fraction=fraction,
                seed=seed,
                horizon_periods=horizon_periods,
            )
    return matrix
