import pytest

from sara.allocators import (
    AllocatorDecision,
    GreedyAllocator,
    StaticAllocator,
    make_allocator,
)
from sara.metrics import accumulate_period
from sara.presets import SSD_PROFILES, build_scenario
from sara.simulator import (
    AllocatorProtocolError,
    LongStallConfig,
    ScenarioConfig,
    Simulator,
    SsdProfile,
    StallAttribution,
    fault_cost,
    nonrt_throughput,
    run_scenario,
)


class TestFaultCost:
    def test_single_task_slow_read(self):
        ssd = SsdProfile("t", read_bw_bytes_per_s=560e6, write_bw_bytes_per_s=510e6,
                         per_op_latency_us=0.0)
        assert fault_cost(ssd, 1, 0.0) == pytest.approx(7.3142857, rel=1e-6)

    def test_single_task_fast_read(self):
        ssd = SsdProfile("t", read_bw_bytes_per_s=2100e6, write_bw_bytes_per_s=1000e6,
                         per_op_latency_us=0.0)
        assert fault_cost(ssd, 1, 0.0) == pytest.approx(1.9504762, rel=1e-6)

    def test_bandwidth_splits_between_tasks(self):
        ssd = SsdProfile("t", read_bw_bytes_per_s=560e6, write_bw_bytes_per_s=510e6,
                         per_op_latency_us=0.0)
        assert fault_cost(ssd, 2, 0.0) == pytest.approx(14.6285714, rel=1e-6)

    def test_dirty_pages_pay_writeback(self):
        ssd = SsdProfile("t", read_bw_bytes_per_s=560e6, write_bw_bytes_per_s=510e6,
                         per_op_latency_us=90.0)
        expected = 90.0 + 7.3142857142857135 + 0.25 * 8.031372549019608
        assert fault_cost(ssd, 1, 0.25) == pytest.approx(expected, rel=1e-9)

    def test_rejects_zero_tasks(self):
        with pytest.raises(ValueError):
            fault_cost(SSD_PROFILES["slow"], 0, 0.0)


class TestStepInterval:
    def test_no_deficit_no_stall(self, small_slow):
        sim = Simulator(small_slow, StaticAllocator(400.0))
        sim._maybe_start_job()
        samples = sim.step_interval({})
        rt = small_slow.soft_rt_task.name
        assert (samples[rt].s_mem_us, samples[rt].s_io_us) == (0, 0)
        assert sim.rt.progress_us == small_slow.l_intv_us

    def test_half_deficit_matches_closed_form(self):
        # touch 0.25 pages/us, q = 0.5, slow SSD fault cost 99.32212885154061 us:
        # rho = 12.415266106442576, raw = 4627.290285535313
        cfg = build_scenario(ssd="slow", memory_fraction=0.6, horizon_periods=10)
        demand = cfg.soft_rt_task.working_set.avg_mb
        sim = Simulator(cfg, StaticAllocator(demand / 2))
        sim._maybe_start_job()
        sim.rt.demand_mb = demand
        sim.rt.limit_mb = demand / 2
        sim.rt.resident_mb = demand / 2
        sim.rt.evicted_mb = demand / 2  # steady squeeze: backlog = demand - limit
        sim.nonrt.demand_mb = 1.0  # keep the non-RT side fault-free
        sim.nonrt.resident_mb = 1.0
        samples = sim.step_interval({})
        rt = samples[cfg.soft_rt_task.name]
        assert rt.s_mem_us == 4627
        assert rt.s_io_us == 3239
        assert sim.rt.progress_us == cfg.l_intv_us - 4627

    def test_io_heavy_attribution_flips_the_max(self):
        cfg = build_scenario(
            ssd="slow", memory_fraction=0.6, horizon_periods=10,
            stall_attribution=StallAttribution(mem_fraction=0.6, io_fraction=1.0),
        )
        sim = Simulator(cfg, StaticAllocator(cfg.soft_rt_task.working_set.avg_mb / 2))
        sim._maybe_start_job()
        samples = sim.step_interval({})
        rt = samples[cfg.soft_rt_task.name]
        assert rt.s_io_us > rt.s_mem_us > 0

    def test_long_stall_interval_fully_stalls_every_task(self):
        cfg = build_scenario(
            ssd="slow", memory_fraction=0.6, horizon_periods=10,
            long_stall=LongStallConfig(probability_per_period=1.0,
                                       min_duration_us=2_000_000,
                                       max_duration_us=2_000_000),
        )
        sim = Simulator(cfg, StaticAllocator(300.0))
        assert sim.long_stall_windows, "injection with p=1 must produce an event"
        sim._maybe_start_job()
        sim.now_us = sim.long_stall_windows[0][0]
        progress_before = sim.rt.progress_us
        samples = sim.step_interval({})
        for name in sim.intervals:
            s = samples[name]
            assert (s.s_mem_us, s.s_io_us) == (cfg.l_intv_us, cfg.l_intv_us)
        assert sim.rt.progress_us == progress_before

    def test_rejects_decision_for_nonrt_task(self, small_slow):
        sim = Simulator(small_slow, StaticAllocator(300.0))
        with pytest.raises(AllocatorProtocolError, match="remainder"):
            sim.step_interval({small_slow.nonrt_task.name: AllocatorDecision(1.0)})

    def test_rejects_decision_for_unknown_task(self, small_slow):
        sim = Simulator(small_slow, StaticAllocator(300.0))
        with pytest.raises(AllocatorProtocolError, match="unknown task"):
            sim.step_interval({"nope": AllocatorDecision(1.0)})


class TestRunScenario:
    def test_uncontended_periods_run_at_bcet(self):
        cfg = build_scenario(memory_fraction=1.0, horizon_periods=10)
        trace = run_scenario(cfg, GreedyAllocator())
        assert not cfg.has_contention
        for record in trace.periods:
            assert record.s_period_us == 0
            assert record.t_exec_us == cfg.soft_rt_task.t_bcet_us
            assert record.deadline_met

    def test_deterministic_reruns(self, small_slow):
        a = run_scenario(small_slow, make_allocator("sara", small_slow))
        b = run_scenario(small_slow, make_allocator("sara", small_slow))
        assert a.periods == b.periods
        assert a.intervals == b.intervals
        assert a.nonrt_completions_us == b.nonrt_completions_us

    def test_rejects_zero_horizon(self, small_slow):
        with pytest.raises(ValueError, match="horizon"):
            run_scenario(small_slow.replace(horizon_periods=0), GreedyAllocator())

    def test_record_bookkeeping_consistent(self, small_slow):
        trace = run_scenario(small_slow, make_allocator("sara", small_slow))
        for record in trace.periods:
            assert record.elapsed_us == record.t_wait_us + record.t_exec_us
            samples = trace.job_samples(record)
            assert accumulate_period(samples).s_period_us == record.s_period_us
            assert record.t_exec_us == len(samples) * small_slow.l_intv_us

    def test_execution_time_decomposes_into_bcet_plus_stall(self, small_slow):
        trace = run_scenario(small_slow, StaticAllocator(250.0))
        bcet = small_slow.soft_rt_task.t_bcet_us
        for record in trace.periods:
            if record.dropped or trace.overlaps_long_stall(record):
                continue
            slack = abs(record.t_exec_us - (record.s_period_us + bcet))
            assert slack <= 2 * small_slow.l_intv_us

    def test_capacity_conserved_every_interval(self, small_slow):
        trace = run_scenario(small_slow, make_allocator("sara", small_slow))
        names = list(trace.intervals)
        rows = [trace.intervals[n] for n in names]
        for per_task in zip(*rows):
            assert sum(r[3] for r in per_task) <= small_slow.total_memory_mb + 1e-9
            assert sum(r[4] for r in per_task) <= small_slow.total_memory_mb + 1e-9

    def test_limits_respect_clamp_bounds(self, small_slow):
        trace = run_scenario(small_slow, make_allocator("sara", small_slow))
        rt = small_slow.soft_rt_task
        bounds = small_slow.bounds_for(rt)
        for row in trace.intervals[rt.name]:
            assert bounds.floor_mb - 1e-9 <= row[3] <= bounds.ceiling_mb + 1e-9

    def test_late_finish_delays_next_job(self):
        # A static limit far below demand forces overruns and cascading waits.
        cfg = build_scenario(ssd="slow", memory_fraction=0.6, horizon_periods=12)
        trace = run_scenario(cfg, StaticAllocator(cfg.soft_rt_task.working_set.min_mb))
        overruns = [r for r in trace.periods if r.elapsed_us > cfg.soft_rt_task.period_us]
        assert overruns, "expected overruns at the floor limit"
        followers = [trace.periods[r.period_index + 1]
                     for r in overruns if r.period_index + 1 < len(trace.periods)]
        assert all(f.t_wait_us > 0 for f in followers)


class TestStaticLimitTrends:
    @pytest.mark.parametrize("ssd", ["slow", "fast"])
    def test_more_memory_never_means_more_stall(self, ssd):
        cfg = build_scenario(ssd=ssd, memory_fraction=0.6, horizon_periods=40)
        means = []
        for limit in (180.0, 230.0, 280.0, 330.0):
            trace = run_scenario(cfg, StaticAllocator(limit))
            means.append(sum(r.s_period_us for r in trace.periods) / len(trace.periods))
        assert all(a >= b for a, b in zip(means, means[1:]))

    def test_fast_ssd_never_slower_than_slow(self):
        for limit in (180.0, 230.0, 280.0):
            mean_exec = {}
            for ssd in ("slow", "fast"):
                cfg = build_scenario(ssd=ssd, memory_fraction=0.6, horizon_periods=40)
                trace = run_scenario(cfg, StaticAllocator(limit))
                mean_exec[ssd] = sum(r.t_exec_us for r in trace.periods) / len(trace.periods)
            assert mean_exec["fast"] <= mean_exec["slow"]


class TestNonRtThroughput:
    def test_unstalled_rate_is_unit_cost_reciprocal(self):
        cfg = build_scenario(memory_fraction=1.0, horizon_periods=20)
        trace = run_scenario(cfg, GreedyAllocator())
        # 100 ms per unit, fully resident: 10 units per second
        assert nonrt_throughput(trace) == pytest.approx(10.0, rel=0.01)

    def test_stall_halves_progress_rate(self):
        cfg = build_scenario(memory_fraction=1.0, horizon_periods=20)
        full = run_scenario(cfg, GreedyAllocator())
        contended = build_scenario(ssd="slow", memory_fraction=0.6, horizon_periods=20)
        squeezed = run_scenario(contended, GreedyAllocator())
        assert nonrt_throughput(squeezed) < nonrt_throughput(full)


class TestScenarioValidation:
    def test_period_must_align_with_interval(self, small_slow):
        bad = small_slow.replace_task(small_slow.soft_rt_task.name, period_us=1_500_777,
                                      deadline_us=1_500_777)
        with pytest.raises(ValueError, match="multiple"):
            bad.validate()

    def test_total_memory_must_cover_minima(self, small_slow):
        with pytest.raises(ValueError, match="working-set"):
            small_slow.replace(total_memory_mb=100.0).validate()

    def test_needs_exactly_one_of_each_kind(self, small_slow):
        with pytest.raises(ValueError, match="exactly one"):
            small_slow.replace(tasks=(small_slow.soft_rt_task,)).validate()
