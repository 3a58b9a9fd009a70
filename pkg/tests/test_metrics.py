import pytest
from hypothesis import given, strategies as st

from sara.metrics import (
    StallSample,
    accumulate_period,
    fit_stall_linearity,
    interval_stall,
    stall_percentage,
)


def sample(i, mem, io):
    return StallSample(interval_index=i, s_mem_us=mem, s_io_us=io)


class TestIntervalStall:
    @pytest.mark.parametrize("mem,io,expected", [
        (3000, 4500, 4500),
        (0, 0, 0),
        (5000, 1200, 5000),
    ])
    def test_max_of_pair(self, mem, io, expected):
        assert interval_stall(sample(0, mem, io)) == expected

    @given(st.integers(0, 5000), st.integers(0, 5000))
    def test_monotone_and_idempotent(self, mem, io):
        s = interval_stall(sample(0, mem, io))
        assert s >= mem and s >= io
        assert interval_stall(sample(0, s, s)) == s
        assert interval_stall(sample(0, mem + 1, io)) >= s


class TestAccumulatePeriod:
    def test_sums_interval_stalls(self):
        samples = [sample(i, v, 0) for i, v in enumerate([1000, 2000, 3000])]
        assert accumulate_period(samples).s_period_us == 6000

    def test_empty_stream(self):
        summary = accumulate_period([])
        assert summary.s_period_us == 0
        assert summary.sample_count == 0

    def test_mixed_channels(self):
        # max(2000,4000) + max(3000,1000) = 4000 + 3000
        samples = [sample(0, 2000, 4000), sample(1, 3000, 1000)]
        assert accumulate_period(samples).s_period_us == 7000

    def test_rejects_duplicate_interval_index(self):
        with pytest.raises(ValueError, match="duplicate interval_index"):
            accumulate_period([sample(3, 100, 0), sample(3, 200, 0)])

    @given(st.lists(st.tuples(st.integers(0, 5000), st.integers(0, 5000)), max_size=30))
    def test_order_independent(self, values):
        samples = [sample(i, m, io) for i, (m, io) in enumerate(values)]
        total = accumulate_period(samples).s_period_us
        assert accumulate_period(list(reversed(samples))).s_period_us == total


class TestStallPercentage:
    def test_paper_scale_example(self):
        # 10,000 us over a 10 s window
        assert stall_percentage(10_000, 10_000_000) == pytest.approx(0.1)

    def test_zero_stall(self):
        assert stall_percentage(0, 10_000_000) == 0.0

    def test_fully_stalled_window(self):
        assert stall_percentage(5000, 5000) == 100.0

    def test_rejects_empty_window(self):
        with pytest.raises(ValueError, match="window"):
            stall_percentage(0, 0)

    def test_rejects_stall_beyond_window(self):
        with pytest.raises(ValueError, match="exceeds"):
            stall_percentage(5001, 5000)

    @given(st.integers(0, 10**9), st.integers(1, 10**9))
    def test_round_trip(self, stall, window):
        if stall > window:
            stall = window
        pct = stall_percentage(stall, window)
        assert abs(pct / 100.0 * window - stall) <= 1.0


class TestFitStallLinearity:
    def test_exact_line(self):
        points = [(x, x + 480_000.0) for x in (0.0, 250_000.0, 500_000.0, 1_000_000.0)]
        fit = fit_stall_linearity(points)
        assert fit.slope == pytest.approx(1.0)
        assert fit.intercept_us == pytest.approx(480_000.0)
        assert fit.r_squared == pytest.approx(1.0)

    def test_flat_line(self):
        points = [(0.0, 480_000.0), (500_000.0, 480_000.0), (900_000.0, 480_000.0)]
        fit = fit_stall_linearity(points)
        assert fit.slope == pytest.approx(0.0, abs=1e-9)
        assert fit.intercept_us == pytest.approx(480_000.0)
        assert fit.r_squared == 1.0

    def test_rejects_single_point(self):
        with pytest.raises(ValueError, match="at least 2"):
            fit_stall_linearity([(1.0, 2.0)])

    def test_rejects_degenerate_x(self):
        with pytest.raises(ValueError, match="degenerate"):
            fit_stall_linearity([(5.0, 1.0), (5.0, 2.0), (5.0, 3.0)])
