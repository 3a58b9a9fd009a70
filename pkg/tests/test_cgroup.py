from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from sara.cgroup import (
    CgroupError,
    GroupHandle,
    PressureParseError,
    PressureReading,
    apply_limit,
    open_group,
    parse_pressure,
    render_pressure,
    sample_backend,
)

FIXTURES = Path(__file__).parent / "fixtures"


def write_pressure(root: Path, name: str, mem_total: int, io_total: int) -> None:
    for filename, total in (("memory.pressure", mem_total), ("io.pressure", io_total)):
        (root / filename).write_text(
            f"some avg10=0.00 avg60=0.00 avg300=0.00 total={total}\n"
            f"full avg10=0.00 avg60=0.00 avg300=0.00 total={max(0, total - 1000)}\n"
        )


@pytest.fixture()
def group(tmp_path):
    write_pressure(tmp_path, "both", 0, 0)
    (tmp_path / "memory.high").write_text("max\n")
    return open_group(tmp_path)


class TestParsePressure:
    def test_fixture_totals(self):
        some, full = parse_pressure((FIXTURES / "memory.pressure").read_text())
        assert some.total_us == 10_000
        assert full.total_us == 8_000
        assert some.line_kind == "some"

    def test_all_zero_file(self):
        text = ("some avg10=0.00 avg60=0.00 avg300=0.00 total=0\n"
                "full avg10=0.00 avg60=0.00 avg300=0.00 total=0\n")
        some, full = parse_pressure(text)
        assert (some.total_us, full.total_us) == (0, 0)

    def test_unknown_trailing_keys_ignored(self):
        some, full = parse_pressure((FIXTURES / "pressure_with_extra_keys.txt").read_text())
        assert some.total_us == 123_456
        assert full.total_us == 98_765

    def test_missing_total_is_an_error(self):
        with pytest.raises(PressureParseError, match="some"):
            parse_pressure((FIXTURES / "pressure_missing_total.txt").read_text())

    def test_missing_full_line_is_an_error(self):
        with pytest.raises(PressureParseError, match="full"):
            parse_pressure("some avg10=0.00 avg60=0.00 avg300=0.00 total=5\n")

    @given(st.integers(0, 10**12), st.integers(0, 10**12),
           st.floats(0, 100), st.floats(0, 100))
    def test_render_round_trip(self, some_total, full_total, avg_some, avg_full):
        some = PressureReading("some", round(avg_some, 2), 0.0, 0.0, some_total)
        full = PressureReading("full", round(avg_full, 2), 0.0, 0.0, full_total)
        parsed_some, parsed_full = parse_pressure(render_pressure(some, full))
        assert parsed_some == some
        assert parsed_full == full


class TestOpenGroup:
    def test_missing_files_named(self, tmp_path):
        with pytest.raises(CgroupError, match="memory.pressure"):
            open_group(tmp_path)


class TestSampleBackend:
    def test_first_sample_sets_baseline(self, group):
        sample, reset = sample_backend(group, 5000)
        assert reset
        assert (sample.s_mem_us, sample.s_io_us) == (0, 0)

    def test_deltas_between_reads(self, group, tmp_path):
        sample_backend(group, 5000)
        write_pressure(tmp_path, "both", 3000, 4500)
        sample, reset = sample_backend(group, 5000)
        assert not reset
        assert (sample.s_mem_us, sample.s_io_us) == (3000, 4500)

    def test_no_advance_is_zero(self, group):
        sample_backend(group, 5000)
        sample, reset = sample_backend(group, 5000)
        assert not reset
        assert (sample.s_mem_us, sample.s_io_us) == (0, 0)

    def test_delta_clamped_to_interval(self, group, tmp_path):
        sample_backend(group, 5000)
        write_pressure(tmp_path, "both", 7000, 2000)
        sample, _ = sample_backend(group, 5000)
        assert sample.s_mem_us == 5000
        assert sample.s_io_us == 2000

    def test_counter_regression_resets(self, group, tmp_path):
        sample_backend(group, 5000)
        write_pressure(tmp_path, "both", 9000, 9000)
        sample_backend(group, 5000)
        write_pressure(tmp_path, "both", 100, 100)  # group recreated
        sample, reset = sample_backend(group, 5000)
        assert reset
        assert (sample.s_mem_us, sample.s_io_us) == (0, 0)
        write_pressure(tmp_path, "both", 2100, 150)
        sample, reset = sample_backend(group, 5000)
        assert not reset
        assert (sample.s_mem_us, sample.s_io_us) == (2000, 50)

    def test_interval_indices_increase(self, group):
        first, _ = sample_backend(group, 5000)
        second, _ = sample_backend(group, 5000)
        assert second.interval_index == first.interval_index + 1

    def test_deltas_sum_to_counter_advance(self, group, tmp_path):
        sample_backend(group, 5000)
        totals = [1200, 2400, 4400, 4400, 5000]
        collected = 0
        for total in totals:
            write_pressure(tmp_path, "both", total, 0)
            sample, reset = sample_backend(group, 5000)
            assert not reset
            collected += sample.s_mem_us
        assert collected == totals[-1]


class TestApplyLimit:
    def test_writes_decimal_bytes(self, group, tmp_path):
        written = apply_limit(group, 338.0)
        assert written == 338 * 1024 * 1024 == 354_418_688
        assert (tmp_path / "memory.high").read_text().strip() == "354418688"

    def test_round_trip_confirms(self, group):
        assert apply_limit(group, 256.0) == 256 * 1024 * 1024

    def test_missing_group_names_path(self, tmp_path):
        handle = GroupHandle(path=tmp_path / "gone")
        with pytest.raises(CgroupError, match="gone"):
            apply_limit(handle, 100.0)

    def test_rejects_sub_mb_limits(self, group):
        with pytest.raises(ValueError, match="at least 1 MB"):
            apply_limit(group, 0.5)
