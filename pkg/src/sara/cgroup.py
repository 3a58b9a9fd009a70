"""cgroup-v2 backend: pressure-file sampling and memory.high limits.

Gives the allocators the same per-interval stall samples on a live system
that the simulator produces synthetically: the delta of the `some` pressure
totals between consecutive reads, clamped to the interval length. Applying a
limit writes decimal bytes to memory.high with read-back confirmation.

Parsing and the counter-delta logic are fully testable against fixture
files; nothing here requires root or a running kernel until a GroupHandle
points at a real cgroup directory.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from sara.metrics import StallSample

__all__ = [
    "PressureReading",
    "GroupHandle",
    "CgroupError",
    "PressureParseError",
    "parse_pressure",
    "render_pressure",
    "open_group",
    "sample_backend",
    "apply_limit",
]

MB = 1024 * 1024


class CgroupError(OSError):
    """A cgroup file was missing, unreadable, or failed to confirm a write."""


class PressureParseError(ValueError):
    """A pressure file did not match the expected grammar."""


@dataclass(frozen=True)
class PressureReading:
    """One line of a pressure file: windowed percentages plus the total counter."""

    line_kind: str  # "some" or "full"
    avg10: float
    avg60: float
    avg300: float
    total_us: int


@dataclass
class GroupHandle:
    """One cgroup directory plus the last-seen pressure counters.

    Single-owner: exactly one sampler may drive a handle, since sampling
    advances the stored counters.
    """

    path: Path
    last_mem_total_us: int | None = None
    last_io_total_us: int | None = None
    interval_index: int = 0


_LINE_RE = re.compile(
    r"^(?P<kind>some|full)\s+avg10=(?P<avg10>\d+(?:\.\d+)?)\s+avg60=(?P<avg60>\d+(?:\.\d+)?)"
    r"\s+avg300=(?P<avg300>\d+(?:\.\d+)?)\s+total=(?P<total>\d+)(?:\s+\S+=\S+)*\s*$"
)


def parse_pressure(text: str) -> tuple[PressureReading, PressureReading]:
    """Parse a pressure file into its (some, full) readings.

    Tolerates extra whitespace and unknown trailing key=value fields; raises
    PressureParseError naming the offending line otherwise.
    """
    readings: dict[str, PressureReading] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        match = _LINE_RE.match(line.strip())
        if match is None:
            token = line.strip().split()[0] if line.strip() else line
            raise PressureParseError(f"malformed pressure line starting at {token!r}: {line!r}")
        reading = PressureReading(
            line_kind=match["kind"],
            avg10=float(match["avg10"]),
            avg60=float(match["avg60"]),
            avg300=float(match["avg300"]),
            total_us=int(match["total"]),
        )
        if reading.line_kind in readings:
            raise PressureParseError(f"duplicate {reading.line_kind!r} line")
        readings[reading.line_kind] = reading
    for kind in ("some", "full"):
        if kind not in readings:
            raise PressureParseError(f"missing {kind!r} line")
    return readings["some"], readings["full"]


def render_pressure(some: PressureReading, full: PressureReading) -> str:
    """Render readings back into the kernel's file format."""
    lines = []
    for reading in (some, full):
        lines.append(
            f"{reading.line_kind} avg10={reading.avg10:.2f} avg60={reading.avg60:.2f} "
            f"avg300={reading.avg300:.2f} total={reading.total_us}"
        )
    return "\n".join(lines) + "\n"


def open_group(path: str | Path) -> GroupHandle:
    """Validate that a cgroup directory exposes the files this backend needs."""
    root = Path(path)
    missing = [
        name for name in ("memory.pressure", "io.pressure", "memory.high")
        if not (root / name).exists()
    ]
    if missing:
        raise CgroupError(f"cgroup {root} is missing {', '.join(missing)}")
    return GroupHandle(path=root)


def _read_some_total(group: GroupHandle, filename: str) -> int:
    path = group.path / filename
    try:
        text = path.read_text()
    except OSError as exc:
        raise CgroupError(f"cannot read {path}: {exc}") from exc
    some, _full = parse_pressure(text)
    return some.total_us


def sample_backend(group: GroupHandle, l_intv_us: int) -> tuple[StallSample, bool]:
    """One interval's stall sample from the pressure counter deltas.

    Returns (sample, reset). A counter regression (group recreated) resets
    the baseline and yields a zero sample with reset=True. Deltas are
    clamped to the interval length, mirroring the simulator's bound.
    """
    mem_total = _read_some_total(group, "memory.pressure")
    io_total = _read_some_total(group, "io.pressure")
    index = group.interval_index
    group.interval_index += 1

    reset = (
        group.last_mem_total_us is None
        or group.last_io_total_us is None
        or mem_total < group.last_mem_total_us
        or io_total < group.last_io_total_us
    )
    if reset:
        group.last_mem_total_us = mem_total
        group.last_io_total_us = io_total
        return StallSample(interval_index=index, s_mem_us=0, s_io_us=0), True

    s_mem = min(l_intv_us, mem_total - group.last_mem_total_us)
    s_io = min(l_intv_us, io_total - group.last_io_total_us)
    group.last_mem_total_us = mem_total
    group.last_io_total_us = io_total
    return StallSample(interval_index=index, s_mem_us=s_mem, s_io_us=s_io), False


def apply_limit(group: GroupHandle, limit_mb: float) -> int:
    """Write a memory.high limit in bytes and confirm by read-back.

    Returns the byte value written. Raises CgroupError on IO failure or a
    mismatched read-back, naming the path involved.
    """
    if limit_mb < 1:
        raise ValueError(f"limit must be at least 1 MB, got {limit_mb}")
    path = group.path / "memory.high"
    value = int(limit_mb * MB)
    try:
        path.write_text(f"{value}\n")
        echoed = path.read_text().strip()
    except OSError as exc:
        raise CgroupError(f"cannot apply limit via {path}: {exc}") from exc
    if echoed != str(value):
        raise CgroupError(f"{path}: wrote {value}, read back {echoed!r}")
    return value
