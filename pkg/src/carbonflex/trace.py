"""Carbon-intensity traces: loading, synthesis and window queries.

A trace is a uniformly spaced series of grid carbon intensities in
gCO2eq/kWh. Slot ``i`` covers ``[start_time + i*slot_duration,
start_time + (i+1)*slot_duration)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

HEADER = ("timestamp", "carbon_intensity_gco2_per_kwh")
DEFAULT_START = datetime(2022, 1, 1, tzinfo=timezone.utc)


class TraceError(ValueError):
    """Raised for malformed or invalid trace data."""


def _as_utc(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 timestamp; a trailing ``Z`` and naive values mean UTC."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    return _as_utc(datetime.fromisoformat(text))


def format_timestamp(ts: datetime) -> str:
    ts = _as_utc(ts)
    if ts.microsecond:
        return ts.strftime("%Y-%m-%dT%H:%M:%S.%fZ")
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True, eq=False)
class CarbonTrace:
    """Immutable carbon-intensity series.

    Args:
        intensities: one value per slot, gCO2eq/kWh.
        start_time: UTC timestamp of slot 0.
        slot_duration: slot length in hours.
    """

    intensities: np.ndarray
    start_time: datetime = DEFAULT_START
    slot_duration: float = 1.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        values = np.array(self.intensities, dtype=float).reshape(-1)
        if values.size == 0:
            raise TraceError("trace is empty")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise TraceError(f"slot {bad}: intensity is not finite")
        if np.any(values < 0):
            bad = int(np.flatnonzero(values < 0)[0])
            raise TraceError(f"slot {bad}: intensity {values[bad]!r} is negative")
        if not (self.slot_duration > 0 and math.isfinite(self.slot_duration)):
            raise TraceError(f"slot_duration must be positive, got {self.slot_duration!r}")
        values.flags.writeable = False
        object.__setattr__(self, "intensities", values)
        object.__setattr__(self, "start_time", _as_utc(self.start_time))
        object.__setattr__(self, "slot_duration", float(self.slot_duration))

    def __len__(self) -> int:
        return int(self.intensities.size)

    def __getitem__(self, i):
        return self.intensities[i]

    def __eq__(self, other):
        if not isinstance(other, CarbonTrace):
            return NotImplemented
        return (
            self.start_time == other.start_time
            and self.slot_duration == other.slot_duration
            and np.array_equal(self.intensities, other.intensities)
        )

    __hash__ = None  # type: ignore[assignment]

    def timestamp(self, i: int) -> datetime:
        return self.start_time + timedelta(hours=self.slot_duration) * i

    def timestamps(self) -> list[datetime]:
        return [self.timestamp(i) for i in range(len(self))]


def window_mean(trace: CarbonTrace, start: int, length: int) -> float:
    """Arithmetic mean intensity over slots ``[start, start + length)``."""
    if length < 1:
        raise ValueError(f"window length must be >= 1, got {length}")
    if start < 0 or start + length > len(trace):
        raise IndexError(
            f"window [{start}, {start + length}) outside trace of {len(trace)} slots"
        )
    return float(np.mean(trace.intensities[start : start + length]))


def synth_trace(
    days: int,
    base: float,
    amplitude: float,
    period_hours: float = 24.0,
    noise_std: float = 0.0,
    seed: int = 0,
    slot_duration: float = 1.0,
    start_time: datetime = DEFAULT_START,
) -> CarbonTrace:
    """Diurnal cosine trace with optional gaussian noise.

    Slot ``i`` (at hour ``t = i * slot_duration``) has intensity
    ``max(0, base - amplitude*cos(2*pi*t/period_hours) + N(0, noise_std))``,
    so the series starts at its minimum.
    """
    if int(days) != days or days < 1:
        raise ValueError(f"days must be a positive integer, got {days!r}")
    if not (base >= amplitude >= 0):
        raise ValueError(f"need base >= amplitude >= 0, got base={base}, amplitude={amplitude}")
    if not period_hours > 0:
        raise ValueError(f"period_hours must be positive, got {period_hours}")
    if not noise_std >= 0:
        raise ValueError(f"noise_std must be non-negative, got {noise_std}")
    if not slot_duration > 0:
        raise ValueError(f"slot_duration must be positive, got {slot_duration}")
    n = 24.0 * days / slot_duration
    if abs(n - round(n)) > 1e-9:
        raise ValueError("slot_duration must divide 24 hours")
    n = int(round(n))
    hours = np.arange(n) * slot_duration
    values = base - amplitude * np.cos(2.0 * np.pi * hours / period_hours)
    if noise_std > 0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise_std, size=n)
    return CarbonTrace(np.maximum(values, 0.0), start_time, slot_duration)


def load_trace(source: TextIO | Iterable[str], name: str = "") -> CarbonTrace:
    """Parse a trace CSV stream.

    The header must be exactly ``timestamp,carbon_intensity_gco2_per_kwh``.
    Rows may arrive in any order; they are sorted, then checked for
    duplicates and uniform spacing. Errors name the offending row (1-based,
    header is row 1).
    """
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise TraceError("empty file") from None
    if tuple(h.strip().lstrip("﻿") for h in header) != HEADER:
        raise TraceError(f"row 1: expected header {','.join(HEADER)!r}, got {','.join(header)!r}")

    rows: list[tuple[datetime, float, int]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise TraceError(f"row {lineno}: expected 2 columns, got {len(row)}")
        try:
            ts = parse_timestamp(row[0])
        except ValueError:
            raise TraceError(f"row {lineno}: bad timestamp {row[0]!r}") from None
        try:
            value = float(row[1])
        except ValueError:
            raise TraceError(f"row {lineno}: non-numeric intensity {row[1]!r}") from None
        if not math.isfinite(value):
            raise TraceError(f"row {lineno}: intensity {row[1]!r} is not finite")
        if value < 0:
            raise TraceError(f"row {lineno}: negative intensity {row[1]!r}")
        rows.append((ts, value, lineno))

    if not rows:
        raise TraceError("no data rows")
    rows.sort(key=lambda r: r[0])
    for (t0, _, l0), (t1, _, l1) in zip(rows, rows[1:]):
        if t0 == t1:
            raise TraceError(f"row {l1}: duplicate timestamp {format_timestamp(t1)} (also row {l0})")

    if len(rows) == 1:
        step = timedelta(hours=1)
    else:
        step = rows[1][0] - rows[0][0]
    for (t0, _, _), (t1, _, l1) in zip(rows, rows[1:]):
        if t1 - t0 != step:
            missing = t0 + step
            if t1 - t0 > step:
                raise TraceError(
                    f"row {l1}: gap in trace, expected {format_timestamp(missing)} "
                    f"before {format_timestamp(t1)}"
                )
            raise TraceError(f"row {l1}: non-uniform spacing at {format_timestamp(t1)}")

    return CarbonTrace(
        np.array([r[1] for r in rows]),
        start_time=rows[0][0],
        slot_duration=step / timedelta(hours=1),
        name=name,
    )


def read_trace(path: str | Path) -> CarbonTrace:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return load_trace(fh, name=path.name)


def render_csv(trace: CarbonTrace) -> str:
    """Serialize a trace; ``load_trace(render_csv(t))`` reproduces ``t`` exactly."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for i, value in enumerate(trace.intensities):
        writer.writerow((format_timestamp(trace.timestamp(i)), repr(float(value))))
    return buf.getvalue()


def write_trace(trace: CarbonTrace, path: str | Path) -> None:
    Path(path).write_text(render_csv(trace), encoding="utf-8")
