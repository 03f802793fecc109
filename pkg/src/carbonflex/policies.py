"""Carbon-aware schedule construction with perfect knowledge of the trace.

Every planner returns a :class:`Schedule` covering the slots from its start
onward. A slot either runs (at a scale factor, a frequency, or unit rate) or
is suspended. Slot selection is by lowest intensity with earlier slots
winning ties.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .engine import Aggregate
from .powermodel import power_at, slowdown, throughput_at_scale
from .trace import CarbonTrace, window_mean
from .workload import (
    CheckpointableJob,
    DvfsJob,
    ScalableJob,
    ceil_slots,
    deadline_slots,
    execution_slots,
)

_EPS = 1e-9
# the mean of identical values can round just below them
_THRESHOLD_RTOL = 1e-12

CHECKPOINT = "checkpoint"
RESTORE = "restore"


@dataclass(frozen=True)
class Run:
    """Execution during one slot.

    ``work_fraction`` is the share of the slot spent running (below 1 only for
    a job's last slot); ``rate`` is work per full slot; ``power`` in watts.
    """

    config: float
    work_fraction: float
    rate: float
    power: float

    @property
    def work(self) -> float:
        return self.rate * self.work_fraction


@dataclass(frozen=True)
class OverheadEvent:
    slot: int
    kind: str
    minutes: float
    power: float


@dataclass(frozen=True)
class Schedule:
    """Per-slot decisions from ``start_slot``; ``None`` marks a suspended slot."""

    start_slot: int
    actions: tuple[Run | None, ...]
    overhead_events: tuple[OverheadEvent, ...] = ()

    @property
    def run_slots(self) -> list[int]:
        return [self.start_slot + i for i, a in enumerate(self.actions) if a is not None]

    @property
    def useful_work(self) -> float:
        return sum(a.work for a in self.actions if a is not None)

    def segments(self) -> list[tuple[int, int]]:
        """Maximal runs of consecutive run slots as inclusive ``(first, last)``."""
        return _segments(self.run_slots)


def _segments(slots: Sequence[int]) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for s in slots:
        if out and s == out[-1][1] + 1:
            out[-1] = (out[-1][0], s)
        else:
            out.append((s, s))
    return out


def _check_window(trace: CarbonTrace, start: int, length: int) -> None:
    if start < 0 or start + length > len(trace):
        raise ValueError(
            f"window [{start}, {start + length}) exceeds trace of {len(trace)} slots"
        )


def select_lowest_slots(
    trace: CarbonTrace, window_start: int, window_len: int, n: int
) -> tuple[int, ...]:
    """The ``n`` lowest-intensity slots of the window, as sorted trace indices."""
    if n > window_len:
        raise ValueError(f"cannot pick {n} slots from a window of {window_len}")
    if n < 0:
        raise ValueError("n must be non-negative")
    _check_window(trace, window_start, window_len)
    values = trace.intensities[window_start : window_start + window_len]
    order = np.argsort(values, kind="stable")[:n]
    return tuple(sorted(window_start + int(i) for i in order))


def _overheads(segments, checkpoint_min, restore_min, power) -> tuple[OverheadEvent, ...]:
    events = []
    for i, (first, last) in enumerate(segments):
        if i > 0 and restore_min > 0:
            events.append(OverheadEvent(first, RESTORE, restore_min, power))
        if i < len(segments) - 1 and checkpoint_min > 0:
            events.append(OverheadEvent(last, CHECKPOINT, checkpoint_min, power))
    return tuple(events)


def _build(start, length, chosen, make_run) -> tuple[Run | None, ...]:
    actions: list[Run | None] = [None] * length
    for j, slot in enumerate(chosen):
        actions[slot - start] = make_run(j == len(chosen) - 1)
    return tuple(actions)


def plan_suspend_resume(job: CheckpointableJob, trace: CarbonTrace, start: int) -> Schedule:
    """Run in the cheapest slots before the deadline, ignoring overhead cost
    when choosing; checkpoint after every run segment but the last and
    restore before every segment but the first."""
    h = trace.slot_duration
    job.check_slot(h)
    window = deadline_slots(job, h)
    n = execution_slots(job, h)
    _check_window(trace, start, window)
    chosen = select_lowest_slots(trace, start, window, n)
    tail = job.duration / h - (n - 1)
    tail = 1.0 if abs(tail - 1.0) < _EPS else tail

    def make_run(last):
        return Run(1.0, tail if last else 1.0, 1.0, job.power)

    events = _overheads(_segments(chosen), job.checkpoint_time, job.restore_time, job.power)
    return Schedule(start, _build(start, window, chosen, make_run), events)


def plan_baseline(job: CheckpointableJob, trace: CarbonTrace, start: int) -> Schedule:
    """Carbon-agnostic execution: run immediately without interruption."""
    h = trace.slot_duration
    n = execution_slots(job, h)
    _check_window(trace, start, n)
    tail = job.duration / h - (n - 1)
    tail = 1.0 if abs(tail - 1.0) < _EPS else tail
    chosen = range(start, start + n)

    def make_run(last):
        return Run(1.0, tail if last else 1.0, 1.0, job.power)

    return Schedule(start, _build(start, n, chosen, make_run))


def plan_wait_and_scale(
    job: ScalableJob,
    k: int,
    trace: CarbonTrace,
    start: int,
    checkpoint_time: float = 0.0,
    restore_time: float = 0.0,
) -> Schedule:
    """Finish within the uninterrupted completion time by running at ``k``
    nodes in the cheapest slots and suspending in the rest.

    Overhead events are only emitted when checkpoint/restore minutes are given.
    """
    s = throughput_at_scale(job.profile, k)
    window = ceil_slots(job.work)
    _check_window(trace, start, window)
    n = ceil_slots(job.work / s)
    chosen = select_lowest_slots(trace, start, window, n)
    tail = (job.work - (n - 1) * s) / s
    tail = 1.0 if abs(tail - 1.0) < _EPS else tail
    power = k * job.per_node_power

    def make_run(last):
        return Run(float(k), tail if last else 1.0, s, power)

    events = _overheads(_segments(chosen), checkpoint_time, restore_time, power)
    return Schedule(start, _build(start, window, chosen, make_run), events)


def dvfs_threshold(job: DvfsJob, trace: CarbonTrace, start: int) -> float:
    """Mean intensity over the slots the job would need at full frequency."""
    return window_mean(trace, start, ceil_slots(job.work))


def plan_dvfs(
    job: DvfsJob, f_low_carbon: float, f_high_carbon: float, trace: CarbonTrace, start: int
) -> Schedule:
    """Run at ``f_low_carbon`` while intensity is at or below the threshold and
    at ``f_high_carbon`` otherwise, never suspending, until the work is done."""
    server = job.server
    rates, powers = {}, {}
    for f in (f_low_carbon, f_high_carbon):
        powers[f] = power_at(server, f)
        rates[f] = slowdown(job.io_fraction, f / server.freq_max)
    W = ceil_slots(job.work)
    _check_window(trace, start, W)
    mu = dvfs_threshold(job, trace, start)
    limit = mu * (1.0 + _THRESHOLD_RTOL)

    actions: list[Run] = []
    done = 0.0
    i = start
    while True:
        if i >= len(trace):
            raise ValueError(
                f"trace ends at slot {len(trace)} before the job starting at {start} completes"
            )
        f = f_low_carbon if trace.intensities[i] <= limit else f_high_carbon
        r = rates[f]
        if done + r >= job.work - _EPS:
            frac = min((job.work - done) / r, 1.0)
            actions.append(Run(f, 1.0 if abs(frac - 1.0) < _EPS else frac, r, powers[f]))
            break
        actions.append(Run(f, 1.0, r, powers[f]))
        done += r
        i += 1
    return Schedule(start, tuple(actions))


class SuspendResume:
    """Deadline-aware suspend-resume as a policy for :func:`aggregate_over_starts`."""

    def __init__(self, job: CheckpointableJob):
        self.job = job

    def window_slots(self, trace: CarbonTrace) -> int:
        return deadline_slots(self.job, trace.slot_duration)

    def plan(self, trace: CarbonTrace, start: int) -> Schedule:
        return plan_suspend_resume(self.job, trace, start)


class Baseline(SuspendResume):
    def window_slots(self, trace: CarbonTrace) -> int:
        return execution_slots(self.job, trace.slot_duration)

    def plan(self, trace: CarbonTrace, start: int) -> Schedule:
        return plan_baseline(self.job, trace, start)


class WaitAndScale:
    def __init__(self, job: ScalableJob, k: int, checkpoint_time=0.0, restore_time=0.0):
        throughput_at_scale(job.profile, k)
        self.job = job
        self.k = k
        self.checkpoint_time = checkpoint_time
        self.restore_time = restore_time

    def window_slots(self, trace: CarbonTrace) -> int:
        return ceil_slots(self.job.work)

    def plan(self, trace: CarbonTrace, start: int) -> Schedule:
        return plan_wait_and_scale(
            self.job, self.k, trace, start, self.checkpoint_time, self.restore_time
        )


class RateShift:
    """Dual-frequency threshold policy.

    :meth:`simulate_many` evaluates many starts at once with array operations
    and agrees with accounting :func:`plan_dvfs` slot by slot.
    """

    def __init__(self, job: DvfsJob, f_low_carbon: float, f_high_carbon: float):
        server = job.server
        self.job = job
        self.f_low_carbon = f_low_carbon
        self.f_high_carbon = f_high_carbon
        self.powers = (power_at(server, f_low_carbon), power_at(server, f_high_carbon))
        self.rates = (
            slowdown(job.io_fraction, f_low_carbon / server.freq_max),
            slowdown(job.io_fraction, f_high_carbon / server.freq_max),
        )

    def window_slots(self, trace: CarbonTrace) -> int:
        return max(ceil_slots(self.job.work), ceil_slots(self.job.work / min(self.rates)))

    def plan(self, trace: CarbonTrace, start: int) -> Schedule:
        return plan_dvfs(self.job, self.f_low_carbon, self.f_high_carbon, trace, start)

    def simulate_many(self, trace: CarbonTrace, starts: Sequence[int]) -> Aggregate:
        starts = np.asarray(starts, dtype=int)
        work = self.job.work
        n = len(trace)
        W = ceil_slots(work)
        if starts.size and (starts.min() < 0 or starts.max() + W > n):
            raise ValueError(f"some starts leave fewer than {W} slots in the trace")
        L = self.window_slots(trace)
        mu = np.array([dvfs_threshold(self.job, trace, int(s)) for s in starts])
        idx = starts[:, None] + np.arange(L)[None, :]
        inside = idx < n
        c = np.where(inside, trace.intensities[np.minimum(idx, n - 1)], 0.0)
        low = c <= (mu * (1.0 + _THRESHOLD_RTOL))[:, None]
        rate = np.where(low, self.rates[0], self.rates[1]) * inside
        power = np.where(low, self.powers[0], self.powers[1])
        cum = np.cumsum(rate, axis=1)
        if np.any(cum[:, -1] < work - _EPS):
            bad = int(starts[np.argmax(cum[:, -1] < work - _EPS)])
            raise ValueError(
                f"trace ends at slot {n} before the job starting at {bad} completes"
            )
        last = np.argmax(cum >= work - _EPS, axis=1)
        rows = np.arange(len(starts))
        before = np.where(last > 0, cum[rows, np.maximum(last - 1, 0)], 0.0)
        frac = np.minimum((work - before) / rate[rows, last], 1.0)
        frac = np.where(np.abs(frac - 1.0) < _EPS, 1.0, frac)
        weight = (np.arange(L)[None, :] < last[:, None]).astype(float)
        weight[rows, last] = frac
        wh = trace.slot_duration * power * weight
        # sequential sums, as in engine.account, so padding never changes results
        return Aggregate(
            starts=starts,
            useful_work=np.cumsum(rate * weight, axis=1)[:, -1],
            energy=np.cumsum(wh, axis=1)[:, -1] / 1000.0,
            carbon=np.cumsum(wh * c, axis=1)[:, -1] / 1000.0,
            completion_slots=last + 1,
        )


class DvfsCell(NamedTuple):
    f_low_carbon: float
    f_high_carbon: float
    aggregate: Aggregate


def sweep_dvfs(job: DvfsJob, trace: CarbonTrace, starts: Sequence[int]) -> list[DvfsCell]:
    """Every ordered frequency pair, row-major by low-carbon frequency."""
    if len(starts) == 0:
        raise ValueError("starts must be non-empty")
    cells = []
    for f1 in job.server.levels:
        for f2 in job.server.levels:
            policy = RateShift(job, f1, f2)
            cells.append(DvfsCell(f1, f2, policy.simulate_many(trace, starts)))
    return cells


def dvfs_starts(job: DvfsJob, trace: CarbonTrace) -> range:
    """Starts feasible for every frequency pair (worst case: all slots at the
    lowest level)."""
    f = job.server.freq_min
    policy = RateShift(job, f, f)
    return range(0, max(len(trace) - policy.window_slots(trace) + 1, 0))


__all__ = [
    "Run",
    "OverheadEvent",
    "Schedule",
    "select_lowest_slots",
    "plan_suspend_resume",
    "plan_baseline",
    "plan_wait_and_scale",
    "plan_dvfs",
    "dvfs_threshold",
    "sweep_dvfs",
    "dvfs_starts",
    "SuspendResume",
    "Baseline",
    "WaitAndScale",
    "RateShift",
    "DvfsCell",
]
