"""Energy and carbon accounting for schedules, plus aggregation over start hours.

Energy is reported in kWh, carbon in gCO2eq and work in slot-equivalents
(one slot of execution at the job's reference rate). Energy efficiency is
work per kWh; carbon efficiency is work per gram, which equals energy
efficiency divided by the energy-weighted mean intensity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple, Protocol, Sequence

import numpy as np

from .trace import CarbonTrace

if TYPE_CHECKING:
    from .policies import Schedule


class AccountingError(ValueError):
    pass


@dataclass(frozen=True)
class RunAccounting:
    useful_work: float
    energy: float
    carbon: float
    completion_slots: int

    def __post_init__(self):
        if not self.energy > 0:
            raise AccountingError(f"energy must be positive, got {self.energy!r}")
        if self.carbon < 0:
            raise AccountingError(f"carbon must be non-negative, got {self.carbon!r}")

    @property
    def energy_efficiency(self) -> float:
        return self.useful_work / self.energy

    @property
    def carbon_efficiency(self) -> float:
        if self.carbon == 0:
            raise AccountingError("carbon efficiency is undefined for zero carbon")
        return self.useful_work / self.carbon


def account(schedule: Schedule, trace: CarbonTrace) -> RunAccounting:
    """Charge a schedule against a trace.

    Run slots cost ``power * slot_duration * work_fraction`` watt-hours at the
    slot's intensity; each overhead event costs ``power * minutes / 60`` at
    the intensity of the slot it is attached to. Suspended slots cost nothing.
    """
    n = len(trace)
    h = trace.slot_duration
    c = trace.intensities
    wh = 0.0
    g = 0.0
    work = 0.0
    active = []
    for offset, action in enumerate(schedule.actions):
        if action is None:
            continue
        i = schedule.start_slot + offset
        if not 0 <= i < n:
            raise AccountingError(f"schedule uses slot {i} outside trace of {n} slots")
        e = action.power * h * action.work_fraction
        wh += e
        g += e * c[i]
        work += action.work
        active.append(i)
    for ev in schedule.overhead_events:
        if not 0 <= ev.slot < n:
            raise AccountingError(f"overhead at slot {ev.slot} outside trace of {n} slots")
        e = ev.power * ev.minutes / 60.0
        wh += e
        g += e * c[ev.slot]
    if not active:
        raise AccountingError("schedule has no run slots")
    result = RunAccounting(
        useful_work=work,
        energy=float(wh) / 1000.0,
        carbon=float(g) / 1000.0,
        completion_slots=active[-1] - active[0] + 1,
    )
    if result.carbon == 0:
        raise AccountingError("zero carbon: carbon efficiency is undefined")
    return result


def normalize(results: Sequence) -> list[tuple[float, float]]:
    """Scale energy efficiency by the best and carbon efficiency by the worst.

    Accepts anything exposing ``energy_efficiency`` and ``carbon_efficiency``
    (a :class:`RunAccounting` or an :class:`Aggregate`, whose values are means).
    """
    if len(results) == 0:
        raise ValueError("cannot normalize an empty result set")
    ee = np.array([r.energy_efficiency for r in results], dtype=float)
    ce = np.array([r.carbon_efficiency for r in results], dtype=float)
    if not (np.all(np.isfinite(ee)) and np.all(np.isfinite(ce))):
        raise ValueError("efficiencies must be finite")
    ee = ee / ee.max()
    ce = ce / ce.min()
    return [(float(a), float(b)) for a, b in zip(ee, ce)]


class Summary(NamedTuple):
    mean: float
    p5: float
    p95: float

    @classmethod
    def of(cls, values: np.ndarray) -> "Summary":
        p5, p95 = np.percentile(values, [5, 95])
        return cls(float(np.mean(values)), float(p5), float(p95))


@dataclass(frozen=True, eq=False)
class Aggregate:
    """Per-start results of one policy configuration, in start order."""

    starts: np.ndarray
    useful_work: np.ndarray
    energy: np.ndarray
    carbon: np.ndarray
    completion_slots: np.ndarray
    excluded: int = 0

    def __len__(self) -> int:
        return len(self.starts)

    @classmethod
    def from_runs(cls, starts, runs: Sequence[RunAccounting], excluded: int = 0) -> "Aggregate":
        return cls(
            starts=np.asarray(starts, dtype=int),
            useful_work=np.array([r.useful_work for r in runs], dtype=float),
            energy=np.array([r.energy for r in runs], dtype=float),
            carbon=np.array([r.carbon for r in runs], dtype=float),
            completion_slots=np.array([r.completion_slots for r in runs], dtype=int),
            excluded=excluded,
        )

    @property
    def energy_efficiencies(self) -> np.ndarray:
        return self.useful_work / self.energy

    @property
    def carbon_efficiencies(self) -> np.ndarray:
        if np.any(self.carbon == 0):
            raise AccountingError("carbon efficiency is undefined for zero carbon")
        return self.useful_work / self.carbon

    @property
    def energy_efficiency(self) -> float:
        return float(np.mean(self.energy_efficiencies))

    @property
    def carbon_efficiency(self) -> float:
        return float(np.mean(self.carbon_efficiencies))

    def summary(self, metric: str) -> Summary:
        """Mean, 5th and 95th percentile of ``energy_efficiency``,
        ``carbon_efficiency``, ``energy`` or ``carbon`` across starts."""
        values = {
            "energy_efficiency": lambda: self.energy_efficiencies,
            "carbon_efficiency": lambda: self.carbon_efficiencies,
            "energy": lambda: self.energy,
            "carbon": lambda: self.carbon,
            "completion_slots": lambda: self.completion_slots,
        }
        try:
            return Summary.of(values[metric]())
        except KeyError:
            raise ValueError(f"unknown metric {metric!r}") from None

    def runs(self) -> list[RunAccounting]:
        return [
            RunAccounting(float(w), float(e), float(c), int(n))
            for w, e, c, n in zip(self.useful_work, self.energy, self.carbon, self.completion_slots)
        ]


class Policy(Protocol):
    def window_slots(self, trace: CarbonTrace) -> int:
        """Slots from the start that must exist in the trace."""

    def plan(self, trace: CarbonTrace, start: int) -> Schedule: ...


def feasible_starts(trace: CarbonTrace, window: int) -> range:
    return range(0, max(len(trace) - window + 1, 0))


def _run_policy(policy, trace: CarbonTrace, starts: Sequence[int]) -> Aggregate:
    batch = getattr(policy, "simulate_many", None)
    if batch is not None:
        return batch(trace, starts)
    return Aggregate.from_runs(starts, [account(policy.plan(trace, s), trace) for s in starts])


def aggregate_over_starts(
    policy: Policy, trace: CarbonTrace, starts: Sequence[int] | None = None
) -> Aggregate:
    """Simulate ``policy`` from every start slot whose window fits the trace.

    With explicit ``starts``, infeasible ones are dropped and counted in
    ``excluded``; otherwise every slot index is considered.
    """
    window = policy.window_slots(trace)
    ok = set(feasible_starts(trace, window))
    candidates = range(len(trace)) if starts is None else list(starts)
    chosen = [s for s in candidates if s in ok]
    if not chosen:
        raise ValueError(
            f"no feasible start: window of {window} slots does not fit trace of {len(trace)}"
        )
    agg = _run_policy(policy, trace, chosen)
    return _with_excluded(agg, len(candidates) - len(chosen))


def aggregate_family(
    policies: Sequence[Policy], trace: CarbonTrace, starts: Sequence[int] | None = None
) -> list[Aggregate]:
    """Aggregate several configurations over the starts feasible for all of them,
    so their means are directly comparable."""
    if not policies:
        return []
    window = max(p.window_slots(trace) for p in policies)
    ok = set(feasible_starts(trace, window))
    candidates = range(len(trace)) if starts is None else list(starts)
    chosen = [s for s in candidates if s in ok]
    if not chosen:
        raise ValueError(
            f"no feasible start: window of {window} slots does not fit trace of {len(trace)}"
        )
    excluded = len(candidates) - len(chosen)
    return [_with_excluded(_run_policy(p, trace, chosen), excluded) for p in policies]


def _with_excluded(agg: Aggregate, excluded: int) -> Aggregate:
    return Aggregate(
        agg.starts, agg.useful_work, agg.energy, agg.carbon, agg.completion_slots, excluded
    )
