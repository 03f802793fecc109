"""Job descriptions for temporal shifting, resource scaling and rate shifting."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .powermodel import ScalabilityProfile, ServerPowerModel

# absorbs float noise in ratios such as 24 * 1.1 / 1.0
_EPS = 1e-9


def floor_slots(x: float) -> int:
    return int(math.floor(x + _EPS))


def ceil_slots(x: float) -> int:
    return int(math.ceil(x - _EPS))


@dataclass(frozen=True)
class CheckpointableJob:
    """A job that can be suspended and resumed.

    ``duration`` is in hours, ``power`` in watts (drawn while running and
    while checkpointing or restoring), overhead times are in minutes, and the
    deadline is ``duration * slack_factor`` hours after the start.
    """

    duration: float = 24.0
    power: float = 120.0
    checkpoint_time: float = 0.0
    restore_time: float = 0.0
    slack_factor: float = 1.0

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration!r}")
        if not self.power > 0:
            raise ValueError(f"power must be positive, got {self.power!r}")
        if self.checkpoint_time < 0 or self.restore_time < 0:
            raise ValueError("checkpoint and restore times must be non-negative")
        if not self.slack_factor >= 1:
            raise ValueError(f"slack_factor must be >= 1, got {self.slack_factor!r}")

    def check_slot(self, slot_duration: float) -> None:
        """Overheads must fit in the slots adjoining a suspension."""
        if self.checkpoint_time + self.restore_time >= slot_duration * 60.0:
            raise ValueError(
                f"checkpoint + restore ({self.checkpoint_time + self.restore_time:g} min) "
                f"must be shorter than a slot ({slot_duration * 60:g} min)"
            )

    @property
    def work(self) -> float:
        return self.duration


@dataclass(frozen=True)
class ScalableJob:
    """Work measured in slot-equivalents at one node."""

    work: float
    per_node_power: float
    profile: ScalabilityProfile

    def __post_init__(self):
        if not self.work > 0:
            raise ValueError(f"work must be positive, got {self.work!r}")
        if not self.per_node_power > 0:
            raise ValueError(f"per_node_power must be positive, got {self.per_node_power!r}")


@dataclass(frozen=True)
class DvfsJob:
    """Work measured in slot-equivalents at the server's top frequency."""

    work: float
    io_fraction: float
    server: ServerPowerModel

    def __post_init__(self):
        if not self.work > 0:
            raise ValueError(f"work must be positive, got {self.work!r}")
        if not (0.0 <= self.io_fraction <= 1.0):
            raise ValueError(f"io_fraction must be in [0, 1], got {self.io_fraction!r}")


def deadline_slots(job: CheckpointableJob, slot_duration: float = 1.0) -> int:
    """Whole slots between the start and the deadline.

    Never fewer than :func:`execution_slots`, so a fractional duration with no
    slack still gets room for its partial last slot.
    """
    window = floor_slots(job.duration * job.slack_factor / slot_duration)
    return max(window, execution_slots(job, slot_duration))


def execution_slots(job: CheckpointableJob, slot_duration: float = 1.0) -> int:
    """Slots needed to run the job without interruption (last may be partial)."""
    return ceil_slots(job.duration / slot_duration)
