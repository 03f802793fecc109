"""Server power under DVFS, frequency slowdown, and multi-node scaling.

Power follows ``P = C * f * V**2 + P_static`` with ``f`` in MHz and ``C`` in
W/(MHz*V^2). Frequencies live on a discrete ladder and each level is tied to
one voltage, spread linearly between ``volt_min`` and ``volt_max``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields
from functools import cached_property
from pathlib import Path

import numpy as np

_LEVEL_TOL = 1e-9


@dataclass(frozen=True)
class ServerPowerModel:
    capacitance_coeff: float
    static_power: float
    freq_min: float
    freq_max: float
    freq_step: float
    volt_min: float
    volt_max: float
    name: str = ""

    def __post_init__(self):
        for f in fields(self):
            if f.name == "name":
                continue
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValueError(f"{f.name} must be a finite number, got {value!r}")
            if value < 0:
                raise ValueError(f"{f.name} must be non-negative, got {value!r}")
        if self.freq_step <= 0:
            raise ValueError("freq_step must be positive")
        if self.freq_min <= 0:
            raise ValueError("freq_min must be positive")
        if self.freq_min > self.freq_max:
            raise ValueError("freq_min must not exceed freq_max")
        n = (self.freq_max - self.freq_min) / self.freq_step
        if abs(n - round(n)) > _LEVEL_TOL:
            raise ValueError("freq_max - freq_min must be a multiple of freq_step")
        if self.volt_min > self.volt_max:
            raise ValueError("volt_min must not exceed volt_max")

    @cached_property
    def levels(self) -> tuple[float, ...]:
        n = int(round((self.freq_max - self.freq_min) / self.freq_step)) + 1
        # last level pinned to freq_max so f/freq_max == 1 exactly at the top
        ladder = [self.freq_min + i * self.freq_step for i in range(n - 1)]
        ladder.append(float(self.freq_max))
        return tuple(float(f) for f in ladder)

    def level_index(self, f: float) -> int:
        """Index of ``f`` on the ladder; raises ``ValueError`` when off-ladder."""
        if self.freq_max == self.freq_min:
            if abs(f - self.freq_min) <= _LEVEL_TOL * max(1.0, self.freq_min):
                return 0
        else:
            pos = (f - self.freq_min) / self.freq_step
            i = int(round(pos))
            if 0 <= i < len(self.levels) and abs(pos - i) <= _LEVEL_TOL:
                return i
        raise ValueError(
            f"{f!r} MHz is not a frequency level of this server "
            f"({self.freq_min:g}..{self.freq_max:g} step {self.freq_step:g})"
        )


@dataclass(frozen=True)
class ScalabilityProfile:
    """Aggregate throughput of a job spread over ``k`` nodes.

    The default linear model loses ``reduction_per_node`` of per-node
    throughput for each node beyond the first: ``s(k) = k*(1 - r*(k-1))``.
    ``model="geometric"`` uses ``s(k) = k*(1-r)**(k-1)`` instead.

    Construction fails unless ``s(k) > 0`` for every ``k <= max_nodes`` and
    total throughput keeps growing for every ``k < max_nodes``.
    """

    reduction_per_node: float
    max_nodes: int = 10
    model: str = "linear"

    def __post_init__(self):
        r = self.reduction_per_node
        if not (0 <= r < 1):
            raise ValueError(f"reduction_per_node must be in [0, 1), got {r!r}")
        if int(self.max_nodes) != self.max_nodes or self.max_nodes < 1:
            raise ValueError(f"max_nodes must be a positive integer, got {self.max_nodes!r}")
        if self.model not in ("linear", "geometric"):
            raise ValueError(f"unknown scalability model {self.model!r}")
        prev = 0.0
        for k in range(1, self.max_nodes + 1):
            s = self._throughput(k)
            if s <= 0:
                raise ValueError(
                    f"throughput at {k} nodes is non-positive for r={r}; lower max_nodes"
                )
            if k < self.max_nodes and s <= prev:
                raise ValueError(
                    f"total throughput stops growing at {k} nodes for r={r}; lower max_nodes"
                )
            prev = s

    def _throughput(self, k: int) -> float:
        r = self.reduction_per_node
        if self.model == "geometric":
            return k * (1.0 - r) ** (k - 1)
        return k * (1.0 - r * (k - 1))

    @classmethod
    def largest(cls, reduction_per_node: float, limit: int = 64, model: str = "linear"):
        """Profile with the largest ``max_nodes <= limit`` that still validates."""
        for n in range(limit, 0, -1):
            try:
                return cls(reduction_per_node, n, model)
            except ValueError:
                continue
        raise ValueError(f"no valid profile for r={reduction_per_node}")


def voltage_for_frequency(model: ServerPowerModel, f: float) -> float:
    model.level_index(f)
    if model.freq_max == model.freq_min:
        return float(model.volt_min)
    frac = (f - model.freq_min) / (model.freq_max - model.freq_min)
    return model.volt_min + frac * (model.volt_max - model.volt_min)


def frequency_levels(model: ServerPowerModel) -> list[float]:
    return list(model.levels)


def power_at(model: ServerPowerModel, f: float) -> float:
    """Server power draw in watts at ladder frequency ``f`` (MHz)."""
    v = voltage_for_frequency(model, f)
    return model.capacitance_coeff * f * v * v + model.static_power


def slowdown(io_fraction: float, f_norm: float) -> float:
    """Normalized throughput at ``f_norm = f / F_max`` for a job that spends
    ``io_fraction`` of its time (at F_max) on frequency-insensitive IO.

    >>> round(slowdown(0.5, 0.5), 4)
    0.6667
    """
    if not (0.0 <= io_fraction <= 1.0):
        raise ValueError(f"io_fraction must be in [0, 1], got {io_fraction!r}")
    if not (0.0 < f_norm <= 1.0):
        raise ValueError(f"normalized frequency must be in (0, 1], got {f_norm!r}")
    return 1.0 / (io_fraction + (1.0 - io_fraction) / f_norm)


def energy_per_work(model: ServerPowerModel, io_fraction: float, f: float) -> float:
    """Watts per unit of F_max-normalized throughput (energy per slot-equivalent of work)."""
    return power_at(model, f) / slowdown(io_fraction, f / model.freq_max)


def most_efficient_frequency(model: ServerPowerModel, io_fraction: float) -> float:
    """Ladder level minimizing energy per unit of work; lowest frequency wins ties."""
    costs = [energy_per_work(model, io_fraction, f) for f in model.levels]
    return model.levels[int(np.argmin(costs))]


def throughput_at_scale(profile: ScalabilityProfile, k: int) -> float:
    if int(k) != k or not (1 <= k <= profile.max_nodes):
        raise ValueError(f"scale factor must be an integer in [1, {profile.max_nodes}], got {k!r}")
    return profile._throughput(int(k))


def energy_efficiency_at_scale(profile: ScalabilityProfile, k: int) -> float:
    """Work per node-energy relative to a single node, ``s(k)/k``."""
    return throughput_at_scale(profile, k) / k


E5_2620V4 = ServerPowerModel(
    capacitance_coeff=3e-2,
    static_power=30.0,
    freq_min=900.0,
    freq_max=2100.0,
    freq_step=100.0,
    volt_min=0.8,
    volt_max=1.2,
    name="e5-2620v4",
)

SERVERS = {E5_2620V4.name: E5_2620V4}

_CONFIG_KEYS = (
    "capacitance_coeff",
    "static_power",
    "freq_min",
    "freq_max",
    "freq_step",
    "volt_min",
    "volt_max",
)


def get_server(name: str) -> ServerPowerModel:
    try:
        return SERVERS[name]
    except KeyError:
        raise KeyError(f"unknown server model {name!r}; known: {sorted(SERVERS)}") from None


def load_server_model(path: str | Path) -> ServerPowerModel:
    """Read a server model from ``key = value`` lines.

    Keys are the :class:`ServerPowerModel` field names; ``name`` is optional
    and defaults to the file stem. ``#`` starts a comment. An optional
    ``[server]`` section header is accepted.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.lstrip().startswith("["):
        text = "[server]\n" + text
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string(text, source=str(path))
    if not parser.has_section("server"):
        raise ValueError(f"{path}: missing [server] section")
    section = parser["server"]
    unknown = set(section) - set(_CONFIG_KEYS) - {"name"}
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
    missing = [k for k in _CONFIG_KEYS if k not in section]
    if missing:
        raise ValueError(f"{path}: missing keys {missing}")
    values = {}
    for key in _CONFIG_KEYS:
        try:
            values[key] = float(section[key])
        except ValueError:
            raise ValueError(f"{path}: {key} is not a number: {section[key]!r}") from None
    return ServerPowerModel(**values, name=section.get("name", path.stem))
