"""Tabular reports and their CSV, JSON and SVG renderings.

Floats are rounded to 6 significant digits at rendering time only.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import Any, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .engine import Aggregate, normalize
from .trace import CarbonTrace, render_csv

SIG_DIGITS = 6


@dataclass
class Report:
    metadata: dict[str, Any]
    columns: list[str]
    rows: list[dict[str, Any]] = field(default_factory=list)
    excluded_starts: int = 0


def trace_digest(trace: CarbonTrace) -> str:
    return hashlib.sha256(render_csv(trace).encode("utf-8")).hexdigest()[:16]


def _round(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(format(float(value), f".{SIG_DIGITS}g"))
    return value


def _cell(value) -> str:
    value = _round(value)
    if isinstance(value, float):
        return format(value, f".{SIG_DIGITS}g")
    return str(value)


def render_csv_report(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_cell(row[c]) for c in report.columns])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _round(obj)


def render_json_report(report: Report) -> str:
    doc = {
        "metadata": report.metadata,
        "columns": report.columns,
        "rows": [{c: row[c] for c in report.columns} for row in report.rows],
        "excluded_starts": report.excluded_starts,
    }
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


def render(report: Report, fmt: str = "csv") -> str:
    if fmt == "csv":
        return render_csv_report(report)
    if fmt == "json":
        return render_json_report(report)
    raise ValueError(f"unknown format {fmt!r}")


AGGREGATE_COLUMNS = [
    "starts",
    "excluded_starts",
    "useful_work",
    "energy_kwh_mean",
    "energy_kwh_p5",
    "energy_kwh_p95",
    "carbon_g_mean",
    "carbon_g_p5",
    "carbon_g_p95",
    "energy_efficiency_mean",
    "energy_efficiency_p5",
    "energy_efficiency_p95",
    "carbon_efficiency_mean",
    "carbon_efficiency_p5",
    "carbon_efficiency_p95",
    "norm_energy_efficiency",
    "norm_carbon_efficiency",
]


def aggregate_rows(params: Sequence[dict], aggregates: Sequence[Aggregate]) -> list[dict]:
    """One row per configuration; normalization spans the whole row set."""
    rows = []
    normed = normalize(aggregates) if aggregates else []
    for p, agg, (ne, nc) in zip(params, aggregates, normed):
        row = dict(p)
        row["starts"] = len(agg)
        row["excluded_starts"] = agg.excluded
        row["useful_work"] = float(np.mean(agg.useful_work))
        for metric, col in (
            ("energy", "energy_kwh"),
            ("carbon", "carbon_g"),
            ("energy_efficiency", "energy_efficiency"),
            ("carbon_efficiency", "carbon_efficiency"),
        ):
            s = agg.summary(metric)
            row[f"{col}_mean"] = s.mean
            row[f"{col}_p5"] = s.p5
            row[f"{col}_p95"] = s.p95
        row["norm_energy_efficiency"] = ne
        row["norm_carbon_efficiency"] = nc
        rows.append(row)
    return rows


# perceptually ordered ramp (dark purple -> yellow), interpolated linearly
_RAMP = [
    (0.267, 0.005, 0.329),
    (0.230, 0.322, 0.546),
    (0.128, 0.567, 0.551),
    (0.369, 0.789, 0.383),
    (0.993, 0.906, 0.144),
]


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0) * (len(_RAMP) - 1)
    i = min(int(t), len(_RAMP) - 2)
    u = t - i
    rgb = [a + (b - a) * u for a, b in zip(_RAMP[i], _RAMP[i + 1])]
    return "#" + "".join(f"{int(round(255 * x)):02x}" for x in rgb)


def render_heatmap_svg(
    x_levels: Sequence[float],
    y_levels: Sequence[float],
    values: np.ndarray,
    title: str,
    x_label: str = "high-carbon frequency (MHz)",
    y_label: str = "low-carbon frequency (MHz)",
) -> str:
    """Self-contained SVG grid; ``values[i, j]`` is drawn at row ``y_levels[i]``
    (top row is the highest level) and column ``x_levels[j]``."""
    values = np.asarray(values, dtype=float)
    ny, nx = values.shape
    cell = 36
    left, top = 90, 50
    width = left + nx * cell + 130
    height = top + ny * cell + 60
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">',
        f'<text x="{width / 2:g}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
    ]
    for i in range(ny):
        row = ny - 1 - i
        y = top + row * cell
        out.append(
            f'<text x="{left - 6}" y="{y + cell / 2 + 3:g}" text-anchor="end">{y_levels[i]:g}</text>'
        )
        for j in range(nx):
            v = values[i, j]
            t = 0.5 if span == 0 else (v - lo) / span
            out.append(
                f'<rect class="cell" x="{left + j * cell}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{_color(t)}"><title>{y_levels[i]:g}/{x_levels[j]:g}: {v:.6g}</title></rect>'
            )
    base = top + ny * cell
    for j in range(nx):
        x = left + j * cell + cell / 2
        out.append(
            f'<text x="{x:g}" y="{base + 14}" text-anchor="middle" '
            f'transform="rotate(-45 {x:g} {base + 14})">{x_levels[j]:g}</text>'
        )
    out.append(
        f'<text x="{left + nx * cell / 2:g}" y="{height - 8}" text-anchor="middle">{escape(x_label)}</text>'
    )
    out.append(
        f'<text x="16" y="{top + ny * cell / 2:g}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ny * cell / 2:g})">{escape(y_label)}</text>'
    )

    bar_x = left + nx * cell + 30
    steps = 50
    bar_h = ny * cell
    for k in range(steps):
        y = top + bar_h * (steps - 1 - k) / steps
        out.append(
            f'<rect x="{bar_x}" y="{y:g}" width="16" height="{bar_h / steps + 0.5:g}" '
            f'fill="{_color(k / (steps - 1))}"/>'
        )
    out.append(f'<text x="{bar_x + 22}" y="{top + 4}">max {hi:.6g}</text>')
    out.append(f'<text x="{bar_x + 22}" y="{top + bar_h}">min {lo:.6g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
