"""Flat-file outputs: per-step CSVs, regret-curve CSVs and an SVG line chart.

Floats are written with 17 significant digits, which round-trips IEEE doubles
exactly. Files are UTF-8 with LF line endings.
"""

from __future__ import annotations

import csv
import io
import os
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .experiment import CellOutcome, RegretCurve, RunResult

RUN_HEADER = (
    "t", "p_t", "loss_online", "loss_reference", "cum_online",
    "cum_reference", "regret_to_t", "normalized_regret_to_t",
)
CURVE_HEADER = ("p_max", "seed", "T", "regret", "normalized_regret")


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_rows(path: str, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def emit_csv(r: RunResult, path: str) -> None:
    """One row per step with cumulative losses and running regret."""
    cols = (r.t, r.p, r.loss_online, r.loss_reference, r.cum_online,
            r.cum_reference, r.regret_to_t, r.regret_to_t / r.t)
    rows = [[str(int(row[0]))] + [fmt(v) for v in row[1:]] for row in zip(*cols)]
    _write_rows(path, RUN_HEADER, rows)


def read_csv(path: str) -> dict[str, np.ndarray]:
    """Parse a file written by :func:`emit_csv` or :func:`emit_curves_csv` into columns."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: np.array([float(row[i]) for row in body]) for i, name in enumerate(header)}


def emit_curves_csv(curves: Sequence[RegretCurve], path: str) -> None:
    rows = []
    for c in curves:
        for h, reg, nr in zip(c.horizons, c.regret, c.normalized_regret):
            rows.append([fmt(c.p_max), str(c.seed), str(int(h)), fmt(reg), fmt(nr)])
    _write_rows(path, CURVE_HEADER, rows)


def write_sweep(outcomes: Sequence[CellOutcome], means: Sequence[RegretCurve], out_dir: str) -> list[str]:
    """Write every sweep artifact into ``out_dir`` and return the paths."""
    paths = []
    for o in outcomes:
        p = os.path.join(out_dir, f"run_pmax{o.cell.p_max:g}_seed{o.cell.seed}.csv")
        emit_csv(o.run, p)
        paths.append(p)
    p = os.path.join(out_dir, "regret_curves.csv")
    emit_curves_csv([o.curve for o in outcomes], p)
    paths.append(p)
    p = os.path.join(out_dir, "regret_curves_mean.csv")
    emit_curves_csv(means, p)
    paths.append(p)
    p = os.path.join(out_dir, "normalized_regret.svg")
    emit_plot(means, p)
    paths.append(p)
    return paths


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def emit_plot(curves: Sequence[RegretCurve], path: str, width: int = 640, height: int = 420) -> None:
    """Static SVG chart of normalized regret against ``T``, one polyline per curve.

    The legend shows each curve's ``p_max``. Axis ranges span the data.
    """
    if not curves:
        raise ValueError("emit_plot needs at least one series")
    xs = np.concatenate([np.asarray(c.horizons, dtype=float) for c in curves])
    ys = np.concatenate([np.asarray(c.normalized_regret, dtype=float) for c in curves])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = min(0.0, float(ys.min())), float(ys.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    left, right, top, bottom = 70, 150, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000"/>',
    ]
    for xv in _ticks(x_lo, x_hi):
        out.append(f'<text x="{sx(xv):.2f}" y="{top + ph + 18}" text-anchor="middle">{xv:g}</text>')
    for yv in _ticks(y_lo, y_hi):
        out.append(f'<text x="{left - 6}" y="{sy(yv) + 4:.2f}" text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">T</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">normalized regret</text>'
    )
    for i, c in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(c.horizons, c.normalized_regret))
        out.append(f'<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 16 + 18 * i
        lx = left + pw + 12
        out.append(f'<line class="legend" x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        label = escape(f"p_max = {c.p_max:g}")
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(out) + "\n")
