"""Serialization of experiment results: CSV tables, JSON envelopes and SVG charts.

Floats are written with ``repr`` (shortest decimal that round-trips), so a
re-parsed file reproduces the in-memory values exactly and identical runs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Mapping as TMapping, Optional, Sequence
from xml.sax.saxutils import escape

from .golden import (TABLE1, TABLE1_ALPHA, TABLE1_BETA, TABLE1_SCHEMES, TABLE1_STEPS,
                     TABLE1_TOL, TABLE1_X0)
from .mappings import builtin_cbrt_map
from .numerics import ParamSchedule, Point
from .schemes import SchemeId, StopRule, Trajectory, run

__all__ = [
    "fmt",
    "to_csv",
    "to_json",
    "envelope",
    "error_chart_svg",
    "reproduce_table1",
    "table1_rows",
    "table1_cells",
    "table1_mismatches",
    "trajectory_rows",
]

SVG_WIDTH, SVG_HEIGHT = 800, 600
# log10 floor for zero errors on the chart
LOG_FLOOR = -17.0
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, Point):
        return list(obj.coords)
    if isinstance(obj, SchemeId):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def to_json(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def envelope(config: dict, results: Any, invariant_checks: Optional[dict] = None) -> str:
    """JSON document ``{config, results, invariant_checks}`` in that key order."""
    return to_json({"config": config, "results": results,
                    "invariant_checks": invariant_checks or {}})


def trajectory_rows(traj: Trajectory) -> tuple[list[str], list[list[Any]]]:
    dim = traj.x0.dim
    xcols = ["x"] if dim == 1 else [f"x{i}" for i in range(dim)]
    header = ["n", *xcols, "residual", "error"]
    rows = [[r.n, *r.x.coords, r.residual, r.error] for r in traj.records]
    return header, rows


def reproduce_table1() -> dict[SchemeId, Trajectory]:
    m = builtin_cbrt_map()
    s = ParamSchedule.constant(TABLE1_ALPHA, TABLE1_BETA)
    x0 = Point((TABLE1_X0,))
    stop = StopRule.fixed_count(TABLE1_STEPS)
    return {sid: run(sid, m, x0, s, stop) for sid in TABLE1_SCHEMES}


def table1_rows(trajs: TMapping[SchemeId, Trajectory]) -> tuple[list[str], list[list[Any]]]:
    schemes = list(trajs)
    header = ["n", *(s.value for s in schemes)]
    length = min(len(t.records) for t in trajs.values())
    rows = [[n, *(trajs[s].records[n].x.coords[0] for s in schemes)] for n in range(length)]
    return header, rows


def table1_cells(trajs: TMapping[SchemeId, Trajectory]) -> list[tuple[SchemeId, int, float, float]]:
    """Every published cell as ``(scheme, row, published, computed)``.

    A row missing from a trajectory is reported with computed value ``nan``.
    """
    cells = []
    for sid in TABLE1_SCHEMES:
        records = trajs[sid].records
        for n, text in enumerate(TABLE1[sid]):
            got = records[n].x.coords[0] if n < len(records) else math.nan
            cells.append((sid, n, float(text), got))
    return cells


def table1_mismatches(trajs: TMapping[SchemeId, Trajectory],
                      tol: float = TABLE1_TOL) -> list[tuple[SchemeId, int, float, float]]:
    """Cells deviating from the published table by more than ``tol``."""
    return [c for c in table1_cells(trajs) if not abs(c[3] - c[2]) <= tol]


def _nice_ticks(lo: float, hi: float) -> list[int]:
    span = max(1, int(hi - lo))
    stride = 1 if span <= 10 else 2 if span <= 20 else 5
    first = math.ceil(lo / stride) * stride
    return list(range(int(first), int(hi) + 1, stride))


def error_chart_svg(curves: TMapping[str, Sequence[Optional[float]]],
                    title: str = "log10 |x_n - p|") -> str:
    """Line chart of ``log10(error)`` against ``n``, one polyline per curve.

    Zero errors are drawn at ``LOG_FLOOR``; ``None`` entries are skipped.
    """
    margin_l, margin_r, margin_t, margin_b = 70, 170, 50, 60
    plot_w = SVG_WIDTH - margin_l - margin_r
    plot_h = SVG_HEIGHT - margin_t - margin_b

    logs = {}
    for name, errs in curves.items():
        logs[name] = [(n, LOG_FLOOR if e == 0 else max(LOG_FLOOR, math.log10(e)))
                      for n, e in enumerate(errs) if e is not None]
    values = [v for pts in logs.values() for _, v in pts]
    n_max = max((n for pts in logs.values() for n, _ in pts), default=1) or 1
    y_lo = math.floor(min(values, default=LOG_FLOOR))
    y_hi = math.ceil(max(values, default=0.0))
    if y_hi <= y_lo:
        y_hi = y_lo + 1

    def px(n: float) -> float:
        return margin_l + plot_w * n / n_max

    def py(v: float) -> float:
        return margin_t + plot_h * (y_hi - v) / (y_hi - y_lo)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
        f'<text x="{margin_l + plot_w / 2:.2f}" y="{margin_t / 2 + 6:.2f}" '
        f'text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<rect x="{margin_l}" y="{margin_t}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black"/>',
    ]
    for v in _nice_ticks(y_lo, y_hi):
        y = py(v)
        out.append(f'<line x1="{margin_l}" y1="{y:.2f}" x2="{margin_l + plot_w}" y2="{y:.2f}" '
                   'stroke="#dddddd"/>')
        out.append(f'<text x="{margin_l - 8}" y="{y + 4:.2f}" text-anchor="end">{v}</text>')
    for n in _nice_ticks(0, n_max):
        x = px(n)
        out.append(f'<text x="{x:.2f}" y="{margin_t + plot_h + 18}" text-anchor="middle">{n}</text>')
    out.append(f'<text x="{margin_l + plot_w / 2:.2f}" y="{SVG_HEIGHT - 15}" '
               'text-anchor="middle">n</text>')
    out.append(f'<text x="18" y="{margin_t + plot_h / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {margin_t + plot_h / 2:.2f})">log10 error</text>')
    for i, (name, pts) in enumerate(logs.items()):
        color = COLORS[i % len(COLORS)]
        coords = " ".join(f"{px(n):.2f},{py(v):.2f}" for n, v in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        ly = margin_t + 20 + 22 * i
        lx = margin_l + plot_w + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" '
                   'stroke-width="2"/>')
        out.append(f'<text x="{lx + 32}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
