"""SVG rendering: dual-schedule gantt charts and simple line charts.

Rendering is display-only, so geometry may use floats; labels carry the
exact values from the trace.
"""

from __future__ import annotations

import math
from html import escape

from ._rat import q

__all__ = ["render_gantt_svg", "render_line_chart_svg"]

_LANE_H = 26
_BOX_H = 20
_LEFT = 70
_TOP = 34
_WIDTH = 960
_GAP = 18  # between the offline and actual groups


def _task_color(task_id: int) -> str:
    hue = (task_id * 67) % 360
    return f"hsl({hue}, 62%, 72%)"


def _speed_label(speed_str: str) -> str:
    value = float(q(speed_str))
    return f"{value:g}"


def _tick_step(horizon: float) -> float:
    if horizon <= 0:
        return 1.0
    raw = horizon / 16
    mag = 10 ** math.floor(math.log10(raw)) if raw > 0 else 1
    for mult in (1, 2, 5, 10):
        if mag * mult >= raw:
            return mag * mult
    return mag * 10


def render_gantt_svg(trace_obj: dict) -> str:
    """Render a trace (as produced by the JSON trace export) with one lane
    per processor per schedule: the offline mirror on top, the actual
    schedule below, boxes labeled job@speed."""
    m = int(trace_obj.get("m", 1))
    horizon = float(q(trace_obj.get("horizon", "1")))
    if horizon <= 0:
        horizon = 1.0
    scale = (_WIDTH - _LEFT - 20) / horizon
    groups = [
        ("offline schedule", trace_obj.get("offline_intervals", [])),
        ("actual schedule", trace_obj.get("intervals", [])),
    ]
    height = _TOP + 2 * (m * _LANE_H + _GAP) + 30
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{height}" '
        f'font-family="sans-serif" font-size="10">',
        f'<text x="{_LEFT}" y="14" font-size="12">{escape(trace_obj.get("policy", ""))} '
        f"/ {escape(trace_obj.get('priority', ''))}, m={m}</text>",
    ]
    y = _TOP
    for title, rows in groups:
        out.append(f'<text x="4" y="{y - 4}" font-size="11" font-style="italic">{title}</text>')
        for proc in range(1, m + 1):
            lane_y = y + (proc - 1) * _LANE_H
            out.append(
                f'<g class="lane" id="{"off" if title.startswith("off") else "act"}-P{proc}">'
                f'<text x="4" y="{lane_y + 14}">P{proc}</text>'
                f'<line x1="{_LEFT}" y1="{lane_y + _LANE_H - 3}" x2="{_WIDTH - 20}" '
                f'y2="{lane_y + _LANE_H - 3}" stroke="#ccc"/></g>'
            )
        for row in rows:
            proc = int(row["proc"])
            x0 = _LEFT + float(q(row["start"])) * scale
            x1 = _LEFT + float(q(row["end"])) * scale
            lane_y = y + (proc - 1) * _LANE_H
            color = _task_color(int(row["task"]))
            label = f'T{row["task"]},{row["job"]}@{_speed_label(row["speed"])}'
            out.append(
                f'<rect x="{x0:.2f}" y="{lane_y}" width="{max(x1 - x0, 0.5):.2f}" '
                f'height="{_BOX_H}" fill="{color}" stroke="#555"/>'
            )
            if x1 - x0 > 24:
                out.append(
                    f'<text x="{(x0 + x1) / 2:.2f}" y="{lane_y + 14}" '
                    f'text-anchor="middle">{escape(label)}</text>'
                )
        y += m * _LANE_H + _GAP
    axis_y = y
    out.append(
        f'<line x1="{_LEFT}" y1="{axis_y}" x2="{_WIDTH - 20}" y2="{axis_y}" stroke="#000"/>'
    )
    step = _tick_step(horizon)
    t = 0.0
    while t <= horizon + 1e-9:
        x = _LEFT + t * scale
        out.append(f'<line x1="{x:.2f}" y1="{axis_y}" x2="{x:.2f}" y2="{axis_y + 4}" stroke="#000"/>')
        out.append(f'<text x="{x:.2f}" y="{axis_y + 16}" text-anchor="middle">{t:g}</text>')
        t += step
    out.append("</svg>")
    return "\n".join(out)


def render_line_chart_svg(series, title: str, x_label: str, y_label: str) -> str:
    """Plot one or more (label, [(x, y), ...]) series as polylines."""
    width, height = 640, 420
    left, right, top, bottom = 64, 20, 36, 48
    points = [p for _, pts in series for p in pts]
    if not points:
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
            f"<text x='20' y='30'>{escape(title)} (no data)</text></svg>"
        )
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_hi = y_lo + 1
    y_lo = min(y_lo, 0 if y_lo > 0 else y_lo)
    sx = (width - left - right) / (x_hi - x_lo)
    sy = (height - top - bottom) / (y_hi - y_lo)

    def px(x):
        return left + (x - x_lo) * sx

    def py(y):
        return height - bottom - (y - y_lo) * sy

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<text x="{left}" y="18" font-size="13">{escape(title)}</text>',
        f'<line x1="{left}" y1="{py(y_lo):.1f}" x2="{left}" y2="{py(y_hi):.1f}" stroke="#000"/>',
        f'<line x1="{left}" y1="{py(y_lo):.1f}" x2="{px(x_hi):.1f}" y2="{py(y_lo):.1f}" stroke="#000"/>',
        f'<text x="{(left + width - right) / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(x_label)}</text>',
        f'<text x="14" y="{(top + height - bottom) / 2:.1f}" transform="rotate(-90 14 {(top + height - bottom) / 2:.1f})" text-anchor="middle">{escape(y_label)}</text>',
    ]
    for k in range(5):
        yv = y_lo + (y_hi - y_lo) * k / 4
        out.append(
            f'<text x="{left - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>'
        )
        out.append(
            f'<line x1="{left}" y1="{py(yv):.1f}" x2="{px(x_hi):.1f}" y2="{py(yv):.1f}" stroke="#eee"/>'
        )
    for i, (label, pts) in enumerate(series):
        color = colors[i % len(colors)]
        path = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in sorted(pts))
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, yv in pts:
            out.append(f'<circle cx="{px(x):.1f}" cy="{py(yv):.1f}" r="3" fill="{color}"/>')
        out.append(
            f'<text x="{width - right - 140}" y="{top + 16 * i}" fill="{color}">{escape(label)}</text>'
        )
    for x in sorted({p[0] for p in points}):
        out.append(
            f'<text x="{px(x):.1f}" y="{height - bottom + 16}" text-anchor="middle">{x:g}</text>'
        )
    out.append("</svg>")
    return "\n".join(out)
