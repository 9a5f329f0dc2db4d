"""Dependency-free SVG line charts with deterministic output."""
from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import ConfigError
from .outputs import BENCH_HEADER, LONG_HEADER, METRICS_HEADER

KINDS = ("reward", "regret", "convergence", "scaling")

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
           "#bcbd22", "#17becf"]
TITLES = {
    "reward": ("step", "average reward"),
    "regret": ("step", "cumulative regret"),
    "convergence": ("step", "% of final cumulative reward"),
    "scaling": ("size", "ns per step (median)"),
}


def read_series(path, kind: str) -> dict[str, list[tuple[float, float]]]:
    """Load ``{series: [(x, y), ...]}`` from a CSV whose schema fits ``kind``."""
    if kind not in KINDS:
        raise ConfigError(f"unknown plot kind {kind!r}; expected one of {', '.join(KINDS)}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty CSV")
    header, data = rows[0], rows[1:]
    if not data:
        raise ConfigError(f"{path}: no data rows")
    series: dict[str, list[tuple[float, float]]] = {}
    try:
        if kind == "scaling":
            if header != BENCH_HEADER:
                raise ConfigError(f"{path}: scaling plots need header {','.join(BENCH_HEADER)}")
            for r in data:
                series.setdefault(f"{r[0]} ({r[1]})", []).append((float(r[2]), float(r[3])))
        elif header == LONG_HEADER:
            for r in data:
                series.setdefault(r[0], []).append((float(r[1]), float(r[2])))
        elif header == METRICS_HEADER and kind in ("reward", "regret"):
            cols = ["running_avg_reward", "window_avg_reward"] if kind == "reward" else ["cum_regret"]
            for r in data:
                rec = dict(zip(header, r))
                for c in cols:
                    series.setdefault(c, []).append((float(rec["t"]), float(rec[c])))
        else:
            raise ConfigError(f"{path}: header {','.join(header)} does not fit plot kind {kind!r}")
    except ConfigError:
        raise
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: malformed row ({exc})") from exc
    return series


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


def _num(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    return f"{v:g}"


def render_svg(series: dict[str, list[tuple[float, float]]], kind: str, title: str = "",
               log_x: bool | None = None, width: int = 720, height: int = 440) -> str:
    if not series or not any(series.values()):
        raise ConfigError("nothing to plot")
    if log_x is None:
        log_x = kind == "scaling"
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    if log_x and min(xs) <= 0:
        log_x = False
    fx = (lambda v: math.log10(v)) if log_x else (lambda v: v)
    x0, x1 = fx(min(xs)), fx(max(xs))
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    ml, mr, mt, mb = 70, 190, 40, 50
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (fx(x) - x0) / (x1 - x0) * pw

    def py(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    xlabel, ylabel = TITLES[kind]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{ml + pw / 2:.2f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<g class="axes" stroke="black" fill="none">'
               f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}"/>'
               f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}"/></g>')
    out.append('<g class="ticks">')
    if log_x:
        xt = sorted({x for x in xs})
    else:
        xt = _ticks(min(xs), max(xs))
    for x in xt:
        out.append(f'<line x1="{_num(px(x))}" y1="{mt + ph}" x2="{_num(px(x))}" y2="{mt + ph + 5}" stroke="black"/>'
                   f'<text x="{_num(px(x))}" y="{mt + ph + 18}" text-anchor="middle">{_label(x)}</text>')
    for y in _ticks(y0, y1):
        out.append(f'<line x1="{ml - 5}" y1="{_num(py(y))}" x2="{ml}" y2="{_num(py(y))}" stroke="black"/>'
                   f'<text x="{ml - 8}" y="{_num(py(y) + 4)}" text-anchor="end">{_label(y)}</text>')
    out.append('</g>')
    out.append(f'<text x="{ml + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2:.2f})">{escape(ylabel)}</text>')
    for i, (name, pts) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{_num(px(x))},{_num(py(y))}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
    out.append('<g class="legend">')
    for i, name in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        ly = mt + 10 + 16 * i
        lx = ml + pw + 15
        out.append(f'<rect x="{lx}" y="{ly - 8}" width="12" height="3" fill="{color}"/>'
                   f'<text x="{lx + 18}" y="{ly - 3}">{escape(name)}</text>')
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def plot_csv(csv_path, out_svg, kind: str, title: str | None = None) -> None:
    series = read_series(csv_path, kind)
    svg = render_svg(series, kind, title if title is not None else Path(csv_path).name)
    Path(out_svg).write_text(svg)
