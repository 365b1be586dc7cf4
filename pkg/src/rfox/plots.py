"""Plain-text SVG charts of gap profiles and ensemble summaries."""
from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .bench import SUMMARY_COLUMNS, SUMMARY_METRICS, SUMMARY_SCHEMA
from .errors import SchemaError
from .spectral import GAP_CSV_HEADER, GAP_SCHEMA

WIDTH, HEIGHT = 720, 420
MARGIN = {"left": 70, "right": 150, "top": 40, "bottom": 60}
PALETTE = {"RFOX": "#d62728", "X": "#1f77b4", "XX": "#2ca02c", "XplusSXX": "#9467bd"}
_FALLBACK = ("#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


class PlotParseError(SchemaError):
    """A CSV handed to the plotter is malformed."""


def _color(name: str, i: int) -> str:
    return PALETTE.get(name, _FALLBACK[i % len(_FALLBACK)])


def _read(path, schema: str, header: tuple[str, ...]):
    """Header comment, then data rows; errors name the offending line."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise PlotParseError(f"{path}: empty file")
    if not lines[0].startswith(schema):
        raise PlotParseError(f"{path}:1: expected schema comment {schema!r}")
    if len(lines) < 2 or tuple(next(csv.reader([lines[1]]))) != header:
        raise PlotParseError(f"{path}:2: expected column header {','.join(header)}")
    rows = []
    for lineno, row in enumerate(csv.reader(lines[2:]), start=3):
        if not row:
            continue
        if len(row) != len(header):
            raise PlotParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        rows.append((lineno, dict(zip(header, row))))
    if not rows:
        raise PlotParseError(f"{path}: no data rows")
    meta = dict(tok.split("=", 1) for tok in lines[0][len(schema):].split() if "=" in tok)
    return meta, rows


def _num(path, lineno: int, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise PlotParseError(f"{path}:{lineno}: not a number: {value!r}") from None


def read_gap_csv(path) -> tuple[dict[str, str], list[tuple[float, float]]]:
    meta, rows = _read(path, GAP_SCHEMA, GAP_CSV_HEADER)
    return meta, [(_num(path, ln, r["s_or_t"]), _num(path, ln, r["gap"])) for ln, r in rows]


def read_summary_csv(path) -> list[dict]:
    _, rows = _read(path, SUMMARY_SCHEMA, SUMMARY_COLUMNS)
    out = []
    for ln, r in rows:
        rec = dict(r)
        rec["n"] = int(_num(path, ln, r["n"]))
        rec["field_range"] = _num(path, ln, r["field_range"])
        for m in SUMMARY_METRICS:
            rec[f"median_{m}"] = _num(path, ln, r[f"median_{m}"])
            rec[f"mean_{m}"] = _num(path, ln, r[f"mean_{m}"])
        out.append(rec)
    return out


# -- SVG primitives ---------------------------------------------------------

def _frame(title: str, xlabel: str, ylabel: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<text x="{(MARGIN["left"] + WIDTH - MARGIN["right"]) / 2}" y="{HEIGHT - 15}" '
        f'text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" '
        f'transform="rotate(-90 18 {HEIGHT / 2})">{escape(ylabel)}</text>',
    ]


def _plot_box():
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    return x0, x1, y0, y1


def _y_axis(lo: float, hi: float, parts: list[str]):
    x0, x1, y0, y1 = _plot_box()
    if hi <= lo:
        hi = lo + 1.0
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for i in range(5):
        v = lo + (hi - lo) * i / 4
        y = y0 - (y0 - y1) * i / 4
        parts.append(f'<line x1="{x0 - 4}" y1="{y:.2f}" x2="{x0}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 6}" y="{y + 4:.2f}" text-anchor="end">{v:.3g}</text>')
    return lambda v: y0 - (y0 - y1) * (v - lo) / (hi - lo)


def _legend(names: list[str], parts: list[str]) -> None:
    x = WIDTH - MARGIN["right"] + 15
    for i, name in enumerate(names):
        y = MARGIN["top"] + 18 * i
        parts.append(f'<rect x="{x}" y="{y}" width="12" height="12" fill="{_color(name, i)}"/>')
        parts.append(f'<text x="{x + 18}" y="{y + 10}">{escape(name)}</text>')


def _write(parts: list[str], path: Path) -> Path:
    path.write_text("\n".join(parts + ["</svg>"]) + "\n")
    return path


def gap_svg(series: dict[str, list[tuple[float, float]]], title: str) -> list[str]:
    """Line chart with one polyline per driver."""
    x0, x1, _, _ = _plot_box()
    values = [g for pts in series.values() for _, g in pts if math.isfinite(g)]
    parts = _frame(title, "s = k/p", "gap E1 - E0")
    ymap = _y_axis(min(0.0, min(values)), max(values) * 1.05 if values else 1.0, parts)
    xs = [s for pts in series.values() for s, _ in pts]
    xlo, xhi = min(xs), max(xs) if max(xs) > min(xs) else min(xs) + 1
    for i, (name, pts) in enumerate(series.items()):
        coords = " ".join(f"{x0 + (x1 - x0) * (s - xlo) / (xhi - xlo):.2f},{ymap(g):.2f}"
                          for s, g in pts)
        parts.append(f'<polyline fill="none" stroke="{_color(name, i)}" stroke-width="1.5" '
                     f'data-driver="{escape(name)}" points="{coords}"/>')
    _legend(list(series), parts)
    return parts


def bars_svg(groups: list[str], drivers: list[str], values: dict[tuple[str, str], float],
             title: str, ylabel: str) -> list[str]:
    """Grouped bars: one group per cell, one bar per driver."""
    x0, x1, y0, _ = _plot_box()
    finite = [v for v in values.values() if math.isfinite(v)]
    parts = _frame(title, "cell (n, field range)", ylabel)
    ymap = _y_axis(min([0.0] + finite), max([0.0] + finite) * 1.05 or 1.0, parts)
    gw = (x1 - x0) / len(groups)
    bw = gw * 0.8 / len(drivers)
    for gi, g in enumerate(groups):
        gx = x0 + gi * gw + gw * 0.1
        parts.append(f'<g data-cell="{escape(g)}">')
        for di, d in enumerate(drivers):
            v = values.get((g, d), math.nan)
            if not math.isfinite(v):
                continue
            top, base = ymap(max(v, 0.0)), ymap(min(v, 0.0))
            parts.append(f'<rect x="{gx + di * bw:.2f}" y="{top:.2f}" width="{bw:.2f}" '
                         f'height="{base - top:.2f}" fill="{_color(d, di)}"/>')
        parts.append("</g>")
        parts.append(f'<text x="{gx + gw * 0.4:.2f}" y="{y0 + 15}" text-anchor="middle" '
                     f'font-size="10">{escape(g)}</text>')
    _legend(drivers, parts)
    return parts


def emit_plots(paths, out_dir) -> list[Path]:
    """Render SVGs for gap-profile and summary CSVs.

    Gap CSVs are grouped by instance (one chart with a polyline per
    driver); a summary CSV gives one grouped-bar chart per metric.  All
    inputs are parsed before anything is written.
    """
    out = Path(out_dir)
    gap_groups: dict[str, dict[str, list]] = {}
    summaries = []
    for path in map(Path, paths):
        text = path.read_text()
        if not text.strip():
            raise PlotParseError(f"{path}: empty file")
        first = text.split("\n", 1)[0]
        if first.startswith(GAP_SCHEMA):
            meta, pts = read_gap_csv(path)
            key = meta.get("instance", path.stem)
            gap_groups.setdefault(key, {})[meta.get("driver", path.stem)] = pts
        elif first.startswith(SUMMARY_SCHEMA):
            summaries.append((path, read_summary_csv(path)))
        else:
            raise PlotParseError(f"{path}:1: unrecognized CSV (no rfox schema comment)")
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for key, series in gap_groups.items():
        written.append(_write(gap_svg(series, f"Spectral gap: {key}"), out / f"gap_{key}.svg"))
    for path, recs in summaries:
        groups = []
        for r in recs:
            g = f"n={r['n']} r={r['field_range']:g}"
            if g not in groups:
                groups.append(g)
        drivers = list(dict.fromkeys(r["driver"] for r in recs))
        for m in SUMMARY_METRICS:
            vals = {(f"n={r['n']} r={r['field_range']:g}", r["driver"]): r[f"median_{m}"]
                    for r in recs}
            parts = bars_svg(groups, drivers, vals, f"Median {m} per cell", m)
            written.append(_write(parts, out / f"{path.stem}_{m}.svg"))
    return written
