"""CSV / JSON / SVG / aligned-text renderers.  Every output embeds the config
echo so a file never travels without its provenance."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_line(echo: Mapping) -> str:
    return "# config: " + json.dumps(echo, sort_keys=True, default=str)


def csv_text(header: Sequence[str], rows: Sequence[Sequence], echo: Mapping) -> str:
    buf = io.StringIO()
    buf.write(config_line(echo) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def json_text(payload: Mapping, echo: Mapping) -> str:
    return json.dumps({"config": echo, **payload}, indent=2, sort_keys=True, default=str) + "\n"


def write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def svg_line_chart(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
    echo: Mapping | None = None,
    width: int = 640,
    height: int = 420,
) -> str:
    left, right, top, bottom = 60, 170, 40, 50
    xs = [x for xv, _ in series.values() for x in xv]
    ys = [y for _, yv in series.values() for y in yv]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(min(ys), 0.0), max(max(ys), 1.0)) if ys else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">'
    ]
    if echo is not None:
        out.append(f"<!-- {escape(config_line(echo)).replace('--', '- -')} -->")
    out.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>')
    out.append(f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for i in range(5):
        fy = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{left - 6}" y="{py(fy) + 4:.1f}" text-anchor="end">{fy:.2f}</text>')
        fx = x0 + (x1 - x0) * i / 4
        out.append(f'<text x="{px(fx):.1f}" y="{top + ph + 16}" text-anchor="middle">{fx:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 16 {top + ph / 2:.1f})">'
        f"{escape(ylabel)}</text>"
    )
    for k, (name, (xv, yv)) in enumerate(series.items()):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xv, yv))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        for x, y in zip(xv, yv):
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{color}"/>')
        ly = top + 14 + 18 * k
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 36}" y="{ly}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def aligned_table(rows: Sequence[Sequence[str]], header: Sequence[str]) -> str:
    cols = list(zip(*([header] + [list(r) for r in rows])))
    widths = [max(len(str(c)) for c in col) for col in cols]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"
