"""CSV and SVG serialization of scan tables."""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence

from .scan import SCAN_COLUMNS, ScanRow, ScanTable

CSV_HEADER = ",".join(SCAN_COLUMNS)

SVG_WIDTH = 800
SVG_HEIGHT = 600
Y_MIN_DECADE = -12
Y_MAX_DECADE = 0
SERIES_COLORS = {
    "rate_ad": "#1f77b4",
    "rate_original": "#e377c2",
    "rate_info": "#2ca02c",
    "plob": "#000000",
}
SERIES_LABELS = {
    "rate_ad": "MP-QKD with AD",
    "rate_original": "original MP-QKD",
    "rate_info": "original (entropic form)",
    "plob": "PLOB bound",
}


def format_sci(x: float) -> str:
    """``1.234568e-7`` style: six mantissa decimals, bare exponent."""
    if x == 0:
        return "0.000000e0"
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    mantissa, exponent = f"{x:.6e}".split("e")
    return f"{mantissa}e{int(exponent)}"


def _format_row(row: ScanRow) -> list[str]:
    cells = [f"{row.L_km:.1f}"]
    for name in SCAN_COLUMNS[1:]:
        cells.append(format_sci(float(getattr(row, name))))
    return cells


def scan_to_csv(table: ScanTable) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for row in table.rows:
        writer.writerow(_format_row(row))
    return out.getvalue()


def csv_to_scan(text: str) -> ScanTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != SCAN_COLUMNS:
        raise ValueError(f"unexpected header {header!r}")
    rows = []
    for cells in reader:
        values = dict(zip(SCAN_COLUMNS, (float(c) for c in cells)))
        values["b_opt"] = int(values["b_opt"])
        rows.append(ScanRow(**values))
    return ScanTable(rows=rows)


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def scan_to_svg(
    table: ScanTable,
    series: Sequence[str] = ("rate_ad", "rate_original", "plob"),
    title: str = "Secret key rate vs distance",
) -> str:
    """Log-scale line chart, one polyline per series, drawn from SVG primitives.

    Values are clipped to the ``[1e-12, 1]`` axis so zero-rate tails sit on
    the floor.
    """
    left, right, top, bottom = 80, 30, 50, 70
    pw = SVG_WIDTH - left - right
    ph = SVG_HEIGHT - top - bottom
    xs = table.column("L_km")
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0

    def sx(x: float) -> float:
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y: float) -> float:
        lg = math.log10(min(max(y, 10.0**Y_MIN_DECADE), 10.0**Y_MAX_DECADE))
        return top + (Y_MAX_DECADE - lg) / (Y_MAX_DECADE - Y_MIN_DECADE) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
        f'<text x="{SVG_WIDTH / 2:.1f}" y="28" text-anchor="middle" font-size="16">{_escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    for d in range(Y_MIN_DECADE, Y_MAX_DECADE + 1):
        y = sy(10.0**d)
        parts.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        parts.append(
            f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">1e{d}</text>'
        )
    for x in _nice_ticks(x0, x1):
        px = sx(x)
        parts.append(f'<line x1="{px:.2f}" y1="{top + ph}" x2="{px:.2f}" y2="{top + ph + 5}" stroke="#333"/>')
        parts.append(
            f'<text x="{px:.2f}" y="{top + ph + 20}" text-anchor="middle" font-size="11">{x:g}</text>'
        )
    parts.append(
        f'<text x="{left + pw / 2:.1f}" y="{SVG_HEIGHT - 20}" text-anchor="middle" font-size="13">'
        "Total distance (km)</text>"
    )
    parts.append(
        f'<text x="20" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 20 {top + ph / 2:.1f})">Key rate (bits/round)</text>'
    )
    for k, name in enumerate(series):
        color = SERIES_COLORS.get(name, "#7f7f7f")
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, table.column(name)))
        parts.append(
            f'<polyline data-series="{name}" fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
        )
        ly = top + 15 + 18 * k
        lx = left + pw - 190
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(
            f'<text x="{lx + 32}" y="{ly + 4}" font-size="12">{_escape(SERIES_LABELS.get(name, name))}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _nice_ticks(lo: float, hi: float, target: int = 8) -> Iterable[float]:
    span = hi - lo
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * span:
        ticks.append(round(t, 9))
        t += step
    return ticks
