"""Tiny SVG chart writer so runs can be plotted with no plotting dependency.

Line charts, scatter series and shaded bands with linear axes. Output is
deterministic for identical inputs (fixed float formatting, no timestamps).
"""

import math
from dataclasses import dataclass

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
)

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 58, 14, 30, 42


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    return f"{v:.4g}"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


@dataclass
class _Series:
    xs: list
    ys: list
    color: str
    label: str | None
    points: bool


@dataclass
class _Band:
    xs: list
    lo: list
    hi: list
    color: str


class Chart:
    """One panel: axes plus any number of line/point series and bands."""

    def __init__(self, title="", xlabel="", ylabel="", width=640, height=340,
                 y_clip=None):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.width = width
        self.height = height
        self.y_clip = y_clip  # optional (lo, hi); None entries mean auto
        self._series: list[_Series] = []
        self._bands: list[_Band] = []

    def _next_color(self):
        return PALETTE[len(self._series) % len(PALETTE)]

    def add_line(self, xs, ys, label=None, color=None):
        self._series.append(_Series(list(xs), list(ys), color or self._next_color(),
                                    label, points=False))

    def add_points(self, xs, ys, label=None, color=None):
        self._series.append(_Series(list(xs), list(ys), color or self._next_color(),
                                    label, points=True))

    def add_band(self, xs, lo, hi, color="#1f77b4"):
        self._bands.append(_Band(list(xs), list(lo), list(hi), color))

    def _bounds(self):
        xs, ys = [], []
        for s in self._series:
            for x, y in zip(s.xs, s.ys):
                if math.isfinite(x) and math.isfinite(y):
                    xs.append(x)
                    ys.append(y)
        for b in self._bands:
            for x, lo, hi in zip(b.xs, b.lo, b.hi):
                if math.isfinite(x) and math.isfinite(lo) and math.isfinite(hi):
                    xs.append(x)
                    ys.extend((lo, hi))
        if not xs:
            xs, ys = [0.0, 1.0], [0.0, 1.0]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if self.y_clip is not None:
            lo, hi = self.y_clip
            y0 = y0 if lo is None else max(y0, lo)
            y1 = y1 if hi is None else min(y1, hi)
        if x0 == x1:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y0 >= y1:
            y0, y1 = y0 - 0.5, y0 + 0.5
        pad = 0.04 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def render_group(self) -> str:
        x0, x1, y0, y1 = self._bounds()
        pw = self.width - _MARGIN_L - _MARGIN_R
        ph = self.height - _MARGIN_T - _MARGIN_B

        def px(x):
            return _MARGIN_L + pw * (x - x0) / (x1 - x0)

        def py(y):
            return _MARGIN_T + ph * (1.0 - (y - y0) / (y1 - y0))

        out = [f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{pw}" height="{ph}" '
               'fill="#fcfcfc" stroke="#cccccc"/>']
        for i in range(5):
            ty = y0 + (y1 - y0) * i / 4
            tx = x0 + (x1 - x0) * i / 4
            out.append(f'<line x1="{_MARGIN_L}" y1="{_fmt(py(ty))}" '
                       f'x2="{_MARGIN_L + pw}" y2="{_fmt(py(ty))}" '
                       'stroke="#e6e6e6" stroke-width="0.8"/>')
            out.append(f'<text x="{_MARGIN_L - 6}" y="{_fmt(py(ty) + 3.5)}" '
                       'font-size="10" text-anchor="end" fill="#444444" '
                       f'font-family="sans-serif">{_label(ty)}</text>')
            out.append(f'<text x="{_fmt(px(tx))}" y="{self.height - _MARGIN_B + 16}" '
                       'font-size="10" text-anchor="middle" fill="#444444" '
                       f'font-family="sans-serif">{_label(tx)}</text>')
        for b in self._bands:
            upper = [(px(x), py(hi)) for x, hi in zip(b.xs, b.hi)
                     if math.isfinite(x) and math.isfinite(hi)]
            lower = [(px(x), py(lo)) for x, lo in zip(b.xs, b.lo)
                     if math.isfinite(x) and math.isfinite(lo)]
            if upper and lower:
                pts = upper + lower[::-1]
                path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
                out.append(f'<polygon points="{path}" fill="{b.color}" '
                           'fill-opacity="0.18" stroke="none"/>')
        for s in self._series:
            pts = [(px(x), py(min(max(y, y0), y1)))
                   for x, y in zip(s.xs, s.ys)
                   if math.isfinite(x) and math.isfinite(y)]
            if s.points:
                for x, y in pts:
                    out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="2.6" '
                               f'fill="{s.color}" fill-opacity="0.85"/>')
            elif len(pts) == 1:
                out.append(f'<circle cx="{_fmt(pts[0][0])}" cy="{_fmt(pts[0][1])}" '
                           f'r="2.6" fill="{s.color}"/>')
            elif pts:
                path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
                out.append(f'<polyline points="{path}" fill="none" '
                           f'stroke="{s.color}" stroke-width="1.6"/>')
        labeled = [s for s in self._series if s.label]
        for i, s in enumerate(labeled):
            ly = _MARGIN_T + 8 + 14 * i
            lx = _MARGIN_L + pw - 130
            out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" '
                       f'stroke="{s.color}" stroke-width="2.4"/>')
            out.append(f'<text x="{lx + 24}" y="{ly + 3.5}" font-size="10" '
                       f'fill="#222222" font-family="sans-serif">{_escape(s.label)}</text>')
        if self.title:
            out.append(f'<text x="{self.width / 2}" y="18" font-size="12" '
                       'text-anchor="middle" fill="#111111" font-weight="bold" '
                       f'font-family="sans-serif">{_escape(self.title)}</text>')
        if self.xlabel:
            out.append(f'<text x="{_MARGIN_L + pw / 2}" y="{self.height - 8}" '
                       'font-size="11" text-anchor="middle" fill="#333333" '
                       f'font-family="sans-serif">{_escape(self.xlabel)}</text>')
        if self.ylabel:
            cy = _MARGIN_T + ph / 2
            out.append(f'<text x="14" y="{cy}" font-size="11" text-anchor="middle" '
                       f'fill="#333333" font-family="sans-serif" '
                       f'transform="rotate(-90 14 {cy})">{_escape(self.ylabel)}</text>')
        return "<g>" + "".join(out) + "</g>"


def write_svg(path, charts, columns: int = 1) -> None:
    """Lay panels out in a grid (row-major) and write one SVG file."""
    charts = list(charts)
    if not charts:
        raise ValueError("no charts to write")
    columns = max(1, min(columns, len(charts)))
    rows = math.ceil(len(charts) / columns)
    cell_w = max(c.width for c in charts)
    cell_h = max(c.height for c in charts)
    total_w = columns * cell_w
    total_h = rows * cell_h
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" '
             f'height="{total_h}" viewBox="0 0 {total_w} {total_h}">',
             f'<rect width="{total_w}" height="{total_h}" fill="white"/>']
    for i, chart in enumerate(charts):
        tx = (i % columns) * cell_w
        ty = (i // columns) * cell_h
        parts.append(f'<g transform="translate({tx} {ty})">{chart.render_group()}</g>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("".join(parts))
