"""Minimal static SVG line charts (no plotting dependency).

Style follows the chain label ``model-nu-chainkind-prior``: probit red,
robit gray for small nu and blue for large nu; solid lines for DA, dashed
for sandwich chains.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

LARGE_NU = 100.0
MAX_POINTS = 2000
WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=190, top=40, bottom=50)


@dataclass(frozen=True)
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    color: str = "black"
    dashed: bool = False


def style_for(label: str) -> tuple[str, bool]:
    """Colour and dash flag for a chain label such as ``robit-3-sandwich-g1000``."""
    parts = label.split(":")[0].split("-")
    dashed = "sandwich" in parts
    if parts[0] == "probit":
        return "#d62728", dashed
    try:
        nu = float(parts[1])
    except (IndexError, ValueError):
        return "black", dashed
    return ("#1f77b4" if nu >= LARGE_NU else "#7f7f7f"), dashed


def _ticks(lo: float, hi: float, k: int = 5) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / k
    mag = 10.0 ** np.floor(np.log10(raw))
    step = mag * min((s for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10)
    return np.arange(np.ceil(lo / step) * step, hi + 0.5 * step, step)


def _thin(x, y):
    if x.size <= MAX_POINTS:
        return x, y
    idx = np.unique(np.r_[np.linspace(0, x.size - 1, MAX_POINTS).astype(int), x.size - 1])
    return x[idx], y[idx]


def line_chart(series: list[Series], title: str = "", xlabel: str = "", ylabel: str = "", note: str = "") -> str:
    """Render the series as an SVG document; ``note`` goes into an XML comment."""
    if not series:
        raise ValueError("nothing to plot")
    xs = np.concatenate([np.asarray(s.x, float) for s in series])
    ys = np.concatenate([np.asarray(s.y, float) for s in series])
    ys = ys[np.isfinite(ys)]
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    L, R, T, B = MARGIN["left"], WIDTH - MARGIN["right"], MARGIN["top"], HEIGHT - MARGIN["bottom"]

    def px(v):
        return L + (v - x0) / (x1 - x0) * (R - L)

    def py(v):
        return B - (v - y0) / (y1 - y0) * (B - T)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">'
    ]
    if note:
        out.append(f"<!-- {escape(note)} -->")
    out.append(f'<rect x="{L}" y="{T}" width="{R - L}" height="{B - T}" fill="none" stroke="black"/>')
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{B}" x2="{px(t):.2f}" y2="{B + 4}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{B + 16}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{L - 4}" y1="{py(t):.2f}" x2="{L}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{L - 6}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    if title:
        out.append(f'<text x="{(L + R) / 2}" y="{T - 14}" text-anchor="middle" font-size="13">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{(L + R) / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="16" y="{(T + B) / 2}" text-anchor="middle" transform="rotate(-90 16 {(T + B) / 2})">'
            f"{escape(ylabel)}</text>"
        )
    for k, s in enumerate(series):
        x, y = _thin(np.asarray(s.x, float), np.asarray(s.y, float))
        ok = np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        out.append(f'<polyline fill="none" stroke="{s.color}" stroke-width="1.5"{dash} points="{pts}"/>')
        ly = T + 10 + 16 * k
        out.append(f'<line x1="{R + 10}" y1="{ly}" x2="{R + 40}" y2="{ly}" stroke="{s.color}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{R + 46}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path, series, **kw) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(line_chart(series, **kw))
    return path
