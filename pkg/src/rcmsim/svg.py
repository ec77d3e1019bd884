"""Small deterministic SVG writers for planar complexes, grain unions and
sample diagnostics."""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import stats

from .complex import SimplicialComplex
from .errors import CapabilityError
from .grains import PlacedGrain

_HEAD = '<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
_FONT = 'font-family="sans-serif" font-size="11"'


def _num(x: float) -> str:
    return f"{x:.2f}"


class _Frame:
    """Affine map from a data box onto a pixel panel (y pointing up)."""

    def __init__(self, lo, hi, x0, y0, size, pad=10.0):
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        span = float(max((hi - lo).max(), 1e-12))
        self.lo, self.scale = lo, (size - 2 * pad) / span
        self.x0, self.y0, self.size, self.pad = x0, y0, size, pad

    def __call__(self, p) -> tuple[str, str]:
        x = self.x0 + self.pad + (p[0] - self.lo[0]) * self.scale
        y = self.y0 + self.size - self.pad - (p[1] - self.lo[1]) * self.scale
        return _num(x), _num(y)

    def length(self, r: float) -> str:
        return _num(r * self.scale)


def _require_plane(dim: int) -> None:
    if dim != 2:
        raise CapabilityError(f"SVG rendering is only supported for d=2 (got d={dim})")


def _complex_body(frame: _Frame, pos: dict[int, Sequence[float]], complex: SimplicialComplex) -> list[str]:
    out = []
    for s in complex.level(2):
        pts = " ".join(",".join(frame(pos[v])) for v in s)
        out.append(f'<polygon points="{pts}" fill="#9ecae1" fill-opacity="0.6" stroke="none"/>')
    for a, b in complex.level(1):
        (x1, y1), (x2, y2) = frame(pos[a]), frame(pos[b])
        out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="#08306b" stroke-width="1"/>')
    for (v,) in complex.level(0):
        x, y = frame(pos[v])
        out.append(f'<circle cx="{x}" cy="{y}" r="2.5" fill="#cb181d"/>')
    return out


def complex_svg(positions: dict[int, Sequence[float]], complex: SimplicialComplex,
                bounds=None, size: int = 480, title: str = "") -> str:
    """Vertices, edges and filled triangles of a planar complex.

    ``positions`` maps vertex id to a 2-vector; ``bounds`` is an optional
    (lower, upper) box, otherwise the vertex bounding box is used.
    """
    dims = {len(p) for p in positions.values()}
    if dims:
        _require_plane(dims.pop())
    if bounds is None:
        arr = np.array(list(positions.values()), float) if positions else np.zeros((1, 2))
        bounds = (arr.min(axis=0), arr.max(axis=0))
    frame = _Frame(bounds[0], bounds[1], 0, 20, size)
    lines = [_HEAD.format(w=size, h=size + 20), f'<text x="10" y="14" {_FONT}>{title}</text>']
    lines += _complex_body(frame, positions, complex)
    lines.append("</svg>\n")
    return "\n".join(lines)


def nerve_svg(grains: Sequence[PlacedGrain], nerve: SimplicialComplex, size: int = 420) -> str:
    """Two panels: the union of grains (left) and its nerve drawn on the
    grain centres (right)."""
    if grains:
        _require_plane(grains[0].dim)
    centers = np.array([g.center for g in grains], float).reshape(-1, 2)
    reach = np.array([g.grain.circumradius for g in grains]).reshape(-1)
    if len(grains):
        lo = (centers - reach[:, None]).min(axis=0)
        hi = (centers + reach[:, None]).max(axis=0)
    else:
        lo, hi = np.zeros(2), np.ones(2)
    left = _Frame(lo, hi, 0, 20, size)
    right = _Frame(lo, hi, size, 20, size)
    lines = [_HEAD.format(w=2 * size, h=size + 20),
             f'<text x="10" y="14" {_FONT}>union of grains</text>',
             f'<text x="{size + 10}" y="14" {_FONT}>nerve</text>']
    for g in grains:
        x, y = left(g.center)
        if g.grain.kind == "ball":
            lines.append(f'<circle cx="{x}" cy="{y}" r="{left.length(g.grain.radius)}" '
                         'fill="#fdae6b" fill-opacity="0.5" stroke="#a63603" stroke-width="0.8"/>')
        else:
            hw = g.grain.half_widths
            x0, y0 = left((g.center[0] - hw[0], g.center[1] + hw[1]))
            lines.append(f'<rect x="{x0}" y="{y0}" width="{left.length(2 * hw[0])}" '
                         f'height="{left.length(2 * hw[1])}" fill="#fdae6b" fill-opacity="0.5" '
                         'stroke="#a63603" stroke-width="0.8"/>')
    pos = {k: g.center for k, g in enumerate(grains)}
    lines += _complex_body(right, pos, nerve)
    lines.append("</svg>\n")
    return "\n".join(lines)


def diagnostics_svg(sample: Sequence[float], title: str = "", bins: int = 30, size: int = 320) -> str:
    """Histogram of the standardised sample with the normal density, and a
    normal Q-Q plot."""
    x = np.asarray(sample, float)
    lines = [_HEAD.format(w=2 * size, h=size + 20), f'<text x="10" y="14" {_FONT}>{title}</text>']
    sd = x.std(ddof=1) if len(x) > 1 else 0.0
    if len(x) < 2 or sd == 0:
        lines.append(f'<text x="10" y="40" {_FONT}>degenerate sample (zero variance)</text>')
        lines.append("</svg>\n")
        return "\n".join(lines)
    z = np.sort((x - x.mean()) / sd)
    edges = np.linspace(min(z[0], -4.0), max(z[-1], 4.0), bins + 1)
    counts, _ = np.histogram(z, edges)
    dens = counts / (len(z) * np.diff(edges))
    grid = np.linspace(edges[0], edges[-1], 200)
    top = max(dens.max(), stats.norm.pdf(0)) * 1.05
    # the histogram uses separate x and y scales
    sx = (size - 20) / (edges[-1] - edges[0])
    sy = (size - 20) / top

    def hp(u, v):
        return _num(10 + (u - edges[0]) * sx), _num(20 + size - 10 - v * sy)

    for k, d in enumerate(dens):
        (x0, y0), (x1, _) = hp(edges[k], d), hp(edges[k + 1], 0)
        lines.append(f'<rect x="{x0}" y="{y0}" width="{_num(float(x1) - float(x0))}" '
                     f'height="{_num(d * sy)}" fill="#9ecae1" stroke="#3182bd" stroke-width="0.5"/>')
    pdf = " ".join(",".join(hp(u, stats.norm.pdf(u))) for u in grid)
    lines.append(f'<polyline points="{pdf}" fill="none" stroke="#cb181d" stroke-width="1.2"/>')

    q = stats.norm.ppf((np.arange(1, len(z) + 1) - 0.5) / len(z))
    lim = float(max(abs(q).max(), abs(z).max()))
    qq = _Frame((-lim, -lim), (lim, lim), size, 20, size)
    x0, y0 = qq((-lim, -lim))
    x1, y1 = qq((lim, lim))
    lines.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="#cb181d" stroke-width="1"/>')
    for a, b in zip(q, z):
        cx, cy = qq((a, b))
        lines.append(f'<circle cx="{cx}" cy="{cy}" r="1.5" fill="#08306b"/>')
    lines.append("</svg>\n")
    return "\n".join(lines)
