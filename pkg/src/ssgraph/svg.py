"""Minimal deterministic SVG scatter plots; no plotting dependency.

Fixed 800x800 viewport, equal-aspect data box, points as circles and region
overlays as paths. Output bytes depend only on the data, so repeated runs
with the same config are identical.
"""

from __future__ import annotations

import numpy as np

from .geometry import CloudRegion, Disk, HalfPlane, ParametricPerimeter, VerticalLine

SIZE = 800.0
MARGIN = 60.0

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    def __init__(self, xs, ys):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        finite = np.isfinite(xs) & np.isfinite(ys)
        xs, ys = xs[finite], ys[finite]
        if xs.size == 0:
            xs = np.array([0.0, 1.0])
            ys = np.array([0.0, 1.0])
        x0, x1 = float(np.min(xs)), float(np.max(xs))
        y0, y1 = float(np.min(ys)), float(np.max(ys))
        span = max(x1 - x0, y1 - y0, 1e-6)
        pad = 0.08 * span
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        half = 0.5 * span + pad
        self.x0, self.x1 = cx - half, cx + half
        self.y0, self.y1 = cy - half, cy + half
        self.scale = (SIZE - 2 * MARGIN) / (self.x1 - self.x0)

    def px(self, x: float) -> float:
        return MARGIN + (x - self.x0) * self.scale

    def py(self, y: float) -> float:
        return SIZE - MARGIN - (y - self.y0) * self.scale


def _region_path(region, frame: _Frame, color: str) -> str:
    if isinstance(region, Disk):
        attrs = 'fill="none"' if not region.filled else f'fill="{color}" fill-opacity="0.08"'
        return (
            f'<circle cx="{_fmt(frame.px(region.center.real))}" '
            f'cy="{_fmt(frame.py(region.center.imag))}" '
            f'r="{_fmt(region.radius * frame.scale)}" {attrs} '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
    if isinstance(region, VerticalLine):
        lo = region.im_lo if np.isfinite(region.im_lo) else frame.y0
        hi = region.im_hi if np.isfinite(region.im_hi) else frame.y1
        lo, hi = max(lo, frame.y0), min(hi, frame.y1)
        if lo > hi:
            return ""
        return (
            f'<line x1="{_fmt(frame.px(region.re))}" y1="{_fmt(frame.py(lo))}" '
            f'x2="{_fmt(frame.px(region.re))}" y2="{_fmt(frame.py(hi))}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
    if isinstance(region, HalfPlane):
        # draw the boundary line clipped to the frame
        n = region.normal
        p0 = region.offset * n
        d = 1j * n  # boundary direction
        span = 2.0 * (frame.x1 - frame.x0)
        a, b = p0 - span * d, p0 + span * d
        return (
            f'<line x1="{_fmt(frame.px(a.real))}" y1="{_fmt(frame.py(a.imag))}" '
            f'x2="{_fmt(frame.px(b.real))}" y2="{_fmt(frame.py(b.imag))}" '
            f'stroke="{color}" stroke-width="1.5" stroke-dasharray="6 3"/>'
        )
    if isinstance(region, (ParametricPerimeter, CloudRegion)):
        pts = region.points
        cmds = []
        for i, z in enumerate(pts):
            op = "M" if i == 0 else "L"
            cmds.append(f"{op}{_fmt(frame.px(z.real))},{_fmt(frame.py(z.imag))}")
        return f'<path d="{" ".join(cmds)}" fill="none" stroke="{color}" stroke-width="1.5"/>'
    return ""


def _region_extent(region):
    if isinstance(region, Disk):
        c, r = region.center, region.radius
        return [c.real - r, c.real + r], [c.imag - r, c.imag + r]
    if isinstance(region, VerticalLine):
        ys = [v for v in (region.im_lo, region.im_hi) if np.isfinite(v)]
        return [region.re], ys or [0.0]
    if isinstance(region, HalfPlane):
        p = region.offset * region.normal
        return [p.real], [p.imag]
    if isinstance(region, (ParametricPerimeter, CloudRegion)):
        return region.points.real, region.points.imag
    return [], []


def scatter_svg(
    point_sets: list[tuple[np.ndarray, str]],
    overlays: list | None = None,
    title: str = "",
    provenance: str = "",
) -> str:
    """Render labelled point sets plus optional region overlays.

    ``point_sets`` holds (complex points, label) pairs; overlays are region
    objects from the geometry module.
    """
    overlays = overlays or []
    xs: list[float] = []
    ys: list[float] = []
    for pts, _ in point_sets:
        pts = np.asarray(pts, dtype=complex)
        xs.extend(pts.real.tolist())
        ys.extend(pts.imag.tolist())
    for region in overlays:
        ex, ey = _region_extent(region)
        xs.extend(np.asarray(ex, dtype=float).tolist())
        ys.extend(np.asarray(ey, dtype=float).tolist())
    frame = _Frame(xs, ys)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(SIZE)}" '
        f'height="{int(SIZE)}" viewBox="0 0 {int(SIZE)} {int(SIZE)}">'
    ]
    if provenance:
        parts.append(f"<!-- {provenance} -->")
    parts.append(f'<rect width="{int(SIZE)}" height="{int(SIZE)}" fill="white"/>')
    # frame box
    parts.append(
        f'<rect x="{_fmt(MARGIN)}" y="{_fmt(MARGIN)}" width="{_fmt(SIZE - 2 * MARGIN)}" '
        f'height="{_fmt(SIZE - 2 * MARGIN)}" fill="none" stroke="#444" stroke-width="1"/>'
    )
    # axes through the origin, when visible
    if frame.x0 < 0.0 < frame.x1:
        parts.append(
            f'<line x1="{_fmt(frame.px(0.0))}" y1="{_fmt(MARGIN)}" '
            f'x2="{_fmt(frame.px(0.0))}" y2="{_fmt(SIZE - MARGIN)}" '
            f'stroke="#bbb" stroke-width="1"/>'
        )
    if frame.y0 < 0.0 < frame.y1:
        parts.append(
            f'<line x1="{_fmt(MARGIN)}" y1="{_fmt(frame.py(0.0))}" '
            f'x2="{_fmt(SIZE - MARGIN)}" y2="{_fmt(frame.py(0.0))}" '
            f'stroke="#bbb" stroke-width="1"/>'
        )
    # extent labels
    parts.append(
        f'<text x="{_fmt(MARGIN)}" y="{_fmt(SIZE - MARGIN + 20)}" font-size="12" '
        f'fill="#444">Re: [{frame.x0:.3g}, {frame.x1:.3g}]</text>'
    )
    parts.append(
        f'<text x="{_fmt(MARGIN)}" y="{_fmt(MARGIN - 10)}" font-size="12" '
        f'fill="#444">Im: [{frame.y0:.3g}, {frame.y1:.3g}]</text>'
    )
    if title:
        parts.append(
            f'<text x="{_fmt(SIZE / 2)}" y="30" font-size="16" text-anchor="middle" '
            f'fill="#000">{title}</text>'
        )
    for i, region in enumerate(overlays):
        parts.append(_region_path(region, frame, "#555555" if i else "#000000"))
    for i, (pts, label) in enumerate(point_sets):
        color = _PALETTE[i % len(_PALETTE)]
        pts = np.asarray(pts, dtype=complex)
        for z in pts:
            parts.append(
                f'<circle cx="{_fmt(frame.px(z.real))}" cy="{_fmt(frame.py(z.imag))}" '
                f'r="2.5" fill="{color}" fill-opacity="0.7"/>'
            )
        if label:
            parts.append(
                f'<text x="{_fmt(SIZE - MARGIN)}" y="{_fmt(MARGIN + 18 * (i + 1))}" '
                f'font-size="13" text-anchor="end" fill="{color}">{label}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
