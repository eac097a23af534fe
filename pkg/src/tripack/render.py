"""Static SVG diagrams of packings.

Conventions follow the usual figure style for these packings: the container
triangle outline, every disk drawn at true scale (rattlers left unshaded),
a black dot at each bond's contact point, the disk index inside each disk,
and a caption line with label, diameter, and bond count.

Output is deterministic: identical input produces byte-identical SVG, so
figures can live in version control and diff cleanly.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .geometry import SQRT3, WALL_NORMALS, Packing, TriangleDomain
from .refine import Bond

DISK_FILL = "#cccccc"
RATTLER_FILL = "#ffffff"


def _f(x: float) -> str:
    """Fixed-point pixel coordinate; avoids repr jitter across platforms."""
    return f"{x:.3f}"


def contact_point(p: Packing, b: Bond) -> np.ndarray:
    """Contact location of a bond, in center units."""
    if b.is_pair:
        return 0.5 * (p.centers[b.i] + p.centers[b.j])
    return p.centers[b.i] - 0.5 * p.d * WALL_NORMALS[b.wall]


def render_svg(p: Packing, bonds: Sequence[Bond] = (), width: int = 640) -> str:
    """Render a packing (and optionally its bond set) as an SVG 1.1 string."""
    side = 1.0 + SQRT3 * p.d  # container side, in center units
    dom = TriangleDomain(side)
    tri_h = 0.5 * SQRT3 * side
    offset = np.array([SQRT3 * p.d / 2.0, p.d / 2.0])
    margin = 0.05 * side
    scale = width / (side + 2.0 * margin)
    caption_h = 22.0
    height = (tri_h + 2.0 * margin) * scale + caption_h

    def px(pt) -> tuple[float, float]:
        return ((pt[0] + margin) * scale,
                (tri_h + margin - pt[1]) * scale)

    r_px = 0.5 * p.d * scale
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{_f(height)}" '
        f'viewBox="0 0 {width} {_f(height)}">',
    ]
    corners = [px(v) for v in dom.vertices]
    path = " ".join(f"{'M' if k == 0 else 'L'} {_f(x)} {_f(y)}"
                    for k, (x, y) in enumerate(corners))
    out.append(f'<path d="{path} Z" fill="none" stroke="black" '
               f'stroke-width="1.5"/>')
    for i in range(p.n):
        cx, cy = px(p.centers[i] + offset)
        fill = RATTLER_FILL if i in p.rattlers else DISK_FILL
        out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r_px)}" '
                   f'fill="{fill}" stroke="black" stroke-width="1"/>')
    for b in bonds:
        bx, by = px(contact_point(p, b) + offset)
        out.append(f'<circle cx="{_f(bx)}" cy="{_f(by)}" r="{_f(max(1.5, 0.10 * r_px))}" '
                   f'fill="black"/>')
    font = max(6.0, 0.55 * r_px)
    for i in range(p.n):
        cx, cy = px(p.centers[i] + offset)
        out.append(f'<text x="{_f(cx)}" y="{_f(cy)}" font-size="{_f(font)}" '
                   f'font-family="sans-serif" text-anchor="middle" '
                   f'dominant-baseline="central">{i}</text>')
    label = p.label if p.label else f"n{p.n}"
    caption = f"{label}   n={p.n}   d={p.d:.15g}   bonds={len(bonds)}"
    out.append(f'<text x="{_f(0.5 * width)}" y="{_f(height - 6.0)}" '
               f'font-size="14" font-family="sans-serif" '
               f'text-anchor="middle">{caption}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
