"""SVG drawings of balls: sphere r sits on the circle of radius r."""

from __future__ import annotations

import math
from typing import Iterable, Mapping

from . import __version__
from .errors import TooLarge
from .graph import RotationGraph
from .spheres import bfs_spheres

MAX_VERTICES = 5000
PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf", "#7f7f7f", "#bcbd22"]


def layered_layout(g: RotationGraph, ring: float = 60.0) -> dict[int, tuple[float, float]]:
    """Deterministic circular-layer positions; each sphere follows its id order."""
    _, spheres = bfs_spheres(g)
    pos = {}
    for r, s in enumerate(spheres):
        if r == 0:
            for v in s:
                pos[v] = (0.0, 0.0)
            continue
        k = len(s)
        for i, v in enumerate(sorted(s)):
            a = 2 * math.pi * i / k
            pos[v] = (r * ring * math.cos(a), r * ring * math.sin(a))
    return pos


def render_svg(g: RotationGraph, highlight: Iterable[int] = (),
               signs: Mapping[int, float] | None = None, title: str = "") -> str:
    """Straight-line drawing; `highlight` vertices get a red ring, `signs` colour +/- values."""
    if g.n > MAX_VERTICES:
        raise TooLarge(f"{g.n} vertices exceeds the render limit of {MAX_VERTICES}")
    dist, spheres = bfs_spheres(g)
    ring = 60.0
    pos = layered_layout(g, ring)
    R = max(len(spheres) - 1, 1)
    half = R * ring + 40
    size = 2 * half
    hl = set(highlight)
    out = [f'<?xml version="1.0" encoding="UTF-8"?>',
           f"<!-- planarspec {__version__} -->",
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size:.0f}" '
           f'viewBox="{-half:.1f} {-half:.1f} {size:.1f} {size:.1f}">']
    if title:
        out.append(f"<title>{title}</title>")
    out.append('<g stroke="#999" stroke-width="0.6">')
    for u, w in g.edges():
        (x1, y1), (x2, y2) = pos[u], pos[w]
        out.append(f'<line x1="{x1:.2f}" y1="{-y1:.2f}" x2="{x2:.2f}" y2="{-y2:.2f}"/>')
    out.append("</g>")
    rad = max(1.5, min(6.0, 600.0 / max(len(s) for s in spheres)))
    for v in range(g.n):
        x, y = pos[v]
        fill = PALETTE[dist[v] % len(PALETTE)]
        if signs is not None and v in signs and signs[v] != 0:
            fill = "#d62728" if signs[v] > 0 else "#1a1a1a"
        stroke = ' stroke="#d62728" stroke-width="2"' if v in hl else ""
        out.append(f'<circle cx="{x:.2f}" cy="{-y:.2f}" r="{rad:.2f}" fill="{fill}"{stroke}/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
