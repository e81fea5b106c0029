"""SVG pictures of 2-dimensional templates in moment coordinates."""
from __future__ import annotations

from typing import List

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionUnsupported, DomainError
from .expr import VectorExpression
from .lattice.template import FoldedTemplate, Region

SIZE = 480
MARGIN = 40
COLORS = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"]
DEFAULT_BOX = (-2.0, 2.0)


def _box(region: Region):
    if region.domain.bounds is not None:
        return region.domain.bounds
    return (DEFAULT_BOX, DEFAULT_BOX)


def _image_cloud(region: Region, n: int = 17) -> np.ndarray:
    (x0, x1), (y0, y1) = _box(region)
    pts = []
    for x in np.linspace(x0, x1, n):
        for y in np.linspace(y0, y1, n):
            p = np.array([x, y])
            if not region.domain.contains(p, tol=1e-12):
                continue
            try:
                pts.append(region.chart(p))
            except DomainError:
                continue
    return np.array(pts).reshape(-1, 2)


def _wall_points(region: Region, wall, n: int = 81) -> List[np.ndarray]:
    """Points of ``wall = 0`` inside the region, found by scanning lines of
    the bounding box in whichever direction meets the wall more often."""
    (x0, x1), (y0, y1) = _box(region)
    g = VectorExpression([wall], region.vars)
    best: List[np.ndarray] = []
    for axis in (0, 1):
        found = []
        outer = np.linspace(x0, x1, n) if axis == 1 else np.linspace(y0, y1, n)
        lo, hi = ((y0, y1) if axis == 1 else (x0, x1))
        for c in outer:
            def h(s, c=c):
                p = np.array([c, s]) if axis == 1 else np.array([s, c])
                return float(g(p)[0])

            ss = np.linspace(lo, hi, 65)
            try:
                vals = [h(s) for s in ss]
            except DomainError:
                continue
            for a, b, va, vb in zip(ss, ss[1:], vals, vals[1:]):
                if va == 0.0:
                    root = a
                elif va * vb < 0:
                    root = brentq(h, a, b, xtol=1e-12)
                else:
                    continue
                p = np.array([c, root]) if axis == 1 else np.array([root, c])
                if region.domain.contains(p, tol=1e-9):
                    found.append(p)
            if vals and vals[-1] == 0.0:
                p = np.array([c, hi]) if axis == 1 else np.array([hi, c])
                if region.domain.contains(p, tol=1e-9):
                    found.append(p)
        if len(found) > len(best):
            best = found
    return best


def _fmt(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def render_template(T: FoldedTemplate) -> str:
    """Draw region images, cone facets with labeled normals and dashed fold walls."""
    if T.dim != 2:
        raise DimensionUnsupported(f"only 2-dimensional templates can be rendered, got dimension {T.dim}")
    clouds = {r.id: _image_cloud(r) for r in T.regions}
    walls = []
    for w in T.fold_walls:
        region = T.region(w.regions[0])
        pts = _wall_points(region, w.wall)
        img = np.array([region.chart(p) for p in pts]).reshape(-1, 2)
        walls.append((w, img))

    allpts = [c for c in clouds.values() if len(c)] + [img for _, img in walls if len(img)]
    allpts.append(np.array([[float(x) for x in r.apex] for r in T.regions]))
    stack = np.vstack(allpts)
    lo, hi = stack.min(axis=0), stack.max(axis=0)
    span = max(float(np.max(hi - lo)), 1e-9)
    lo, hi = lo - 0.1 * span, lo + 1.1 * span
    scale = (SIZE - 2 * MARGIN) / (hi - lo).max()

    def xy(p):
        return MARGIN + (p[0] - lo[0]) * scale, SIZE - MARGIN - (p[1] - lo[1]) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        '<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto">'
        '<path d="M0,0 L6,3 L0,6 z" fill="black"/></marker></defs>',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    for r in T.regions:
        color = COLORS[r.id % len(COLORS)]
        out.append(f'<g class="region" data-id="{r.id}">')
        for p in clouds[r.id]:
            x, y = xy(p)
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="1.5" fill="{color}" fill-opacity="0.5"/>')
        apex = np.array([float(a) for a in r.apex])
        for v in r.normals:
            v = np.array(v, dtype=float)
            d = np.array([-v[1], v[0]]) / np.linalg.norm(v)
            a, b = xy(apex - 2 * span * d), xy(apex + 2 * span * d)
            out.append(
                f'<line class="facet" x1="{_fmt(a[0])}" y1="{_fmt(a[1])}" x2="{_fmt(b[0])}" y2="{_fmt(b[1])}" '
                f'stroke="black" stroke-width="1.5"/>'
            )
            tip = apex + 0.2 * span * v / np.linalg.norm(v)
            (ax, ay), (tx, ty) = xy(apex), xy(tip)
            out.append(
                f'<line class="normal" x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(tx)}" y2="{_fmt(ty)}" '
                f'stroke="black" marker-end="url(#arrow)"/>'
            )
            label = f"({int(v[0])},{int(v[1])})"
            out.append(f'<text x="{_fmt(tx + 4)}" y="{_fmt(ty - 4)}" font-size="11">{label}</text>')
        out.append("</g>")
    for w, img in walls:
        if not len(img):
            continue
        order = np.lexsort((img[:, 1], img[:, 0]))
        path = " ".join(("M" if i == 0 else "L") + "{},{}".format(*map(_fmt, xy(img[j]))) for i, j in enumerate(order))
        out.append(
            f'<path class="fold-wall" data-regions="{w.regions[0]},{w.regions[1]}" d="{path}" '
            f'fill="none" stroke="#c00" stroke-width="2" stroke-dasharray="6,4"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
