"""Labeled diagram output: an SVG 1.1 subset plus a raster derived from the
same scene by deterministic scanline filling (no external rasterizer).

Shade styles are fixed for a dataset run: hatch lines at 45 degrees with
12 px spacing, 40 percent solid gray, crosshatch as two hatch passes, and
a vertical 25-to-55 percent gray gradient.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..manifold import Arc, Circle, Manifold, PolygonRef, Segment, ShadedBlock
from .canvas import CanvasSpec, ViewTransform, point_px
from .raster import RasterImage, arc_angles, encode_png_rgb, render_lineart

HATCH_SPACING = 12
HATCH_THICKNESS = 2
SOLID_GRAY = 153        # 40 percent gray
GRADIENT_TOP = 191      # 25 percent gray
GRADIENT_BOTTOM = 115   # 55 percent gray
HATCH_GRAY = 85
LABEL_OFFSET = 10.0
LABEL_FONT_PX = 26


def _fmt(x: float) -> str:
    return f"{x:.3f}"


# -- loop flattening -------------------------------------------------------------


def _loop_polyline(m: Manifold, block: ShadedBlock, tf: ViewTransform) -> list[tuple[float, float]]:
    """Flatten a boundary loop to pixel-space points (sagitta <= 0.25 px)."""
    pts: list[tuple[float, float]] = []
    for eid, reversed_ in block.loop.curves:
        ent = m.entities[eid]
        k = ent.kind
        if isinstance(k, Segment):
            a, b = (k.b, k.a) if reversed_ else (k.a, k.b)
            pts.append(point_px(m, a, tf))
        elif isinstance(k, Arc):
            cx, cy, r, start, sweep = arc_angles(m, k, tf)
            if reversed_:
                start = (start + sweep) % (2 * math.pi)
                sweep = -sweep
            if r > 0.25:
                step = 2.0 * math.acos(max(-1.0, 1.0 - 0.25 / r))
            else:
                step = math.pi / 8
            n = max(2, int(math.ceil(abs(sweep) / max(step, 1e-3))))
            for i in range(n):
                ang = start + sweep * i / n
                pts.append((cx + r * math.cos(ang), cy - r * math.sin(ang)))
    return pts


def _scanline_fill(canvas: np.ndarray, poly: list[tuple[float, float]], style: str):
    """Even-odd fill of a pixel-space polygon with the given shade style."""
    if len(poly) < 3:
        return
    h, w, _ = canvas.shape
    ys = [p[1] for p in poly]
    y0 = max(int(math.floor(min(ys))), 0)
    y1 = min(int(math.ceil(max(ys))), h - 1)
    n = len(poly)
    for row in range(y0, y1 + 1):
        yc = row + 0.5
        xs: list[float] = []
        for i in range(n):
            ax, ay = poly[i]
            bx, by = poly[(i + 1) % n]
            if (ay <= yc < by) or (by <= yc < ay):
                t = (yc - ay) / (by - ay)
                xs.append(ax + t * (bx - ax))
        xs.sort()
        for j in range(0, len(xs) - 1, 2):
            xa = max(int(math.ceil(xs[j] - 0.5)), 0)
            xb = min(int(math.floor(xs[j + 1] - 0.5)), w - 1)
            if xb < xa:
                continue
            _fill_span(canvas, row, xa, xb, style, h)


def _fill_span(canvas: np.ndarray, row: int, xa: int, xb: int, style: str, height: int):
    cols = np.arange(xa, xb + 1)
    if style == "solid":
        canvas[row, xa:xb + 1] = SOLID_GRAY
        return
    if style == "gradient":
        g = GRADIENT_TOP + (GRADIENT_BOTTOM - GRADIENT_TOP) * (row / max(height - 1, 1))
        canvas[row, xa:xb + 1] = int(round(g))
        return
    diag1 = (cols + row) % HATCH_SPACING < HATCH_THICKNESS
    if style == "hatch":
        sel = diag1
    else:  # crosshatch
        diag2 = (cols - row) % HATCH_SPACING < HATCH_THICKNESS
        sel = diag1 | diag2
    canvas[row, cols[sel]] = HATCH_GRAY


# -- label layout -------------------------------------------------------------


def _label_positions(m: Manifold, tf: ViewTransform, spec: CanvasSpec) -> list[tuple[str, float, float]]:
    pts = [(p.label, *point_px(m, p.id, tf)) for p in
           sorted(m.points.values(), key=lambda p: int(p.id[1:])) if p.label]
    if not pts:
        return []
    cx = sum(p[1] for p in pts) / len(pts)
    cy = sum(p[2] for p in pts) / len(pts)
    placed: list[tuple[float, float, float, float]] = []
    out = []
    for label, x, y in pts:
        dx, dy = x - cx, y - cy
        norm = math.hypot(dx, dy)
        if norm < 1e-9:
            dx, dy, norm = 0.0, -1.0, 1.0
        ox = x + (dx / norm) * (LABEL_OFFSET + spec.line_width + 4)
        oy = y + (dy / norm) * (LABEL_OFFSET + spec.line_width + 4)
        bw = 0.55 * LABEL_FONT_PX * max(len(label), 1)
        bh = LABEL_FONT_PX * 1.1
        px, py = ox, oy
        k = 0
        while _collides(px, py, bw, bh, placed) and k < 64:
            k += 1
            ang = 0.9 * k
            rad = 4.0 * k
            px = ox + rad * math.cos(ang)
            py = oy + rad * math.sin(ang)
        placed.append((px, py, bw, bh))
        out.append((label, px, py))
    return out


def _collides(x, y, w, h, placed) -> bool:
    for (px, py, pw, ph) in placed:
        if abs(x - px) * 2 < (w + pw) and abs(y - py) * 2 < (h + ph):
            return True
    return False


# -- SVG document -------------------------------------------------------------


def _svg_loop_path(m: Manifold, block: ShadedBlock, tf: ViewTransform) -> str:
    cmds = []
    first = True
    for eid, reversed_ in block.loop.curves:
        ent = m.entities[eid]
        k = ent.kind
        if isinstance(k, Segment):
            a, b = (k.b, k.a) if reversed_ else (k.a, k.b)
            x0, y0 = point_px(m, a, tf)
            x1, y1 = point_px(m, b, tf)
            if first:
                cmds.append(f"M {_fmt(x0)} {_fmt(y0)}")
                first = False
            cmds.append(f"L {_fmt(x1)} {_fmt(y1)}")
        elif isinstance(k, Arc):
            a, b = (k.b, k.a) if reversed_ else (k.a, k.b)
            ccw = k.ccw != reversed_
            x0, y0 = point_px(m, a, tf)
            x1, y1 = point_px(m, b, tf)
            cx, cy, r, start, sweep = arc_angles(m, k, tf)
            if first:
                cmds.append(f"M {_fmt(x0)} {_fmt(y0)}")
                first = False
            large = 1 if sweep > math.pi else 0
            sweep_flag = 0 if ccw else 1  # world ccw is screen counter-sweep
            cmds.append(
                f"A {_fmt(r)} {_fmt(r)} 0 {large} {sweep_flag} {_fmt(x1)} {_fmt(y1)}"
            )
    cmds.append("Z")
    return " ".join(cmds)


_STYLE_FILL_URL = {
    "hatch": "url(#hatch)",
    "crosshatch": "url(#crosshatch)",
    "solid": f"rgb({SOLID_GRAY},{SOLID_GRAY},{SOLID_GRAY})",
    "gradient": "url(#vgradient)",
}


def svg_document(m: Manifold, spec: CanvasSpec, tf: Optional[ViewTransform] = None) -> str:
    if tf is None:
        tf = spec.fit(m)
    gray = f"rgb({HATCH_GRAY},{HATCH_GRAY},{HATCH_GRAY})"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
        "<defs>",
        f'<pattern id="hatch" patternUnits="userSpaceOnUse" width="{HATCH_SPACING}" '
        f'height="{HATCH_SPACING}" patternTransform="rotate(45)">'
        f'<rect width="{HATCH_SPACING}" height="{HATCH_THICKNESS}" fill="{gray}"/>'
        "</pattern>",
        f'<pattern id="crosshatch" patternUnits="userSpaceOnUse" width="{HATCH_SPACING}" '
        f'height="{HATCH_SPACING}" patternTransform="rotate(45)">'
        f'<rect width="{HATCH_SPACING}" height="{HATCH_THICKNESS}" fill="{gray}"/>'
        f'<rect width="{HATCH_THICKNESS}" height="{HATCH_SPACING}" fill="{gray}"/>'
        "</pattern>",
        '<linearGradient id="vgradient" x1="0" y1="0" x2="0" y2="1">'
        f'<stop offset="0" stop-color="rgb({GRADIENT_TOP},{GRADIENT_TOP},{GRADIENT_TOP})"/>'
        f'<stop offset="1" stop-color="rgb({GRADIENT_BOTTOM},{GRADIENT_BOTTOM},{GRADIENT_BOTTOM})"/>'
        "</linearGradient>",
        "</defs>",
        f'<rect width="{spec.width}" height="{spec.height}" fill="#ffffff"/>',
    ]
    for ent in m.nonpoint_entities(include_pieces=True):
        if isinstance(ent.kind, ShadedBlock):
            d = _svg_loop_path(m, ent.kind, tf)
            fill = _STYLE_FILL_URL[ent.kind.style]
            parts.append(f'<path d="{d}" fill="{fill}" stroke="none"/>')
    stroke = f'stroke="{spec.line_color}" stroke-width="{spec.line_width}" fill="none"'
    for ent in m.drawable_entities():
        k = ent.kind
        if isinstance(k, Segment):
            x0, y0 = point_px(m, k.a, tf)
            x1, y1 = point_px(m, k.b, tf)
            parts.append(
                f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" '
                f'y2="{_fmt(y1)}" {stroke} stroke-linecap="round"/>'
            )
        elif isinstance(k, Circle):
            cx, cy = point_px(m, k.center, tf)
            r = float(k.radius.interval(20).midpoint) * tf.scale
            parts.append(
                f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" {stroke}/>'
            )
        elif isinstance(k, Arc):
            cx, cy, r, start, sweep = arc_angles(m, k, tf)
            x0, y0 = point_px(m, k.a, tf)
            x1, y1 = point_px(m, k.b, tf)
            large = 1 if sweep > math.pi else 0
            sweep_flag = 0 if k.ccw else 1
            parts.append(
                f'<path d="M {_fmt(x0)} {_fmt(y0)} A {_fmt(r)} {_fmt(r)} 0 '
                f'{large} {sweep_flag} {_fmt(x1)} {_fmt(y1)}" {stroke} '
                'stroke-linecap="round"/>'
            )
    for p in sorted(m.points.values(), key=lambda p: int(p.id[1:])):
        if p.label:
            x, y = point_px(m, p.id, tf)
            parts.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{spec.line_width + 1}" '
                f'fill="{spec.line_color}"/>'
            )
    for label, x, y in _label_positions(m, tf, spec):
        parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="monospace" '
            f'font-size="{LABEL_FONT_PX}" text-anchor="middle" '
            f'fill="#000000">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# -- final raster -------------------------------------------------------------

# 5x7 bitmap glyphs (rows top to bottom, 5-bit masks).
_FONT = {
    "A": (0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    "B": (0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E),
    "C": (0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E),
    "D": (0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E),
    "E": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F),
    "F": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10),
    "G": (0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F),
    "H": (0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    "I": (0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "J": (0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C),
    "K": (0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11),
    "L": (0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F),
    "M": (0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11),
    "N": (0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11),
    "O": (0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "P": (0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10),
    "Q": (0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D),
    "R": (0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11),
    "S": (0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E),
    "T": (0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04),
    "U": (0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "V": (0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04),
    "W": (0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11),
    "X": (0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11),
    "Y": (0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04),
    "Z": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F),
    "0": (0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E),
    "1": (0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "2": (0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F),
    "3": (0x1E, 0x01, 0x01, 0x0E, 0x01, 0x01, 0x1E),
    "4": (0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02),
    "5": (0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E),
    "6": (0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E),
    "7": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08),
    "8": (0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E),
    "9": (0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C),
}

_SUBSCRIPTS = "₀₁₂₃₄₅₆₇₈₉"


def _draw_glyph(canvas: np.ndarray, ch: str, x: int, y: int, scale: int):
    glyph = _FONT.get(ch)
    if glyph is None:
        return
    h, w, _ = canvas.shape
    for row, bits in enumerate(glyph):
        for col in range(5):
            if bits & (1 << (4 - col)):
                y0 = y + row * scale
                x0 = x + col * scale
                y1 = min(y0 + scale, h)
                x1 = min(x0 + scale, w)
                if y0 < h and x0 < w and y0 >= 0 and x0 >= 0:
                    canvas[max(y0, 0):y1, max(x0, 0):x1] = 0


def _draw_label(canvas: np.ndarray, label: str, x: float, y: float):
    scale = 3
    sub_scale = 2
    cx = int(round(x - 0.5 * 5 * scale * len(label) / 1.6))
    cy = int(round(y - 3.5 * scale))
    for ch in label:
        if ch in _SUBSCRIPTS:
            _draw_glyph(canvas, str(_SUBSCRIPTS.index(ch)), cx, cy + 4 * scale, sub_scale)
            cx += 5 * sub_scale + 2
        else:
            _draw_glyph(canvas, ch, cx, cy, scale)
            cx += 5 * scale + 2


def final_raster(m: Manifold, spec: CanvasSpec, tf: Optional[ViewTransform] = None) -> np.ndarray:
    if tf is None:
        tf = spec.fit(m)
    canvas = np.full((spec.height, spec.width, 3), 255, dtype=np.uint8)
    for ent in m.nonpoint_entities(include_pieces=True):
        if isinstance(ent.kind, ShadedBlock):
            poly = _loop_polyline(m, ent.kind, tf)
            _scanline_fill(canvas, poly, ent.kind.style)
    strokes = render_lineart(m, spec, tf)
    canvas[strokes.bitplane] = 0
    for p in sorted(m.points.values(), key=lambda p: int(p.id[1:])):
        if p.label:
            x, y = point_px(m, p.id, tf)
            rr = spec.line_width + 1
            y0, y1 = int(y - rr), int(y + rr) + 1
            x0, x1 = int(x - rr), int(x + rr) + 1
            ys, xs = np.mgrid[max(y0, 0):min(y1, spec.height),
                              max(x0, 0):min(x1, spec.width)]
            mask = (xs + 0.5 - x) ** 2 + (ys + 0.5 - y) ** 2 <= rr * rr
            canvas[max(y0, 0):min(y1, spec.height),
                   max(x0, 0):min(x1, spec.width)][mask] = 0
    for label, x, y in _label_positions(m, tf, spec):
        _draw_label(canvas, label, x, y)
    return canvas


def render_final(m: Manifold, spec: CanvasSpec,
                 tf: Optional[ViewTransform] = None) -> tuple[str, bytes]:
    """Deterministic (svg text, final png bytes) for a shaded manifold."""
    if tf is None:
        tf = spec.fit(m)
    svg = svg_document(m, spec, tf)
    png = encode_png_rgb(final_raster(m, spec, tf))
    return svg, png


__all__ = ["svg_document", "final_raster", "render_final"]
