"""Deterministic software rasterizer and PNG encoding.

Strokes are rendered by exact pixel-center distance tests against the
stroked curve (no antialiasing, no external rasterizer), which makes the
binary line art a pure function of the scene.  PNG bytes are produced by a
self-contained encoder with a pinned compression level.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from ..manifold import Arc, Circle, Manifold, Segment
from .canvas import CanvasSpec, ViewTransform, point_px


@dataclass
class RasterImage:
    """Binary line-art plane: True where a stroke covers the pixel."""

    width: int
    height: int
    bitplane: np.ndarray  # bool, shape (height, width)

    @staticmethod
    def blank(width: int, height: int) -> "RasterImage":
        return RasterImage(width, height, np.zeros((height, width), dtype=bool))


def _bbox_slice(width, height, x0, y0, x1, y1, pad):
    ix0 = max(int(math.floor(min(x0, x1) - pad)), 0)
    iy0 = max(int(math.floor(min(y0, y1) - pad)), 0)
    ix1 = min(int(math.ceil(max(x0, x1) + pad)) + 1, width)
    iy1 = min(int(math.ceil(max(y0, y1) + pad)) + 1, height)
    if ix0 >= ix1 or iy0 >= iy1:
        return None
    return ix0, iy0, ix1, iy1


def _grid(ix0, iy0, ix1, iy1):
    ys, xs = np.mgrid[iy0:iy1, ix0:ix1]
    return xs + 0.5, ys + 0.5


def stroke_segment(img: RasterImage, x0, y0, x1, y1, width_px: float):
    half = width_px / 2.0
    box = _bbox_slice(img.width, img.height, x0, y0, x1, y1, half + 1)
    if box is None:
        return
    ix0, iy0, ix1, iy1 = box
    px, py = _grid(ix0, iy0, ix1, iy1)
    dx, dy = x1 - x0, y1 - y0
    seg_len2 = dx * dx + dy * dy
    if seg_len2 <= 1e-18:
        dist2 = (px - x0) ** 2 + (py - y0) ** 2
    else:
        t = ((px - x0) * dx + (py - y0) * dy) / seg_len2
        t = np.clip(t, 0.0, 1.0)
        dist2 = (px - (x0 + t * dx)) ** 2 + (py - (y0 + t * dy)) ** 2
    img.bitplane[iy0:iy1, ix0:ix1] |= dist2 <= half * half


def stroke_circle(img: RasterImage, cx, cy, r, width_px: float):
    half = width_px / 2.0
    box = _bbox_slice(img.width, img.height, cx - r, cy - r, cx + r, cy + r, half + 1)
    if box is None:
        return
    ix0, iy0, ix1, iy1 = box
    px, py = _grid(ix0, iy0, ix1, iy1)
    dist = np.sqrt((px - cx) ** 2 + (py - cy) ** 2)
    img.bitplane[iy0:iy1, ix0:ix1] |= np.abs(dist - r) <= half


def stroke_arc(img: RasterImage, cx, cy, r, ang_start, ang_sweep_ccw, width_px: float):
    """Arc from ang_start sweeping ang_sweep_ccw radians counterclockwise in
    world orientation (pixel y grows downward, so screen angles are negated)."""
    half = width_px / 2.0
    box = _bbox_slice(img.width, img.height, cx - r, cy - r, cx + r, cy + r, half + 1)
    if box is None:
        return
    ix0, iy0, ix1, iy1 = box
    px, py = _grid(ix0, iy0, ix1, iy1)
    dist = np.sqrt((px - cx) ** 2 + (py - cy) ** 2)
    on_ring = np.abs(dist - r) <= half
    # Pixel angle in world orientation (y up): flip the pixel y axis.
    ang = np.arctan2(-(py - cy), px - cx)
    rel = np.mod(ang - ang_start, 2 * math.pi)
    in_sweep = rel <= ang_sweep_ccw
    # Keep the endpoints' caps so that butt joints do not leave pinholes.
    for cap in (0.0, ang_sweep_ccw):
        ex = cx + r * math.cos(ang_start + cap)
        ey = cy - r * math.sin(ang_start + cap)
        in_sweep |= (px - ex) ** 2 + (py - ey) ** 2 <= half * half
    img.bitplane[iy0:iy1, ix0:ix1] |= on_ring & in_sweep


def arc_angles(m: Manifold, arc: Arc, tf: ViewTransform) -> tuple[float, float, float, float, float]:
    """(cx, cy, r, start_angle, ccw_sweep) of an arc in pixel space but
    world angular orientation."""
    cx, cy = point_px(m, arc.center, tf)
    r = float(arc.radius.interval(20).midpoint) * tf.scale
    ax, ay = point_px(m, arc.a, tf)
    bx, by = point_px(m, arc.b, tf)
    a_ang = math.atan2(-(ay - cy), ax - cx)
    b_ang = math.atan2(-(by - cy), bx - cx)
    if arc.ccw:
        sweep = (b_ang - a_ang) % (2 * math.pi)
        return cx, cy, r, a_ang, sweep
    sweep = (a_ang - b_ang) % (2 * math.pi)
    return cx, cy, r, b_ang, sweep


def render_lineart(m: Manifold, spec: CanvasSpec,
                   tf: ViewTransform | None = None) -> RasterImage:
    """Unlabeled binary line art of every drawable curve."""
    if tf is None:
        tf = spec.fit(m)
    img = RasterImage.blank(spec.width, spec.height)
    for ent in m.drawable_entities():
        k = ent.kind
        if isinstance(k, Segment):
            x0, y0 = point_px(m, k.a, tf)
            x1, y1 = point_px(m, k.b, tf)
            stroke_segment(img, x0, y0, x1, y1, spec.line_width)
        elif isinstance(k, Circle):
            cx, cy = point_px(m, k.center, tf)
            r = float(k.radius.interval(20).midpoint) * tf.scale
            stroke_circle(img, cx, cy, r, spec.line_width)
        elif isinstance(k, Arc):
            cx, cy, r, start, sweep = arc_angles(m, k, tf)
            stroke_arc(img, cx, cy, r, start, sweep, spec.line_width)
    return img


# -- PNG encoding ---------------------------------------------------------------


def _png_chunk(tag: bytes, payload: bytes) -> bytes:
    out = struct.pack(">I", len(payload)) + tag + payload
    return out + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)


def encode_png_gray(pixels: np.ndarray) -> bytes:
    """8-bit grayscale PNG from a (h, w) uint8 array; deterministic bytes."""
    h, w = pixels.shape
    raw = b"".join(b"\x00" + pixels[row].tobytes() for row in range(h))
    header = struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _png_chunk(b"IHDR", header)
        + _png_chunk(b"IDAT", zlib.compress(raw, 6))
        + _png_chunk(b"IEND", b"")
    )


def encode_png_rgb(pixels: np.ndarray) -> bytes:
    """24-bit RGB PNG from a (h, w, 3) uint8 array; deterministic bytes."""
    h, w, _ = pixels.shape
    raw = b"".join(b"\x00" + pixels[row].tobytes() for row in range(h))
    header = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _png_chunk(b"IHDR", header)
        + _png_chunk(b"IDAT", zlib.compress(raw, 6))
        + _png_chunk(b"IEND", b"")
    )


def lineart_png(img: RasterImage) -> bytes:
    pixels = np.where(img.bitplane, 0, 255).astype(np.uint8)
    return encode_png_gray(pixels)


__all__ = [
    "RasterImage",
    "render_lineart",
    "stroke_segment",
    "stroke_circle",
    "stroke_arc",
    "arc_angles",
    "encode_png_gray",
    "encode_png_rgb",
    "lineart_png",
]
