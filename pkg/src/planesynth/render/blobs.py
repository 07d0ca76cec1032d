"""Connected-component extraction and contour-to-symbol grounding.

Enclosed white regions are pulled out of the binary line art (4-connected,
border-touching components discarded), their boundaries traced with
Moore-neighbor following, and every contour pixel assigned to its nearest
symbolic curve.  A region survives only if the induced curve sequence
chains into a symbolically closed loop whose exact area is computable;
everything else is rejected, mirroring the generation contract that every
shaded region must have an exact symbolic definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from ..errors import OpenLoop, UnmappedContour
from ..manifold import Arc, Circle, Entity, Manifold, Segment
from ..solver import LoopPiece, area_pieces
from .canvas import CanvasSpec, ViewTransform, point_px
from .raster import RasterImage, arc_angles

MIN_BLOB_PIXELS = 64
MIN_RUN_PIXELS = 3
COVERAGE_REQUIRED = 0.97

_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=int)


@dataclass
class RegionBlob:
    pixel_count: int
    bbox: tuple[int, int, int, int]  # x0, y0, x1, y1 inclusive-exclusive
    contour: list[tuple[int, int]]
    seed: tuple[int, int]


def extract_blobs(img: RasterImage) -> list[RegionBlob]:
    """Maximal 4-connected white components not touching the border."""
    white = ~img.bitplane
    labels, count = ndimage.label(white, structure=_FOUR)
    if count == 0:
        return []
    border = np.unique(
        np.concatenate(
            [labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]]
        )
    )
    border_set = set(int(b) for b in border if b != 0)
    blobs: list[RegionBlob] = []
    slices = ndimage.find_objects(labels)
    for idx, sl in enumerate(slices, start=1):
        if idx in border_set or sl is None:
            continue
        mask = labels[sl] == idx
        pixel_count = int(mask.sum())
        if pixel_count < MIN_BLOB_PIXELS:
            continue
        y_off, x_off = sl[0].start, sl[1].start
        ys, xs = np.nonzero(mask)
        seed = (int(xs[0]) + x_off, int(ys[0]) + y_off)
        contour = _moore_trace(mask, x_off, y_off)
        blobs.append(
            RegionBlob(
                pixel_count,
                (x_off, y_off, sl[1].stop, sl[0].stop),
                contour,
                seed,
            )
        )
    return blobs


_MOORE = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)]


def _moore_trace(mask: np.ndarray, x_off: int, y_off: int) -> list[tuple[int, int]]:
    """Boundary pixel ring via Moore-neighbor tracing (Jacob's stop)."""
    h, w = mask.shape
    ys, xs = np.nonzero(mask)
    start = (int(xs[0]), int(ys[0]))
    # First blob pixel in scanline order; its west neighbor is background.
    sy = int(ys[0])
    row = np.nonzero(mask[sy])[0]
    start = (int(row[0]), sy)

    def inside(p):
        return 0 <= p[0] < w and 0 <= p[1] < h and mask[p[1], p[0]]

    contour = [start]
    init_prev = (start[0] - 1, start[1])
    prev = init_prev
    cur = start
    limit = 4 * (h * w) + 8
    while True:
        rel = (prev[0] - cur[0], prev[1] - cur[1])
        i = _MOORE.index(rel)
        nxt: Optional[tuple[int, int]] = None
        for k in range(1, 9):
            d = _MOORE[(i + k) % 8]
            cand = (cur[0] + d[0], cur[1] + d[1])
            if inside(cand):
                back = _MOORE[(i + k - 1) % 8]
                prev = (cur[0] + back[0], cur[1] + back[1])
                nxt = cand
                break
        if nxt is None:
            break  # single-pixel blob
        cur = nxt
        if cur == start and prev == init_prev:
            break
        contour.append(cur)
        if len(contour) > limit:
            break
    return [(x + x_off, y + y_off) for x, y in contour]


# -- distance fields for assignment ------------------------------------------


@dataclass
class _CurvePx:
    ent: Entity
    kind: str  # "seg" | "circ" | "arc"
    data: tuple


def _curves_px(m: Manifold, tf: ViewTransform) -> list[_CurvePx]:
    out = []
    for ent in m.drawable_entities():
        k = ent.kind
        if isinstance(k, Segment):
            out.append(_CurvePx(ent, "seg", (*point_px(m, k.a, tf), *point_px(m, k.b, tf))))
        elif isinstance(k, Circle):
            cx, cy = point_px(m, k.center, tf)
            r = float(k.radius.interval(20).midpoint) * tf.scale
            out.append(_CurvePx(ent, "circ", (cx, cy, r)))
        elif isinstance(k, Arc):
            out.append(_CurvePx(ent, "arc", arc_angles(m, k, tf)))
    return out


def _curve_dist(c: _CurvePx, x: float, y: float) -> float:
    if c.kind == "seg":
        x0, y0, x1, y1 = c.data
        dx, dy = x1 - x0, y1 - y0
        l2 = dx * dx + dy * dy
        if l2 <= 1e-18:
            return math.hypot(x - x0, y - y0)
        t = max(0.0, min(1.0, ((x - x0) * dx + (y - y0) * dy) / l2))
        return math.hypot(x - (x0 + t * dx), y - (y0 + t * dy))
    if c.kind == "circ":
        cx, cy, r = c.data
        return abs(math.hypot(x - cx, y - cy) - r)
    cx, cy, r, start, sweep = c.data
    ang = math.atan2(-(y - cy), x - cx)
    rel = (ang - start) % (2 * math.pi)
    if rel <= sweep:
        return abs(math.hypot(x - cx, y - cy) - r)
    ex0 = cx + r * math.cos(start)
    ey0 = cy - r * math.sin(start)
    ex1 = cx + r * math.cos(start + sweep)
    ey1 = cy - r * math.sin(start + sweep)
    return min(math.hypot(x - ex0, y - ey0), math.hypot(x - ex1, y - ey1))


@dataclass(frozen=True)
class PiecePlan:
    """One boundary piece: carrier entity and traversal endpoints."""

    carrier: str
    start_pid: str
    end_pid: str
    is_arc: bool
    ccw: Optional[bool]  # traversal orientation for arcs


@dataclass
class LoopPlan:
    pieces: tuple[PiecePlan, ...]
    seed_px: tuple[int, int]

    def key(self) -> tuple:
        return tuple((p.carrier, p.start_pid, p.end_pid) for p in self.pieces)


def _incident_points(m: Manifold, ent: Entity, cache: dict) -> list[str]:
    if ent.id not in cache:
        pids = []
        for pid in sorted(m.points, key=lambda s: int(s[1:])):
            if m.point_on_entity(pid, ent):
                pids.append(pid)
        cache[ent.id] = pids
    return cache[ent.id]


def map_contour(
    blob: RegionBlob, m: Manifold, spec: CanvasSpec,
    tf: Optional[ViewTransform] = None,
    incident_cache: Optional[dict] = None,
) -> LoopPlan:
    """Assign contour pixels to symbolic curves and chain a closed loop.

    Raises UnmappedContour when coverage falls below the threshold and
    OpenLoop when the curve sequence cannot be chained through shared
    registered points with an exactly computable area.
    """
    if tf is None:
        tf = spec.fit(m)
    if incident_cache is None:
        incident_cache = {}
    curves = _curves_px(m, tf)
    if not curves:
        raise UnmappedContour("manifold has no drawable curves")
    threshold = spec.line_width + 1.0
    assignments: list[Optional[int]] = []
    hit = 0
    for (px, py) in blob.contour:
        x, y = px + 0.5, py + 0.5
        best, best_d = None, threshold
        for ci, c in enumerate(curves):
            d = _curve_dist(c, x, y)
            if d < best_d:
                best, best_d = ci, d
        assignments.append(best)
        if best is not None:
            hit += 1
    if hit < COVERAGE_REQUIRED * len(assignments):
        raise UnmappedContour(
            f"only {hit}/{len(assignments)} contour pixels map to curves"
        )
    runs = _runs(assignments)
    if not runs:
        raise UnmappedContour("no curve runs along the contour")
    if len(runs) == 1:
        return _single_carrier_loop(blob, m, curves[runs[0][0]], tf)
    # Chain shared endpoints between consecutive runs.
    joints: list[str] = []
    n = len(runs)
    for i in range(n):
        ci = curves[runs[i][0]].ent
        cj = curves[runs[(i + 1) % n][0]].ent
        shared = [
            p
            for p in _incident_points(m, ci, incident_cache)
            if p in set(_incident_points(m, cj, incident_cache))
        ]
        if not shared:
            raise OpenLoop(f"no shared point between {ci.id} and {cj.id}")
        # transition pixel: last pixel of run i
        tpx, tpy = blob.contour[runs[i][1][-1] % len(blob.contour)]
        tx, ty = tpx + 0.5, tpy + 0.5

        def dist_to(pid):
            x, y = point_px(m, pid, tf)
            return math.hypot(x - tx, y - ty)

        joints.append(min(shared, key=lambda p: (dist_to(p), int(p[1:]))))
    pieces = []
    for i in range(n):
        entry = joints[(i - 1) % n]
        exit_ = joints[i]
        if entry == exit_:
            raise OpenLoop("loop pinches at a single point")
        c = curves[runs[i][0]]
        if c.kind == "seg":
            pieces.append(PiecePlan(c.ent.id, entry, exit_, False, None))
        else:
            ccw = _arc_traversal_ccw(m, c, entry, exit_, blob, runs[i][1], tf)
            pieces.append(PiecePlan(c.ent.id, entry, exit_, True, ccw))
    plan = LoopPlan(tuple(pieces), blob.seed)
    _verify_plan(m, plan)
    return plan


def _runs(assignments: list[Optional[int]]) -> list[tuple[int, list[int]]]:
    """Cyclic run-length collapse: [(curve index, contour indices)]."""
    n = len(assignments)
    raw: list[tuple[Optional[int], list[int]]] = []
    for i, a in enumerate(assignments):
        if raw and raw[-1][0] == a:
            raw[-1][1].append(i)
        else:
            raw.append((a, [i]))
    if len(raw) > 1 and raw[0][0] == raw[-1][0]:
        raw[0] = (raw[0][0], raw[-1][1] + raw[0][1])
        raw.pop()
    runs = [(a, idx) for a, idx in raw if a is not None and len(idx) >= MIN_RUN_PIXELS]
    # merge adjacent duplicates after dropping gaps (cyclically)
    merged: list[tuple[int, list[int]]] = []
    for a, idx in runs:
        if merged and merged[-1][0] == a:
            merged[-1] = (a, merged[-1][1] + idx)
        else:
            merged.append((a, idx))
    if len(merged) > 1 and merged[0][0] == merged[-1][0]:
        merged[0] = (merged[0][0], merged[-1][1] + merged[0][1])
        merged.pop()
    return merged


def _angle_at(m: Manifold, pid: str, cx: float, cy: float, tf: ViewTransform) -> float:
    x, y = point_px(m, pid, tf)
    return math.atan2(-(y - cy), x - cx)


def _arc_traversal_ccw(
    m: Manifold, c: _CurvePx, entry: str, exit_: str,
    blob: RegionBlob, run_idx: list[int], tf: ViewTransform,
) -> bool:
    """Orientation of the arc piece actually bounding the blob, decided by
    whether the run's midpoint pixel sits on the ccw sweep entry->exit."""
    if c.kind == "circ":
        cx, cy, _r = c.data
    else:
        cx, cy, _r, _s, _w = c.data
    a0 = _angle_at(m, entry, cx, cy, tf)
    a1 = _angle_at(m, exit_, cx, cy, tf)
    mid_px = blob.contour[run_idx[len(run_idx) // 2]]
    am = math.atan2(-(mid_px[1] + 0.5 - cy), mid_px[0] + 0.5 - cx)
    ccw_span = (a1 - a0) % (2 * math.pi)
    ccw_rel = (am - a0) % (2 * math.pi)
    return ccw_rel <= ccw_span


def _single_carrier_loop(
    blob: RegionBlob, m: Manifold, c: _CurvePx, tf: ViewTransform
) -> LoopPlan:
    """A region bounded by one closed curve: split a circle into two arcs
    at registered (or newly plannable) boundary points."""
    if c.kind != "circ":
        raise OpenLoop("a single open curve cannot enclose a region")
    ent = c.ent
    cache: dict = {}
    pids = [p for p in _incident_points(m, ent, cache) if p != ent.kind.center]
    if len(pids) < 2:
        raise OpenLoop("circle has fewer than two registered boundary points")
    last_err: Exception | None = None
    for i in range(len(pids)):
        for j in range(i + 1, len(pids)):
            a, b = pids[i], pids[j]
            plan = LoopPlan(
                (
                    PiecePlan(ent.id, a, b, True, True),
                    PiecePlan(ent.id, b, a, True, True),
                ),
                blob.seed,
            )
            try:
                _verify_plan(m, plan)
                return plan
            except OpenLoop as e:
                last_err = e
    raise OpenLoop(f"no exactly splittable point pair on the circle: {last_err}")


def plan_pieces(m: Manifold, plan: LoopPlan) -> list[LoopPiece]:
    out = []
    for p in plan.pieces:
        ent = m.entities[p.carrier]
        start = m.coords(p.start_pid)
        end = m.coords(p.end_pid)
        if p.is_arc:
            k = ent.kind
            center = m.coords(k.center)
            out.append(LoopPiece("arc", start, end, center, k.radius, p.ccw))
        else:
            out.append(LoopPiece("seg", start, end, None, None, None))
    return out


def _verify_plan(m: Manifold, plan: LoopPlan) -> None:
    """Symbolic closure plus exact-area computability."""
    n = len(plan.pieces)
    for i in range(n):
        if plan.pieces[i].end_pid != plan.pieces[(i + 1) % n].start_pid:
            raise OpenLoop("consecutive pieces do not share an endpoint")
    from ..errors import TargetUnsolvable
    from ..exactnum.errors import KernelError

    try:
        area = area_pieces(plan_pieces(m, plan))
    except (TargetUnsolvable, KernelError) as e:
        raise OpenLoop(f"loop area is not exactly computable: {e}") from e
    if area.is_structural_zero:
        raise OpenLoop("loop area vanishes")


__all__ = [
    "RegionBlob",
    "LoopPlan",
    "PiecePlan",
    "extract_blobs",
    "map_contour",
    "plan_pieces",
    "MIN_BLOB_PIXELS",
]
