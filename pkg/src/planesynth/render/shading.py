"""Shaded-block instantiation: choose verified region loops and register
them as first-class entities via a replayable trajectory step."""

from __future__ import annotations

import random
from typing import Optional

from ..config import TierConfig
from ..errors import NoShadableRegion, OpenLoop, UnmappedContour
from ..manifold import Arc, BoundaryLoop, Circle, Manifold, Segment, register_executor
from .blobs import LoopPlan, extract_blobs, map_contour
from .canvas import CanvasSpec, ViewTransform
from .raster import render_lineart


def _pid_num(pid: str) -> int:
    return int(pid[1:])


def _find_seg_piece(m: Manifold, carrier: str, a: str, b: str):
    for ent in m.entities.values():
        if (
            isinstance(ent.kind, Segment)
            and ent.piece_of == carrier
            and {ent.kind.a, ent.kind.b} == {a, b}
        ):
            return ent
    return None


def _find_arc_piece(m: Manifold, carrier: str, a: str, b: str, ccw: bool):
    for ent in m.entities.values():
        if (
            isinstance(ent.kind, Arc)
            and ent.piece_of == carrier
            and ent.kind.a == a
            and ent.kind.b == b
            and ent.kind.ccw == ccw
        ):
            return ent
    return None


@register_executor("shade_region")
def _exec_shade(m: Manifold, parents, params):
    pieces_param = params["pieces"]
    style = params["style"]
    produced: list[str] = []
    refs = []
    for carrier_id, start_pid, end_pid, is_arc, ccw in pieces_param:
        carrier = m.entities[carrier_id]
        if is_arc:
            center = carrier.kind.center
            radius = carrier.kind.radius
            if _pid_num(start_pid) <= _pid_num(end_pid):
                a, b, stored_ccw, reversed_ = start_pid, end_pid, ccw, False
            else:
                a, b, stored_ccw, reversed_ = end_pid, start_pid, not ccw, True
            ent = _find_arc_piece(m, carrier_id, a, b, stored_ccw)
            if ent is None:
                ent = m.add_arc(center, radius, a, b, stored_ccw,
                                parents=[carrier_id, start_pid, end_pid],
                                piece_of=carrier_id)
                produced.append(ent.id)
        else:
            ka, kb = carrier.kind.a, carrier.kind.b
            if {start_pid, end_pid} == {ka, kb}:
                ent = carrier
                reversed_ = start_pid == kb
            else:
                a, b = sorted((start_pid, end_pid), key=_pid_num)
                reversed_ = start_pid != a
                ent = _find_seg_piece(m, carrier_id, a, b)
                if ent is None:
                    ent = m.add_segment(a, b,
                                        parents=[carrier_id, start_pid, end_pid],
                                        piece_of=carrier_id)
                    produced.append(ent.id)
        refs.append((ent.id, reversed_))
    block = m.add_shaded_block(BoundaryLoop(tuple(refs)), style)
    produced.append(block.id)
    corner_labels = "".join(m.label_of(p[1]) for p in pieces_param)
    desc = f"The region {corner_labels} is shaded with the {style} style."
    return produced, desc


def shade_regions(
    m: Manifold,
    rng: random.Random,
    cfg: TierConfig,
    spec: Optional[CanvasSpec] = None,
    tf: Optional[ViewTransform] = None,
) -> int:
    """Phase 2b: extract blobs, map them back to symbolic loops, and shade
    a target count of verified regions.  Raises NoShadableRegion when not a
    single region could be grounded; the caller then proceeds unshaded."""
    if spec is None:
        spec = CanvasSpec.from_config(cfg.canvas)
    if tf is None:
        tf = spec.fit(m)
    img = render_lineart(m, spec, tf)
    blobs = extract_blobs(img)
    if not blobs:
        raise NoShadableRegion("line art encloses no candidate region")
    target = rng.randint(cfg.shader.region_min, cfg.shader.region_max)
    order = list(range(len(blobs)))
    rng.shuffle(order)
    incident_cache: dict = {}
    shaded = 0
    failures = 0
    used: set = set()
    for bi in order:
        if shaded >= target or failures >= cfg.shader.max_fill_attempts:
            break
        try:
            plan = map_contour(blobs[bi], m, spec, tf, incident_cache)
        except (UnmappedContour, OpenLoop):
            failures += 1
            continue
        if plan.key() in used:
            failures += 1
            continue
        style = cfg.shader.styles[rng.randrange(len(cfg.shader.styles))]
        pieces_param = tuple(
            (p.carrier, p.start_pid, p.end_pid, p.is_arc,
             bool(p.ccw) if p.is_arc else False)
            for p in plan.pieces
        )
        m.run_step(
            "shade_region", (),
            {"pieces": pieces_param, "style": style, "phase": "shade"},
        )
        used.add(plan.key())
        shaded += 1
    if shaded == 0:
        raise NoShadableRegion("no blob mapped to a verified symbolic loop")
    return shaded


__all__ = ["shade_regions"]
