"""Analytic ground-truth solver.

Lengths, angles, perimeters, and areas are evaluated directly from exact
point coordinates.  Mixed segment/arc regions use the generalized shoelace:
the chord polygon's signed area plus, for every arc, a circular-segment
compensation (r^2/2)(theta - sin theta) signed by the arc's traversal
orientation around its own center.  Targets whose answer leaves the exact
number field (off-grid angles, nesting overflow, irrational ratios) raise
TargetUnsolvable and are skipped by the caller.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .config import TierConfig
from .errors import (
    DegeneratePolygon,
    DegenerateRay,
    NoSolvableTarget,
    TargetUnsolvable,
)
from .exactnum import ExactAngle, ExactScalar, div, is_zero, sin_cos, sqrt
from .exactnum.errors import KernelError, UnsupportedAngle
from .geom import Vec
from .manifold import (
    Arc,
    BoundaryLoop,
    Circle,
    Entity,
    Manifold,
    PolygonRef,
    Segment,
    ShadedBlock,
)

QUESTION_KINDS = (
    "Length",
    "Angle",
    "Perimeter",
    "Entity Area",
    "Shadow Area",
    "Shadow Ratio",
    "Shadow Entity Ratio",
    "Overall Shadow Area",
)


@dataclass(frozen=True)
class QueryTarget:
    kind: str
    subjects: tuple[str, ...]  # point or entity ids, kind-specific
    level: int


@dataclass(frozen=True)
class RatioAnswer:
    quotient: ExactScalar
    num: int
    den: int

    @property
    def presentation(self) -> str:
        return f"{self.num} : {self.den}"


# -- elementary quantities ---------------------------------------------------


def length(m: Manifold, a: str, b: str) -> ExactScalar:
    """Exact Euclidean distance between two registered points."""
    try:
        return (m.coords(a) - m.coords(b)).norm()
    except KernelError as e:
        raise TargetUnsolvable(f"length {a}-{b}: {e}") from e


_GRID_CANDIDATES: Optional[list[tuple[Fraction, ExactScalar]]] = None


def _grid_cosines() -> list[tuple[Fraction, ExactScalar]]:
    """(q, cos(q*pi)) for every supported q in (0, 1]."""
    global _GRID_CANDIDATES
    if _GRID_CANDIDATES is None:
        qs = sorted(
            {Fraction(k, 12) for k in range(1, 13)} | {Fraction(k, 10) for k in range(1, 11)}
        )
        _GRID_CANDIDATES = [(q, sin_cos(ExactAngle(q))[1]) for q in qs]
    return _GRID_CANDIDATES


def _match_grid_angle(cos_value: ExactScalar, hint: float) -> Optional[Fraction]:
    """Find q with cos(q*pi) == cos_value exactly, shortlisting by float."""
    for q, cos_q in _grid_cosines():
        if abs(float(q) * 3.141592653589793 - hint) > 0.2:
            continue
        if is_zero(cos_value - cos_q).is_zero:
            return q
    # fall back to the full scan in case the hint was off
    for q, cos_q in _grid_cosines():
        if is_zero(cos_value - cos_q).is_zero:
            return q
    return None


def angle(m: Manifold, vertex: str, a: str, b: str) -> ExactAngle:
    """Unsigned angle at `vertex` between rays to a and b, in (0, pi]."""
    v = m.coords(vertex)
    u = m.coords(a) - v
    w = m.coords(b) - v
    if is_zero(u.norm_sq()).is_zero or is_zero(w.norm_sq()).is_zero:
        raise DegenerateRay("ray endpoint coincides with the vertex")
    try:
        denom = sqrt(u.norm_sq() * w.norm_sq())
        cos_value = div(u.dot(w), denom)
    except KernelError as e:
        raise TargetUnsolvable(f"angle at {vertex}: {e}") from e
    import math

    ux, uy = u.float_xy()
    wx, wy = w.float_xy()
    hint = abs(
        math.atan2(ux * wy - uy * wx, ux * wx + uy * wy)
    )
    q = _match_grid_angle(cos_value, hint)
    if q is None:
        raise TargetUnsolvable(f"angle at {vertex} is off the exact grid")
    return ExactAngle(q)


def perimeter(m: Manifold, subject: str) -> ExactScalar:
    """Total boundary length of a polygon, circle, or shaded loop."""
    ent = m.entities[subject]
    k = ent.kind
    if isinstance(k, PolygonRef):
        total = ExactScalar.zero()
        pts = k.points
        for i in range(len(pts)):
            total = total + length(m, pts[i], pts[(i + 1) % len(pts)])
        return total
    if isinstance(k, Circle):
        return k.radius * ExactScalar.pi_multiple(2)
    if isinstance(k, ShadedBlock):
        total = ExactScalar.zero()
        for eid, _rev in k.loop.curves:
            piece = m.entities[eid]
            pk = piece.kind
            if isinstance(pk, Segment):
                total = total + length(m, pk.a, pk.b)
            elif isinstance(pk, Arc):
                theta = _arc_central_angle(m, piece)
                total = total + pk.radius * theta.radians_scalar()
            else:
                raise TargetUnsolvable("loop contains a non-curve piece")
        return total
    raise TargetUnsolvable(f"perimeter of {ent.kind_name} is undefined")


# -- areas ---------------------------------------------------------------------


def area_polygon(vertices: list[Vec]) -> ExactScalar:
    """Exact shoelace area of a simple polygon given in order."""
    if len(vertices) < 3:
        raise DegeneratePolygon("polygon needs at least 3 vertices")
    s = _signed_shoelace(vertices)
    if is_zero(s).is_zero:
        raise DegeneratePolygon("zero-area polygon")
    return s.abs()


def _signed_shoelace(vertices: list[Vec]) -> ExactScalar:
    total = ExactScalar.zero()
    n = len(vertices)
    for i in range(n):
        total = total + vertices[i].cross(vertices[(i + 1) % n])
    return total * ExactScalar.rational(1, 2)


def area_segment(r: ExactScalar, theta: ExactAngle) -> ExactScalar:
    """Circular-segment area (r^2 / 2)(theta - sin theta)."""
    if theta.q <= 0 or theta.q >= 2:
        raise UnsupportedAngle("central angle must lie in (0, 2pi)")
    sin_t, _ = sin_cos(theta)
    half_r2 = r * r * ExactScalar.rational(1, 2)
    return half_r2 * (theta.radians_scalar() - sin_t)


def arc_sweep_angle(center: Vec, radius: ExactScalar, start: Vec, end: Vec,
                    ccw: bool) -> ExactAngle:
    """Central angle swept from start to end around center (ccw or cw),
    recovered exactly by matching the endpoint cosine against the grid."""
    u = start - center
    w = end - center
    if not ccw:
        u, w = w, u
    try:
        cos_value = div(u.dot(w), radius * radius)
    except KernelError as e:
        raise TargetUnsolvable(f"arc angle: {e}") from e
    import math

    ux, uy = u.float_xy()
    wx, wy = w.float_xy()
    hint = math.atan2(ux * wy - uy * wx, ux * wx + uy * wy)
    if hint < 0:
        hint += 2 * math.pi
    q = _match_grid_angle(cos_value, min(hint, 2 * math.pi - hint))
    if q is None:
        raise TargetUnsolvable("arc central angle is off the exact grid")
    cross_sign = u.cross(w).sign()
    if cross_sign < 0:
        return ExactAngle(2 - q)  # sweep exceeds pi
    return ExactAngle(q)


def _arc_central_angle(m: Manifold, arc_ent: Entity) -> ExactAngle:
    k = arc_ent.kind
    return arc_sweep_angle(
        m.coords(k.center), k.radius, m.coords(k.a), m.coords(k.b), k.ccw
    )


@dataclass(frozen=True)
class LoopPiece:
    """One boundary curve in traversal order: a chord segment or an arc."""

    kind: str  # "seg" | "arc"
    start: Vec
    end: Vec
    center: Optional[Vec] = None
    radius: Optional[ExactScalar] = None
    ccw: Optional[bool] = None  # traversal orientation around the center


def area_pieces(pieces: list[LoopPiece]) -> ExactScalar:
    """Generalized shoelace over a mixed segment/arc boundary loop.

    Green's theorem form: the chord polygon's signed area plus one signed
    circular-segment compensation per arc, positive when the arc is
    traversed counterclockwise around its own center within the loop's
    traversal, negative otherwise.  The loop's overall orientation only
    flips the total's sign, so the absolute value is returned.
    """
    verts = [p.start for p in pieces]
    compensation = ExactScalar.zero()
    for p in pieces:
        if p.kind != "arc":
            continue
        theta = arc_sweep_angle(p.center, p.radius, p.start, p.end, bool(p.ccw))
        seg_area = area_segment(p.radius, theta)
        compensation = compensation + (seg_area if p.ccw else -seg_area)
    if len(verts) < 2:
        raise TargetUnsolvable("loop too short")
    if len(verts) == 2:
        poly_signed = ExactScalar.zero()
    else:
        poly_signed = _signed_shoelace(verts)
    total = poly_signed + compensation
    if total.sign() == 0:
        raise TargetUnsolvable("region area vanishes")
    return total.abs()


def loop_to_pieces(m: Manifold, loop: BoundaryLoop) -> list[LoopPiece]:
    pieces = []
    for eid, reversed_ in loop.curves:
        ent = m.entities[eid]
        k = ent.kind
        if isinstance(k, Segment):
            a, b = (k.b, k.a) if reversed_ else (k.a, k.b)
            pieces.append(LoopPiece("seg", m.coords(a), m.coords(b)))
        elif isinstance(k, Arc):
            a, b = (k.b, k.a) if reversed_ else (k.a, k.b)
            ccw_in_loop = k.ccw != reversed_
            pieces.append(
                LoopPiece("arc", m.coords(a), m.coords(b),
                          m.coords(k.center), k.radius, ccw_in_loop)
            )
        else:
            raise TargetUnsolvable("loop references a non-curve entity")
    return pieces


def area_region(m: Manifold, loop: BoundaryLoop) -> ExactScalar:
    """Exact area of a verified boundary loop (see area_pieces)."""
    return area_pieces(loop_to_pieces(m, loop))


def area_entity(m: Manifold, subject: str) -> ExactScalar:
    ent = m.entities[subject]
    k = ent.kind
    if isinstance(k, PolygonRef):
        return area_polygon([m.coords(p) for p in k.points])
    if isinstance(k, Circle):
        return k.radius * k.radius * ExactScalar.pi_multiple(1)
    if isinstance(k, ShadedBlock):
        return area_region(m, k.loop)
    raise TargetUnsolvable(f"area of {ent.kind_name} is undefined")


def ratio(a: ExactScalar, b: ExactScalar) -> RatioAnswer:
    """Exact quotient with a coprime-integer presentation.

    Irrational quotients have no p:q presentation and are rejected; the
    caller treats that as an unsolvable target.
    """
    q = div(a, b)
    f = q.as_fraction()
    if f is None:
        raise TargetUnsolvable("ratio is irrational; no p:q presentation")
    return RatioAnswer(q, f.numerator, f.denominator)


# -- target sampling -----------------------------------------------------------


def _length_subjects(m: Manifold) -> list[QueryTarget]:
    out = []
    for e in m.nonpoint_entities():
        if isinstance(e.kind, Segment):
            out.append(QueryTarget("Length", (e.kind.a, e.kind.b), e.level))
    return out


def _angle_subjects(m: Manifold) -> list[QueryTarget]:
    by_point: dict[str, list[Entity]] = {}
    for e in m.nonpoint_entities():
        if isinstance(e.kind, Segment):
            by_point.setdefault(e.kind.a, []).append(e)
            by_point.setdefault(e.kind.b, []).append(e)
    out = []
    for vertex in sorted(by_point, key=lambda s: int(s[1:])):
        segs = by_point[vertex]
        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                sa, sb = segs[i], segs[j]
                a = sa.kind.b if sa.kind.a == vertex else sa.kind.a
                b = sb.kind.b if sb.kind.a == vertex else sb.kind.a
                if a == b:
                    continue
                lvl = max(sa.level, sb.level)
                out.append(QueryTarget("Angle", (vertex, a, b), lvl))
    return out


def _polygon_subjects(m: Manifold, kind: str) -> list[QueryTarget]:
    out = []
    for e in m.nonpoint_entities():
        if isinstance(e.kind, (PolygonRef, Circle)):
            out.append(QueryTarget(kind, (e.id,), e.level))
    return out


def _shadow_subjects(m: Manifold) -> list[Entity]:
    return [e for e in m.nonpoint_entities() if isinstance(e.kind, ShadedBlock)]


def solvable_targets(m: Manifold, kind: str) -> list[QueryTarget]:
    if kind == "Length":
        return _length_subjects(m)
    if kind == "Angle":
        return _angle_subjects(m)
    if kind == "Perimeter":
        return _polygon_subjects(m, "Perimeter")
    if kind == "Entity Area":
        return _polygon_subjects(m, "Entity Area")
    if kind == "Shadow Area":
        return [QueryTarget(kind, (e.id,), e.level) for e in _shadow_subjects(m)]
    if kind == "Shadow Ratio":
        blocks = _shadow_subjects(m)
        out = []
        for i in range(len(blocks)):
            for j in range(len(blocks)):
                if i != j:
                    out.append(QueryTarget(
                        kind, (blocks[i].id, blocks[j].id),
                        max(blocks[i].level, blocks[j].level),
                    ))
        return out
    if kind == "Shadow Entity Ratio":
        blocks = _shadow_subjects(m)
        entities = [e for e in m.nonpoint_entities()
                    if isinstance(e.kind, (PolygonRef, Circle))]
        return [
            QueryTarget(kind, (b.id, e.id), max(b.level, e.level))
            for b in blocks for e in entities
        ]
    if kind == "Overall Shadow Area":
        blocks = _shadow_subjects(m)
        if not blocks:
            return []
        return [QueryTarget(kind, tuple(b.id for b in blocks),
                            max(b.level for b in blocks))]
    raise ValueError(f"unknown question kind {kind}")


def tail_biased_sample(m: Manifold, rng: random.Random, cfg: TierConfig) -> QueryTarget:
    """Draw a question kind by configured weights, then a subject with
    probability proportional to (1 + level)**bias among compatible subjects."""
    weights = dict(cfg.question_weights)
    available: dict[str, list[QueryTarget]] = {}
    for kind, w in sorted(weights.items()):
        if w <= 0:
            continue
        subjects = solvable_targets(m, kind)
        if subjects:
            available[kind] = subjects
    if not available:
        raise NoSolvableTarget("manifold offers no queryable subject")
    total = sum(float(weights[k]) for k in available)
    r = rng.random() * total
    acc = 0.0
    chosen_kind = next(iter(available))
    for k in available:
        acc += float(weights[k])
        if r <= acc:
            chosen_kind = k
            break
    subjects = available[chosen_kind]
    bias = cfg.tail_bias_exponent
    sw = [(1 + t.level) ** bias for t in subjects]
    total_w = sum(sw)
    r2 = rng.random() * total_w
    acc2 = 0.0
    for t, w in zip(subjects, sw):
        acc2 += w
        if r2 <= acc2:
            return t
    return subjects[-1]


@dataclass(frozen=True)
class Solution:
    target: QueryTarget
    value: ExactScalar  # the scalar ground truth (quotient for ratios)
    answer_expr: str
    answer_latex: str
    ratio: Optional[RatioAnswer] = None
    angle_degrees: Optional[Fraction] = None


def solve(m: Manifold, target: QueryTarget) -> Solution:
    """Compute the exact ground truth for a sampled target."""
    kind = target.kind
    if kind == "Length":
        v = length(m, target.subjects[0], target.subjects[1])
        return Solution(target, v, v.to_canonical_string(), v.to_latex())
    if kind == "Angle":
        ang = angle(m, *target.subjects)
        deg = ang.degrees()
        v = ExactScalar.from_fraction(deg)
        return Solution(target, v, v.to_canonical_string(), v.to_latex(),
                        angle_degrees=deg)
    if kind == "Perimeter":
        v = perimeter(m, target.subjects[0])
        return Solution(target, v, v.to_canonical_string(), v.to_latex())
    if kind in ("Entity Area", "Shadow Area"):
        v = area_entity(m, target.subjects[0])
        return Solution(target, v, v.to_canonical_string(), v.to_latex())
    if kind in ("Shadow Ratio", "Shadow Entity Ratio"):
        a = area_entity(m, target.subjects[0])
        b = area_entity(m, target.subjects[1])
        r = ratio(a, b)
        return Solution(target, r.quotient, r.quotient.to_canonical_string(),
                        r.presentation, ratio=r)
    if kind == "Overall Shadow Area":
        total = ExactScalar.zero()
        for sid in target.subjects:
            total = total + area_entity(m, sid)
        return Solution(target, total, total.to_canonical_string(), total.to_latex())
    raise ValueError(f"unknown question kind {kind}")


__all__ = [
    "QUESTION_KINDS",
    "QueryTarget",
    "RatioAnswer",
    "Solution",
    "LoopPiece",
    "length",
    "angle",
    "perimeter",
    "area_polygon",
    "area_segment",
    "area_region",
    "area_pieces",
    "area_entity",
    "arc_sweep_angle",
    "loop_to_pieces",
    "ratio",
    "solvable_targets",
    "tail_biased_sample",
    "solve",
]
