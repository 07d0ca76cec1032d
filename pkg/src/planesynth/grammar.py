"""Type-conditional construction grammar and the recursive evolution loop.

Base primitives seed the manifold at level 0; evolutionary operators grow
it conditioned on the parent entity's type; builder augmentations add the
human-style auxiliary constructions (midpoints, perpendiculars, diameters).
Every mutation runs as a recorded trajectory step, so generation and replay
share one code path.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .config import TierConfig
from .errors import (
    DegenerateResult,
    GenerationFailed,
    LimitExceeded,
    NoPermittedOperator,
)
from .exactnum import ExactAngle, ExactScalar, sin_cos
from .exactnum.errors import KernelError
from .geom import Vec, reflect_across_line, rotate
from .manifold import (
    Arc,
    Circle,
    Entity,
    Manifold,
    PolygonRef,
    Segment,
    register_executor,
)

# Evolutionary operators (category 2) and builder augmentations (category 3).
CATEGORY2 = (
    "concentric_scaling",
    "translation",
    "rotation",
    "reflection",
    "circumscription",
    "inscription",
    "edge_extension",
    "sector_derivation",
)
CATEGORY3 = (
    "connect_vertices",
    "connect_midpoints",
    "draw_perpendicular",
    "draw_parallel",
    "draw_diameter",
)

# Parent type -> weighted operator rows.  Circle keeps its favored pairing
# (concentric scaling at double weight); everything else is uniform.
GrammarTable = dict[str, list[tuple[str, Optional[str], Fraction]]]

DEFAULT_GRAMMAR: GrammarTable = {
    "circle": [
        ("concentric_scaling", None, Fraction(2)),
        ("inscription", "polygon_in_circle", Fraction(1)),
        ("sector_derivation", None, Fraction(1)),
    ],
    "triangle": [
        ("circumscription", None, Fraction(1)),
        ("draw_perpendicular", "altitude", Fraction(1)),
        ("connect_midpoints", "median", Fraction(1)),
    ],
    "quadrilateral": [
        ("translation", "edge_full", Fraction(1)),
        ("translation", "edge_half", Fraction(1)),
        ("edge_extension", None, Fraction(1)),
    ],
    "regular_polygon": [
        ("connect_vertices", "diagonal", Fraction(1)),
        ("connect_vertices", "radial", Fraction(1)),
        ("inscription", "incircle", Fraction(1)),
    ],
}

SCALING_FACTORS = (
    Fraction(1, 2), Fraction(1, 3), Fraction(2, 3),
    Fraction(1, 4), Fraction(3, 4), Fraction(2),
)
TRANSLATION_MULTIPLIERS = (Fraction(1, 2), Fraction(1), Fraction(2))
ROTATION_ANGLES = (
    Fraction(1, 6), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2),
    Fraction(-1, 6), Fraction(-1, 4), Fraction(-1, 3), Fraction(2, 3),
)
# Exact dimension pool: small integers, halves, and simple radicals.
_DIM_POOL: tuple = tuple(range(1, 9)) + (
    Fraction(1, 2), Fraction(3, 2), Fraction(5, 2), Fraction(7, 2),
    "sqrt2", "sqrt3", "sqrt5",
)
INSCRIBED_NGON_CHOICES = (3, 4, 5, 6, 8, 12)


def _dim_to_scalar(d) -> ExactScalar:
    if d == "sqrt2":
        return ExactScalar.sqrt_int(2)
    if d == "sqrt3":
        return ExactScalar.sqrt_int(3)
    if d == "sqrt5":
        return ExactScalar.sqrt_int(5)
    return ExactScalar.from_fraction(Fraction(d))


def _dim_token(rng: random.Random) -> str:
    d = _DIM_POOL[rng.randrange(len(_DIM_POOL))]
    return d if isinstance(d, str) else str(Fraction(d))


def _scalar_from_token(tok: str) -> ExactScalar:
    return _dim_to_scalar(tok) if tok.startswith("sqrt") else ExactScalar.from_fraction(Fraction(tok))


def entity_grammar_class(ent: Entity) -> Optional[str]:
    k = ent.kind
    if isinstance(k, Circle):
        return "circle"
    if isinstance(k, PolygonRef):
        if len(k.points) == 3:
            return "triangle"
        if k.variant.startswith("regular-"):
            return "regular_polygon"
        return "quadrilateral"
    return None


def polygon_display_name(m: Manifold, ent: Entity) -> str:
    k = ent.kind
    labels = "".join(m.label_of(p) for p in k.points)
    names = {
        "triangle-equilateral": "equilateral triangle",
        "triangle-right": "right triangle",
        "triangle-isosceles": "isosceles triangle",
        "quad-rectangle": "rectangle",
        "quad-parallelogram": "parallelogram",
        "quad-trapezoid": "trapezoid",
    }
    if k.variant in names:
        return f"{names[k.variant]} {labels}"
    if k.variant.startswith("regular-"):
        n = k.variant.split("-")[1]
        return f"regular {n}-gon {labels}"
    return f"polygon {labels}"


# ---------------------------------------------------------------------------
# Step executors.  Each takes (manifold, parents, params) and returns
# (produced ids, description); they are pure functions of their arguments.
# ---------------------------------------------------------------------------


def _angle_dir(theta: ExactAngle) -> Vec:
    sin_t, cos_t = sin_cos(theta)
    return Vec(cos_t, sin_t)


def _polygon_from_vertices(
    m: Manifold,
    verts: list[Vec],
    variant: str,
    parents: tuple[str, ...],
    produced: list[str],
    center_label_family: Optional[str] = None,
) -> Entity:
    pids = []
    for v in verts:
        atom, created = m.add_point(v, parents=parents)
        pids.append(atom.id)
        if created:
            produced.append(atom.id)
    seg_ids = []
    for i, a in enumerate(pids):
        b = pids[(i + 1) % len(pids)]
        seg = m.add_segment(a, b, parents=parents)
        if seg.id not in produced:
            produced.append(seg.id)
        seg_ids.append(seg.id)
    poly = m.add_polygon(pids, variant, parents=parents)
    produced.append(poly.id)
    return poly


@register_executor("base_primitive")
def _exec_base(m: Manifold, parents, params):
    variant = params["variant"]
    produced: list[str] = []
    if variant == "circle":
        r = _scalar_from_token(params["radius"])
        center, _ = m.add_point(Vec.of(0, 0), family="O")
        produced.append(center.id)
        circ = m.add_circle(center.id, r, level=0)
        produced.append(circ.id)
        desc = (
            f"A circle with center {center.label} and radius "
            f"{r.to_canonical_string()} is drawn as the base shape."
        )
        return produced, desc
    if variant == "regular":
        n = params["n"]
        r = _scalar_from_token(params["circumradius"])
        start = ExactAngle(Fraction(1, 2))
        center, _ = m.add_point(Vec.of(0, 0), family="O")
        produced.append(center.id)
        verts = []
        for k in range(n):
            theta = start + ExactAngle(Fraction(2 * k, n))
            verts.append(_angle_dir(theta).scale(r))
        poly = _polygon_from_vertices(m, verts, f"regular-{n}", (), produced)
        labels = "".join(m.label_of(p) for p in poly.kind.points)
        desc = (
            f"A regular {n}-gon {labels} with center {center.label} and "
            f"circumradius {r.to_canonical_string()} is drawn as the base shape."
        )
        return produced, desc
    if variant == "triangle":
        sub = params["subvariant"]
        a = _scalar_from_token(params["a"])
        b = _scalar_from_token(params["b"])
        if sub == "equilateral":
            half = ExactScalar.rational(1, 2)
            verts = [
                Vec.of(0, 0),
                Vec(a, ExactScalar.zero()),
                Vec(a * half, a * ExactScalar.sqrt_int(3) * half),
            ]
        elif sub == "right":
            verts = [Vec.of(0, 0), Vec(a, ExactScalar.zero()), Vec(ExactScalar.zero(), b)]
        else:  # isosceles: base a, height b
            half = ExactScalar.rational(1, 2)
            verts = [Vec.of(0, 0), Vec(a, ExactScalar.zero()), Vec(a * half, b)]
        poly = _polygon_from_vertices(m, verts, f"triangle-{sub}", (), produced)
        labels = "".join(m.label_of(p) for p in poly.kind.points)
        dims = f"side length {a.to_canonical_string()}" if sub == "equilateral" else (
            f"legs {a.to_canonical_string()} and {b.to_canonical_string()}" if sub == "right"
            else f"base {a.to_canonical_string()} and height {b.to_canonical_string()}"
        )
        desc = f"An {sub} triangle {labels} with {dims} is drawn as the base shape." \
            if sub in ("equilateral", "isosceles") else \
            f"A right triangle {labels} with {dims} is drawn as the base shape."
        return produced, desc
    if variant == "quadrilateral":
        sub = params["subvariant"]
        a = _scalar_from_token(params["a"])
        b = _scalar_from_token(params["b"])
        zero = ExactScalar.zero()
        half = ExactScalar.rational(1, 2)
        if sub == "rectangle":
            verts = [Vec.of(0, 0), Vec(a, zero), Vec(a, b), Vec(zero, b)]
            dims = f"width {a.to_canonical_string()} and height {b.to_canonical_string()}"
        elif sub == "parallelogram":
            q = Fraction(params["angle_q"])
            sin_t, cos_t = sin_cos(ExactAngle(q))
            side = Vec(b * cos_t, b * sin_t)
            verts = [Vec.of(0, 0), Vec(a, zero), Vec(a, zero) + side, side]
            dims = (
                f"base {a.to_canonical_string()}, side {b.to_canonical_string()}, "
                f"and internal angle {ExactAngle(q).degrees()} degrees"
            )
        else:  # isosceles trapezoid: bases a > b, height h = params["h"]
            h = _scalar_from_token(params["h"])
            verts = [
                Vec(-a * half, zero), Vec(a * half, zero),
                Vec(b * half, h), Vec(-b * half, h),
            ]
            dims = (
                f"bases {a.to_canonical_string()} and {b.to_canonical_string()} "
                f"and height {h.to_canonical_string()}"
            )
        poly = _polygon_from_vertices(m, verts, f"quad-{sub}", (), produced)
        labels = "".join(m.label_of(p) for p in poly.kind.points)
        kindname = {"rectangle": "rectangle", "parallelogram": "parallelogram",
                    "trapezoid": "isosceles trapezoid"}[sub]
        desc = f"A {kindname} {labels} with {dims} is drawn as the base shape."
        return produced, desc
    raise DegenerateResult(f"unknown base variant {variant}")


def _parent_entity(m: Manifold, parents) -> Entity:
    return m.entities[parents[0]]


def _polygon_center(m: Manifold, ent: Entity) -> Vec:
    pts = [m.coords(p) for p in ent.kind.points]
    n = len(pts)
    sx = ExactScalar.zero()
    sy = ExactScalar.zero()
    for p in pts:
        sx = sx + p.x
        sy = sy + p.y
    inv = ExactScalar.rational(1, n)
    return Vec(sx * inv, sy * inv)


@register_executor("concentric_scaling")
def _exec_scaling(m: Manifold, parents, params):
    ent = _parent_entity(m, parents)
    k = Fraction(params["factor"])
    if k == 1 or k <= 0:
        raise DegenerateResult("identity or nonpositive scaling")
    ks = ExactScalar.from_fraction(k)
    produced: list[str] = []
    if isinstance(ent.kind, Circle):
        r2 = ent.kind.radius * ks
        circ = m.add_circle(ent.kind.center, r2, parents=[ent.id])
        produced.append(circ.id)
        m.intersect_with_all([circ.id])
        desc = (
            f"A concentric circle of radius {r2.to_canonical_string()} is drawn "
            f"by scaling the circle about {m.label_of(ent.kind.center)} with "
            f"factor {k}."
        )
        return produced, desc
    if isinstance(ent.kind, PolygonRef):
        center = _polygon_center(m, ent)
        catom, created = m.add_point(center, parents=[ent.id], family="O")
        if created:
            produced.append(catom.id)
        verts = [
            Vec(center.x + (m.coords(p).x - center.x) * ks,
                center.y + (m.coords(p).y - center.y) * ks)
            for p in ent.kind.points
        ]
        poly = _polygon_from_vertices(m, verts, ent.kind.variant, (ent.id,), produced)
        new_segs = [i for i in produced if i.startswith("e")]
        m.intersect_with_all(new_segs)
        desc = (
            f"A concentric scaled copy {polygon_display_name(m, poly)} is drawn by "
            f"scaling {polygon_display_name(m, ent)} about the common center "
            f"{catom.label} with factor {k}."
        )
        return produced, desc
    raise DegenerateResult("scaling needs a circle or polygon parent")


@register_executor("translation")
def _exec_translation(m: Manifold, parents, params):
    # parents: (entity, edge point a, edge point b)
    ent = m.entities[parents[0]]
    pa, pb = parents[1], parents[2]
    mult = Fraction(params["multiplier"])
    if mult == 0:
        raise DegenerateResult("zero translation")
    vec = (m.coords(pb) - m.coords(pa)).scale(mult)
    produced: list[str] = []
    if isinstance(ent.kind, Circle):
        c_old = m.coords(ent.kind.center)
        catom, created = m.add_point(c_old + vec, parents=[ent.id], family="O")
        if created:
            produced.append(catom.id)
        circ = m.add_circle(catom.id, ent.kind.radius, parents=[ent.id])
        produced.append(circ.id)
        m.intersect_with_all([circ.id])
        what = "circle"
        new_name = f"circle centered at {catom.label}"
    elif isinstance(ent.kind, PolygonRef):
        verts = [m.coords(p) + vec for p in ent.kind.points]
        poly = _polygon_from_vertices(m, verts, ent.kind.variant, (ent.id,), produced)
        m.intersect_with_all([i for i in produced if i.startswith("e")])
        what = polygon_display_name(m, ent)
        new_name = polygon_display_name(m, poly)
    else:
        raise DegenerateResult("translation needs a circle or polygon parent")
    try:
        dist = vec.norm().to_canonical_string()
        dist_txt = f" (distance {dist})"
    except KernelError:
        dist_txt = ""
    desc = (
        f"The {what} is translated along {m.label_of(pa)}{m.label_of(pb)} by "
        f"{mult} of its length{dist_txt}, producing {new_name}."
    )
    return produced, desc


@register_executor("rotation")
def _exec_rotation(m: Manifold, parents, params):
    ent = m.entities[parents[0]]
    center_pid = parents[1]
    theta = params["angle"]
    if theta.q % 2 == 0:
        raise DegenerateResult("full-turn rotation")
    sin_t, cos_t = sin_cos(theta)
    c = m.coords(center_pid)
    produced: list[str] = []
    if not isinstance(ent.kind, PolygonRef):
        raise DegenerateResult("rotation implemented for polygon parents")
    verts = [c + rotate(m.coords(p) - c, sin_t, cos_t) for p in ent.kind.points]
    poly = _polygon_from_vertices(m, verts, ent.kind.variant, (ent.id, center_pid), produced)
    m.intersect_with_all([i for i in produced if i.startswith("e")])
    desc = (
        f"The {polygon_display_name(m, ent)} is rotated about {m.label_of(center_pid)} "
        f"by {theta.degrees()} degrees, producing {polygon_display_name(m, poly)}."
    )
    return produced, desc


@register_executor("reflection")
def _exec_reflection(m: Manifold, parents, params):
    ent = m.entities[parents[0]]
    axis = m.entities[parents[1]]
    if not isinstance(axis.kind, Segment):
        raise DegenerateResult("reflection axis must be a segment")
    if not isinstance(ent.kind, PolygonRef):
        raise DegenerateResult("reflection implemented for polygon parents")
    a = m.coords(axis.kind.a)
    b = m.coords(axis.kind.b)
    produced: list[str] = []
    verts = [reflect_across_line(m.coords(p), a, b) for p in ent.kind.points]
    if all(m.find_point_at(v) is not None for v in verts):
        raise DegenerateResult("reflection maps the polygon onto existing points")
    poly = _polygon_from_vertices(m, verts, ent.kind.variant, (ent.id, axis.id), produced)
    m.intersect_with_all([i for i in produced if i.startswith("e")])
    desc = (
        f"The {polygon_display_name(m, ent)} is reflected across line "
        f"{m.label_of(axis.kind.a)}{m.label_of(axis.kind.b)}, producing "
        f"{polygon_display_name(m, poly)}."
    )
    return produced, desc


@register_executor("circumscription")
def _exec_circumscription(m: Manifold, parents, params):
    ent = _parent_entity(m, parents)
    if not isinstance(ent.kind, PolygonRef):
        raise DegenerateResult("circumscription needs a polygon parent")
    pts = [m.coords(p) for p in ent.kind.points]
    v0, v1, v2 = pts[0], pts[1], pts[2]
    # Solve 2(v1-v0).X = |v1|^2-|v0|^2 ; 2(v2-v1).X = |v2|^2-|v1|^2 exactly.
    two = ExactScalar.rational(2)
    a1 = (v1 - v0).scale(two)
    a2 = (v2 - v1).scale(two)
    b1 = v1.norm_sq() - v0.norm_sq()
    b2 = v2.norm_sq() - v1.norm_sq()
    det = a1.x * a2.y - a1.y * a2.x
    from .exactnum import div, is_zero, sqrt

    if is_zero(det).is_zero:
        raise DegenerateResult("collinear vertices have no circumcircle")
    cx = div(b1 * a2.y - b2 * a1.y, det)
    cy = div(a1.x * b2 - a2.x * b1, det)
    center = Vec(cx, cy)
    r2 = (v0 - center).norm_sq()
    for p in pts[3:]:
        if not is_zero((p - center).norm_sq() - r2).is_zero:
            raise DegenerateResult("vertices are not concyclic")
    radius = sqrt(r2)
    produced: list[str] = []
    catom, created = m.add_point(center, parents=[ent.id], family="O")
    if created:
        produced.append(catom.id)
    circ = m.add_circle(catom.id, radius, parents=[ent.id])
    produced.append(circ.id)
    m.intersect_with_all([circ.id])
    desc = (
        f"The circumscribed circle of {polygon_display_name(m, ent)} is drawn, "
        f"centered at {catom.label} with radius {radius.to_canonical_string()}."
    )
    return produced, desc


@register_executor("inscription")
def _exec_inscription(m: Manifold, parents, params):
    ent = _parent_entity(m, parents)
    mode = params["mode"]
    produced: list[str] = []
    if mode == "polygon_in_circle":
        if not isinstance(ent.kind, Circle):
            raise DegenerateResult("polygon inscription needs a circle parent")
        n = params["n"]
        start = ExactAngle(Fraction(params["start_q"]))
        c = m.coords(ent.kind.center)
        r = ent.kind.radius
        verts = []
        for k in range(n):
            theta = start + ExactAngle(Fraction(2 * k, n))
            verts.append(c + _angle_dir(theta).scale(r))
        variant = "triangle-equilateral" if n == 3 else f"regular-{n}"
        poly = _polygon_from_vertices(m, verts, variant, (ent.id,), produced)
        m.intersect_with_all([i for i in produced if i.startswith("e")])
        shape = "equilateral triangle" if n == 3 else f"regular {n}-gon"
        labels = "".join(m.label_of(p) for p in poly.kind.points)
        desc = (
            f"An {shape} {labels} is inscribed in the circle centered at "
            f"{m.label_of(ent.kind.center)} with its vertices on the circumference."
            if n == 3 else
            f"A {shape} {labels} is inscribed in the circle centered at "
            f"{m.label_of(ent.kind.center)} with its vertices on the circumference."
        )
        return produced, desc
    if mode == "incircle":
        if not isinstance(ent.kind, PolygonRef) or not ent.kind.variant.startswith("regular-"):
            raise DegenerateResult("incircle implemented for regular polygon parents")
        n = len(ent.kind.points)
        center = _polygon_center(m, ent)
        v0 = m.coords(ent.kind.points[0])
        v1 = m.coords(ent.kind.points[1])
        foot = v0.midpoint(v1)
        apothem_sq = (foot - center).norm_sq()
        from .exactnum import sqrt

        radius = sqrt(apothem_sq)
        catom, created = m.add_point(center, parents=[ent.id], family="O")
        if created:
            produced.append(catom.id)
        circ = m.add_circle(catom.id, radius, parents=[ent.id])
        produced.append(circ.id)
        m.intersect_with_all([circ.id])
        desc = (
            f"The inscribed circle of {polygon_display_name(m, ent)} is drawn, "
            f"centered at {catom.label} with radius {radius.to_canonical_string()}."
        )
        return produced, desc
    raise DegenerateResult(f"unknown inscription mode {mode}")


@register_executor("edge_extension")
def _exec_edge_extension(m: Manifold, parents, params):
    # parents: (polygon, edge point a, edge point b); extend beyond b.
    ent = m.entities[parents[0]]
    pa, pb = parents[1], parents[2]
    k = Fraction(params["factor"])
    if k <= 0:
        raise DegenerateResult("extension factor must be positive")
    a = m.coords(pa)
    b = m.coords(pb)
    tip = b + (b - a).scale(k)
    produced: list[str] = []
    atom, created = m.add_point(tip, parents=[ent.id])
    if created:
        produced.append(atom.id)
    seg = m.add_segment(pb, atom.id, parents=[ent.id])
    produced.append(seg.id)
    m.intersect_with_all([seg.id])
    desc = (
        f"Edge {m.label_of(pa)}{m.label_of(pb)} of {polygon_display_name(m, ent)} "
        f"is extended beyond {m.label_of(pb)} by {k} of its length to point "
        f"{atom.label}."
    )
    return produced, desc


@register_executor("sector_derivation")
def _exec_sector(m: Manifold, parents, params):
    ent = _parent_entity(m, parents)
    if not isinstance(ent.kind, Circle):
        raise DegenerateResult("sector derivation needs a circle parent")
    start = params["start"]
    sweep = params["sweep"]
    if sweep.q <= 0 or sweep.q >= 2:
        raise DegenerateResult("sector sweep must be in (0, 2pi)")
    c = m.coords(ent.kind.center)
    r = ent.kind.radius
    p1 = c + _angle_dir(start).scale(r)
    p2 = c + _angle_dir(start + sweep).scale(r)
    produced: list[str] = []
    a1, created1 = m.add_point(p1, parents=[ent.id])
    if created1:
        produced.append(a1.id)
    a2, created2 = m.add_point(p2, parents=[ent.id])
    if created2:
        produced.append(a2.id)
    s1 = m.add_segment(ent.kind.center, a1.id, parents=[ent.id])
    produced.append(s1.id)
    s2 = m.add_segment(ent.kind.center, a2.id, parents=[ent.id])
    produced.append(s2.id)
    m.intersect_with_all([s1.id, s2.id])
    desc = (
        f"A sector of the circle centered at {m.label_of(ent.kind.center)} is "
        f"marked by radii to {a1.label} and {a2.label} spanning "
        f"{sweep.degrees()} degrees."
    )
    return produced, desc


@register_executor("connect_points")
def _exec_connect_points(m: Manifold, parents, params):
    pa, pb = parents[0], parents[1]
    if m.find_segment(pa, pb) is not None:
        raise DegenerateResult("points already connected")
    seg = m.add_segment(pa, pb, parents=[pa, pb])
    produced = [seg.id]
    m.intersect_with_all([seg.id])
    desc = f"Points {m.label_of(pa)} and {m.label_of(pb)} are connected."
    return produced, desc


@register_executor("connect_midpoints")
def _exec_connect_midpoints(m: Manifold, parents, params):
    # parents: one or two segment ids; midpoints are created, and when two
    # segments are given their midpoints are joined.
    produced: list[str] = []
    mids = []
    for sid in parents:
        seg = m.entities[sid]
        if not isinstance(seg.kind, Segment):
            raise DegenerateResult("midpoint needs a segment")
        mid = m.coords(seg.kind.a).midpoint(m.coords(seg.kind.b))
        atom, created = m.add_point(mid, parents=[sid], family="M")
        if created:
            produced.append(atom.id)
        mids.append(atom)
    if len(mids) == 2:
        if mids[0].id == mids[1].id:
            raise DegenerateResult("midpoints coincide")
        seg = m.add_segment(mids[0].id, mids[1].id, parents=list(parents))
        produced.append(seg.id)
        m.intersect_with_all([seg.id])
        desc = (
            f"Midpoints {mids[0].label} and {mids[1].label} of the selected "
            f"segments are marked and connected."
        )
    else:
        seg_ent = m.entities[parents[0]].kind
        desc = (
            f"Point {mids[0].label} is marked at the midpoint of "
            f"{m.label_of(seg_ent.a)}{m.label_of(seg_ent.b)}."
        )
    return produced, desc


@register_executor("draw_perpendicular")
def _exec_perpendicular(m: Manifold, parents, params):
    # parents: (from point, baseline segment)
    pid, sid = parents[0], parents[1]
    seg = m.entities[sid]
    if not isinstance(seg.kind, Segment):
        raise DegenerateResult("baseline must be a segment")
    p = m.coords(pid)
    a = m.coords(seg.kind.a)
    b = m.coords(seg.kind.b)
    from .exactnum import div, is_zero

    d = b - a
    t = div(d.dot(p - a), d.norm_sq())
    if t.sign() < 0 or (ExactScalar.one() - t).sign() < 0:
        raise DegenerateResult("perpendicular foot falls outside the baseline")
    foot = a + d.scale(t)
    if foot.same_point(p):
        raise DegenerateResult("point lies on the baseline")
    produced: list[str] = []
    fatom, created = m.add_point(foot, parents=[pid, sid], family="F")
    if created:
        produced.append(fatom.id)
    seg2 = m.add_segment(pid, fatom.id, parents=[pid, sid])
    produced.append(seg2.id)
    m.intersect_with_all([seg2.id])
    desc = (
        f"A perpendicular is dropped from {m.label_of(pid)} to "
        f"{m.label_of(seg.kind.a)}{m.label_of(seg.kind.b)}, meeting it at "
        f"{fatom.label}."
    )
    return produced, desc


@register_executor("draw_parallel")
def _exec_parallel(m: Manifold, parents, params):
    # parents: (through point, baseline segment)
    pid, sid = parents[0], parents[1]
    seg = m.entities[sid]
    if not isinstance(seg.kind, Segment):
        raise DegenerateResult("baseline must be a segment")
    p = m.coords(pid)
    a = m.coords(seg.kind.a)
    b = m.coords(seg.kind.b)
    from .exactnum import is_zero

    if is_zero((b - a).cross(p - a)).is_zero:
        raise DegenerateResult("point lies on the baseline")
    q = p + (b - a)
    produced: list[str] = []
    qatom, created = m.add_point(q, parents=[pid, sid])
    if created:
        produced.append(qatom.id)
    seg2 = m.add_segment(pid, qatom.id, parents=[pid, sid])
    produced.append(seg2.id)
    m.intersect_with_all([seg2.id])
    desc = (
        f"A segment parallel to {m.label_of(seg.kind.a)}{m.label_of(seg.kind.b)} "
        f"is drawn through {m.label_of(pid)} to {qatom.label}."
    )
    return produced, desc


@register_executor("draw_diameter")
def _exec_diameter(m: Manifold, parents, params):
    # parents: (circle, boundary point)
    cid, pid = parents[0], parents[1]
    circ = m.entities[cid]
    if not isinstance(circ.kind, Circle):
        raise DegenerateResult("diameter needs a circle parent")
    if not m.point_on_entity(pid, circ):
        raise DegenerateResult("point is not on the circle")
    c = m.coords(circ.kind.center)
    p = m.coords(pid)
    opposite = c + (c - p)
    produced: list[str] = []
    oatom, created = m.add_point(opposite, parents=[cid, pid])
    if created:
        produced.append(oatom.id)
    seg = m.add_segment(pid, oatom.id, parents=[cid, pid])
    produced.append(seg.id)
    m.intersect_with_all([seg.id])
    desc = (
        f"A diameter of the circle centered at {m.label_of(circ.kind.center)} is "
        f"drawn from {m.label_of(pid)} through the center to {oatom.label}."
    )
    return produced, desc


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_base(rng: random.Random, cfg: TierConfig, m: Optional[Manifold] = None) -> Manifold:
    """Seed a manifold with one level-0 primitive."""
    if m is None:
        m = Manifold(0, cfg.max_points, cfg.max_lines)
    variant = rng.choice(["circle", "regular", "triangle", "quadrilateral"])
    params: dict = {"variant": variant}
    if variant == "circle":
        params["radius"] = _dim_token(rng)
    elif variant == "regular":
        params["n"] = rng.choice([3, 4, 5, 6, 8, 12])
        params["circumradius"] = _dim_token(rng)
    elif variant == "triangle":
        params["subvariant"] = rng.choice(["equilateral", "right", "isosceles"])
        params["a"] = _dim_token(rng)
        params["b"] = _dim_token(rng)
    else:
        sub = rng.choice(["rectangle", "parallelogram", "trapezoid"])
        params["subvariant"] = sub
        if sub == "trapezoid":
            big = rng.choice([3, 4, 5, 6])
            params["a"] = str(big)
            params["b"] = str(big - rng.choice([1, 2]))
            params["h"] = _dim_token(rng)
        elif sub == "parallelogram":
            params["a"] = _dim_token(rng)
            params["b"] = str(rng.choice([2, 3, 4]))
            params["angle_q"] = str(rng.choice([Fraction(1, 6), Fraction(1, 4), Fraction(1, 3)]))
        else:
            params["a"] = _dim_token(rng)
            params["b"] = _dim_token(rng)
    m.run_step("base_primitive", (), params)
    return m


def sample_operator(rng: random.Random, table: GrammarTable, parent: Entity) -> tuple[str, Optional[str]]:
    cls = entity_grammar_class(parent)
    if cls is None or cls not in table:
        raise NoPermittedOperator(f"no grammar row for {parent.kind_name}")
    rows = table[cls]
    total = sum(float(w) for _, _, w in rows)
    r = rng.random() * total
    acc = 0.0
    for op, mode, w in rows:
        acc += float(w)
        if r <= acc:
            return op, mode
    return rows[-1][0], rows[-1][1]


def _polygon_edges(ent: Entity) -> list[tuple[str, str]]:
    pts = ent.kind.points
    return [(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts))]


def _build_op_invocation(
    rng: random.Random, m: Manifold, op: str, mode: Optional[str], parent: Entity
) -> tuple[str, tuple[str, ...], dict]:
    """Draw exact parameters for an operator application."""
    if op == "concentric_scaling":
        return op, (parent.id,), {"factor": str(rng.choice(SCALING_FACTORS))}
    if op == "translation":
        edges = _polygon_edges(parent) if isinstance(parent.kind, PolygonRef) else []
        if not edges:
            raise DegenerateResult("translation needs polygon edges")
        a, b = edges[rng.randrange(len(edges))]
        mult = Fraction(1) if mode == "edge_full" else rng.choice(TRANSLATION_MULTIPLIERS)
        return op, (parent.id, a, b), {"multiplier": str(mult)}
    if op == "rotation":
        if not isinstance(parent.kind, PolygonRef):
            raise DegenerateResult("rotation needs a polygon parent")
        center = rng.choice(sorted(parent.kind.points))
        q = rng.choice(ROTATION_ANGLES)
        return op, (parent.id, center), {"angle": ExactAngle(q)}
    if op == "reflection":
        segs = [e.id for e in m.drawable_entities() if isinstance(e.kind, Segment)]
        if not segs:
            raise DegenerateResult("no axis available")
        return op, (parent.id, rng.choice(segs)), {}
    if op == "circumscription":
        return op, (parent.id,), {}
    if op == "inscription":
        if mode == "polygon_in_circle":
            n = rng.choice(INSCRIBED_NGON_CHOICES)
            grid = Fraction(1, 10) if n in (5, 10) else Fraction(1, 12)
            k = rng.randrange(int(2 / grid))
            return op, (parent.id,), {"mode": mode, "n": n, "start_q": str(k * grid)}
        return op, (parent.id,), {"mode": "incircle"}
    if op == "edge_extension":
        edges = _polygon_edges(parent)
        a, b = edges[rng.randrange(len(edges))]
        k = rng.choice([Fraction(1, 2), Fraction(1)])
        return op, (parent.id, a, b), {"factor": str(k)}
    if op == "sector_derivation":
        grid = Fraction(1, 12)
        start = ExactAngle(grid * rng.randrange(24))
        sweep = ExactAngle(rng.choice([Fraction(1, 6), Fraction(1, 4), Fraction(1, 3),
                                       Fraction(1, 2), Fraction(2, 3)]))
        return op, (parent.id,), {"start": start, "sweep": sweep}
    if op == "connect_vertices":
        if mode == "radial":
            center = m.find_point_at(_polygon_center(m, parent))
            if center is None:
                raise DegenerateResult("polygon center not registered")
            vertex = rng.choice(sorted(parent.kind.points))
            return "connect_points", (center.id, vertex), {}
        pts = sorted(parent.kind.points)
        if len(pts) < 4:
            raise DegenerateResult("no diagonal available")
        a = rng.choice(pts)
        rest = [p for p in pts if p != a and m.find_segment(a, p) is None]
        if not rest:
            raise DegenerateResult("all diagonals present")
        return "connect_points", (a, rng.choice(rest)), {}
    if op == "connect_midpoints":
        if mode == "median" and isinstance(parent.kind, PolygonRef):
            pts = parent.kind.points
            i = rng.randrange(len(pts))
            vertex = pts[i]
            opposite = (pts[(i + 1) % 3], pts[(i + 2) % 3])
            seg = m.find_segment(*opposite)
            if seg is None:
                raise DegenerateResult("triangle side missing")
            return "median", (vertex, seg.id), {}
        segs = [e.id for e in m.drawable_entities() if isinstance(e.kind, Segment)]
        if not segs:
            raise DegenerateResult("no segments for midpoints")
        count = 2 if len(segs) >= 2 and rng.random() < 0.5 else 1
        chosen = rng.sample(segs, count) if count == 2 else [rng.choice(segs)]
        return "connect_midpoints", tuple(chosen), {}
    if op == "draw_perpendicular":
        if mode == "altitude" and isinstance(parent.kind, PolygonRef):
            pts = parent.kind.points
            i = rng.randrange(len(pts))
            vertex = pts[i]
            opposite = (pts[(i + 1) % len(pts)], pts[(i + 2) % len(pts)])
            seg = m.find_segment(*opposite)
            if seg is None:
                raise DegenerateResult("opposite side missing")
            return op, (vertex, seg.id), {}
        segs = [e.id for e in m.drawable_entities() if isinstance(e.kind, Segment)]
        pids = sorted(m.points, key=lambda s: int(s[1:]))
        if not segs or not pids:
            raise DegenerateResult("nothing to project")
        return op, (rng.choice(pids), rng.choice(segs)), {}
    if op == "draw_parallel":
        segs = [e.id for e in m.drawable_entities() if isinstance(e.kind, Segment)]
        pids = sorted(m.points, key=lambda s: int(s[1:]))
        if not segs or not pids:
            raise DegenerateResult("nothing to parallel")
        return op, (rng.choice(pids), rng.choice(segs)), {}
    if op == "draw_diameter":
        circles = [e for e in m.drawable_entities() if isinstance(e.kind, Circle)]
        if not circles:
            raise DegenerateResult("no circle for a diameter")
        circ = rng.choice(circles)
        on_circle = [
            pid for pid in sorted(m.points, key=lambda s: int(s[1:]))
            if pid != circ.kind.center and m.point_on_entity(pid, circ)
        ]
        if not on_circle:
            raise DegenerateResult("no boundary point on the circle")
        return op, (circ.id, rng.choice(on_circle)), {}
    raise NoPermittedOperator(op)


@register_executor("median")
def _exec_median(m: Manifold, parents, params):
    # parents: (vertex, opposite segment)
    vid, sid = parents[0], parents[1]
    seg = m.entities[sid]
    mid = m.coords(seg.kind.a).midpoint(m.coords(seg.kind.b))
    produced: list[str] = []
    matom, created = m.add_point(mid, parents=[sid], family="M")
    if created:
        produced.append(matom.id)
    seg2 = m.add_segment(vid, matom.id, parents=[vid, sid])
    produced.append(seg2.id)
    m.intersect_with_all([seg2.id])
    desc = (
        f"The median from {m.label_of(vid)} to {matom.label}, the midpoint of "
        f"{m.label_of(seg.kind.a)}{m.label_of(seg.kind.b)}, is drawn."
    )
    return produced, desc


def apply_operator(
    m: Manifold, op: str, mode: Optional[str], parent: Entity, rng: random.Random,
    phase: str = "evolve",
):
    """Apply one evolutionary operator; on degeneracy the manifold is
    left unchanged and the error propagates to the caller."""
    snap = m.snapshot()
    try:
        name, parents, params = _build_op_invocation(rng, m, op, mode, parent)
        params["phase"] = phase
        return m.run_step(name, parents, params)
    except Exception:
        m.restore(snap)
        raise


def _grammar_parents(m: Manifold) -> list[Entity]:
    return [
        e for e in m.nonpoint_entities()
        if entity_grammar_class(e) is not None
    ]


def evolve(rng: random.Random, cfg: TierConfig,
           table: GrammarTable = DEFAULT_GRAMMAR, seed: int = 0) -> Manifold:
    """Phase 1: sample a base primitive and grow it for a sampled number of
    derivation rounds; returns a frozen manifold."""
    lo, hi = cfg.derivation_rounds
    for _attempt in range(cfg.retry_budget):
        m = Manifold(seed, cfg.max_points, cfg.max_lines)
        try:
            sample_base(rng, cfg, m)
        except (DegenerateResult, LimitExceeded, KernelError):
            continue
        rounds = rng.randint(lo, hi)
        ok = True
        for _round in range(rounds):
            done = False
            for _try in range(cfg.retry_budget):
                parents = _grammar_parents(m)
                if not parents:
                    break
                parent = parents[rng.randrange(len(parents))]
                try:
                    op, mode = sample_operator(rng, table, parent)
                    apply_operator(m, op, mode, parent, rng)
                    done = True
                    break
                except (DegenerateResult, LimitExceeded, KernelError,
                        NoPermittedOperator):
                    continue
            if not done:
                ok = False
                break
        if ok:
            return m
    raise GenerationFailed(f"no valid manifold after {cfg.retry_budget} attempts")


def builder_augment(m: Manifold, rng: random.Random, cfg: TierConfig) -> Manifold:
    """Phase 1b: up to builder_rounds_max auxiliary constructions."""
    rounds = rng.randint(0, cfg.builder_rounds_max)
    for _round in range(rounds):
        for _try in range(cfg.retry_budget):
            op = rng.choice(list(CATEGORY3))
            snap = m.snapshot()
            try:
                if op == "connect_vertices":
                    pids = sorted(m.points, key=lambda s: int(s[1:]))
                    if len(pids) < 2:
                        raise DegenerateResult("not enough points")
                    a, b = rng.sample(pids, 2)
                    m.run_step("connect_points", (a, b), {"phase": "builder"})
                else:
                    name, parents, params = _build_op_invocation(rng, m, op, None, _any_parent(m))
                    params["phase"] = "builder"
                    m.run_step(name, parents, params)
                break
            except (DegenerateResult, LimitExceeded, KernelError, NoPermittedOperator):
                m.restore(snap)
                continue
    return m


def _any_parent(m: Manifold) -> Entity:
    parents = _grammar_parents(m)
    if parents:
        return parents[0]
    ents = m.nonpoint_entities()
    if not ents:
        raise DegenerateResult("empty manifold")
    return ents[0]


def phase_round_count(m: Manifold, phase: str) -> int:
    """Number of recorded steps tagged with the given phase."""
    count = 0
    for s in m.steps:
        params = dict(s.params)
        if params.get("phase") == phase:
            count += 1
    return count


__all__ = [
    "CATEGORY2",
    "CATEGORY3",
    "DEFAULT_GRAMMAR",
    "GrammarTable",
    "entity_grammar_class",
    "polygon_display_name",
    "sample_base",
    "sample_operator",
    "apply_operator",
    "evolve",
    "builder_augment",
    "phase_round_count",
]
