"""The geometric state space: atomic points, referencing entities, levels,
and a replayable construction trajectory.

Only points carry coordinates; segments, circles, arcs, polygons and shaded
blocks hold point ids plus exact parameters.  Every derived element records
a dependency level of 1 + max(level of parents).  Mutations happen through
trajectory steps so that replaying the recorded steps on an empty manifold
reproduces the state byte-for-byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

from .errors import DegenerateResult, LimitExceeded, ReplayDivergence
from .exactnum import ExactAngle, ExactScalar, equals, is_zero, parse_and_eval
from .geom import (
    Vec,
    circle_circle,
    point_in_ccw_sweep,
    point_on_circle,
    point_on_segment,
    segment_circle,
    segment_segment,
)

SUBSCRIPTS = "₀₁₂₃₄₅₆₇₈₉"


def subscript(n: int) -> str:
    return "".join(SUBSCRIPTS[int(d)] for d in str(n))


@dataclass(frozen=True)
class PointAtom:
    id: str
    x: ExactScalar
    y: ExactScalar
    level: int
    label: Optional[str] = None

    @property
    def vec(self) -> Vec:
        return Vec(self.x, self.y)


@dataclass(frozen=True)
class Segment:
    a: str
    b: str


@dataclass(frozen=True)
class Circle:
    center: str
    radius: ExactScalar


@dataclass(frozen=True)
class Arc:
    """Circular arc from point a to point b around center, ccw or cw."""

    center: str
    radius: ExactScalar
    a: str
    b: str
    ccw: bool


@dataclass(frozen=True)
class PolygonRef:
    points: tuple[str, ...]
    variant: str  # e.g. "triangle-equilateral", "quad-trapezoid", "regular-6"


CurveRef = tuple[str, bool]  # (entity id, reversed traversal)


@dataclass(frozen=True)
class BoundaryLoop:
    curves: tuple[CurveRef, ...]


@dataclass(frozen=True)
class ShadedBlock:
    loop: BoundaryLoop
    style: str


EntityKind = Union[Segment, Circle, Arc, PolygonRef, ShadedBlock]


@dataclass(frozen=True)
class Entity:
    id: str
    kind: EntityKind
    level: int
    provenance: int
    piece_of: Optional[str] = None  # carrier id for loop pieces

    @property
    def kind_name(self) -> str:
        return type(self.kind).__name__


# Trajectory step parameters: small tagged union so steps serialize cleanly.
ParamValue = Union[ExactScalar, ExactAngle, Fraction, int, str, bool, tuple]


@dataclass(frozen=True)
class ConstructionStep:
    op: str
    parents: tuple[str, ...]
    params: tuple[tuple[str, ParamValue], ...]
    produced: tuple[str, ...]
    description: str
    digest: str = ""

    def param(self, name: str) -> ParamValue:
        for k, v in self.params:
            if k == name:
                return v
        raise KeyError(name)


# Executors: op name -> fn(manifold, parents, params dict) -> produced ids.
# Populated by the grammar and shading modules at import time.
STEP_EXECUTORS: dict[str, Callable] = {}


def register_executor(op: str):
    def deco(fn):
        STEP_EXECUTORS[op] = fn
        return fn
    return deco


class Manifold:
    def __init__(self, rng_seed: int = 0, max_points: int = 10 ** 9, max_lines: int = 10 ** 9):
        self.rng_seed = rng_seed
        self.max_points = max_points
        self.max_lines = max_lines
        self.points: dict[str, PointAtom] = {}
        self.entities: dict[str, Entity] = {}
        self.steps: list[ConstructionStep] = []
        self.frozen = False
        self._next_point = 0
        self._next_entity = 0
        self._next_letter = 0
        self._family_counters = {"O": 1, "M": 0, "I": 0, "F": 0}

    # -- label allocation ---------------------------------------------------

    def _alloc_label(self, family: Optional[str]) -> str:
        if family is None:
            i = self._next_letter
            self._next_letter += 1
            letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
            if i < 26:
                return letters[i]
            return letters[i % 26] + subscript(i // 26)
        n = self._family_counters[family]
        self._family_counters[family] = n + 1
        return family + subscript(n)

    # -- point and entity management ----------------------------------------

    def _check_frozen(self):
        if self.frozen:
            raise DegenerateResult("manifold is frozen")

    def find_point_at(self, v: Vec) -> Optional[PointAtom]:
        for p in self.points.values():
            if is_zero(p.x - v.x).is_zero and is_zero(p.y - v.y).is_zero:
                return p
        return None

    def add_point(
        self,
        v: Vec,
        parents: Iterable[str] = (),
        family: Optional[str] = None,
        label: Optional[str] = None,
    ) -> tuple[PointAtom, bool]:
        """Register a point; a coordinate-identical existing point is
        returned unchanged (created flag False)."""
        self._check_frozen()
        existing = self.find_point_at(v)
        if existing is not None:
            return existing, False
        if len(self.points) >= self.max_points:
            raise LimitExceeded(f"point limit {self.max_points} reached")
        parent_list = list(parents)
        level = 0 if not parent_list else 1 + max(self._level_of(pid) for pid in parent_list)
        pid = f"p{self._next_point}"
        self._next_point += 1
        atom = PointAtom(pid, v.x, v.y, level, label or self._alloc_label(family))
        self.points[pid] = atom
        return atom, True

    def _level_of(self, ident: str) -> int:
        if ident in self.points:
            return self.points[ident].level
        return self.entities[ident].level

    def _add_entity(
        self,
        kind: EntityKind,
        parents: Iterable[str],
        piece_of: Optional[str] = None,
        level: Optional[int] = None,
    ) -> Entity:
        self._check_frozen()
        if isinstance(kind, Segment) and piece_of is None:
            if self.line_count() >= self.max_lines:
                raise LimitExceeded(f"line limit {self.max_lines} reached")
        parent_list = list(parents)
        if level is None:
            level = 0 if not parent_list else 1 + max(self._level_of(i) for i in parent_list)
        eid = f"e{self._next_entity}"
        self._next_entity += 1
        ent = Entity(eid, kind, level, len(self.steps), piece_of)
        self.entities[eid] = ent
        return ent

    def add_segment(self, a: str, b: str, parents: Iterable[str] = (), piece_of=None,
                    level: Optional[int] = None) -> Entity:
        if a == b:
            raise DegenerateResult("zero-length segment")
        existing = self.find_segment(a, b, piece_of)
        if existing is not None:
            return existing
        return self._add_entity(Segment(a, b), parents, piece_of, level)

    def find_segment(self, a: str, b: str, piece_of=None) -> Optional[Entity]:
        for ent in self.entities.values():
            if isinstance(ent.kind, Segment) and (ent.piece_of is None) == (piece_of is None):
                if {ent.kind.a, ent.kind.b} == {a, b}:
                    return ent
        return None

    def add_circle(self, center: str, radius: ExactScalar, parents: Iterable[str] = (),
                   level: Optional[int] = None) -> Entity:
        if radius.sign() <= 0:
            raise DegenerateResult("circle radius must be positive")
        return self._add_entity(Circle(center, radius), parents, None, level)

    def add_arc(self, center: str, radius: ExactScalar, a: str, b: str, ccw: bool,
                parents: Iterable[str] = (), piece_of=None,
                level: Optional[int] = None) -> Entity:
        if radius.sign() <= 0:
            raise DegenerateResult("arc radius must be positive")
        if a == b:
            raise DegenerateResult("arc endpoints coincide")
        return self._add_entity(Arc(center, radius, a, b, ccw), parents, piece_of, level)

    def add_polygon(self, point_ids: list[str], variant: str, parents: Iterable[str] = (),
                    level: Optional[int] = None) -> Entity:
        if len(point_ids) < 3 or len(set(point_ids)) != len(point_ids):
            raise DegenerateResult("polygon needs >= 3 distinct vertices")
        self._check_simple_polygon(point_ids)
        return self._add_entity(PolygonRef(tuple(point_ids), variant), parents, None, level)

    def _check_simple_polygon(self, ids: list[str]):
        pts = [self.points[i].vec for i in ids]
        n = len(pts)
        area2 = ExactScalar.zero()
        for i in range(n):
            area2 = area2 + pts[i].cross(pts[(i + 1) % n])
        if is_zero(area2).is_zero:
            raise DegenerateResult("polygon has zero area")
        for i in range(n):
            for j in range(i + 1, n):
                if j in (i, (i + 1) % n) or (j + 1) % n == i:
                    continue
                if segment_segment(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]):
                    raise DegenerateResult("polygon self-intersects")

    def add_shaded_block(self, loop: BoundaryLoop, style: str) -> Entity:
        parents = [eid for eid, _ in loop.curves]
        return self._add_entity(ShadedBlock(loop, style), parents)

    # -- queries -------------------------------------------------------------

    def line_count(self) -> int:
        return sum(
            1
            for e in self.entities.values()
            if isinstance(e.kind, Segment) and e.piece_of is None
        )

    def drawable_entities(self) -> list[Entity]:
        return [
            e
            for e in sorted(self.entities.values(), key=lambda e: int(e.id[1:]))
            if e.piece_of is None and isinstance(e.kind, (Segment, Circle, Arc))
        ]

    def nonpoint_entities(self, include_pieces: bool = False) -> list[Entity]:
        return [
            e
            for e in sorted(self.entities.values(), key=lambda e: int(e.id[1:]))
            if include_pieces or e.piece_of is None
        ]

    def coords(self, pid: str) -> Vec:
        return self.points[pid].vec

    def label_of(self, pid: str) -> str:
        return self.points[pid].label or pid

    def entity_endpoints(self, ent: Entity) -> Optional[tuple[str, str]]:
        if isinstance(ent.kind, Segment):
            return ent.kind.a, ent.kind.b
        if isinstance(ent.kind, Arc):
            return ent.kind.a, ent.kind.b
        return None

    def point_on_entity(self, pid: str, ent: Entity) -> bool:
        p = self.coords(pid)
        k = ent.kind
        if isinstance(k, Segment):
            return point_on_segment(p, self.coords(k.a), self.coords(k.b))
        if isinstance(k, Circle):
            return point_on_circle(p, self.coords(k.center), k.radius)
        if isinstance(k, Arc):
            if not point_on_circle(p, self.coords(k.center), k.radius):
                return False
            return self._within_arc(k, p)
        return False

    def _within_arc(self, arc: Arc, p: Vec) -> bool:
        o = self.coords(arc.center)
        u = self.coords(arc.a) - o
        w = self.coords(arc.b) - o
        v = p - o
        if not arc.ccw:
            u, w = w, u
        return point_in_ccw_sweep(u, w, v)

    # -- intersections ---------------------------------------------------------

    def intersect(self, a_id: str, b_id: str) -> list[PointAtom]:
        """Register all exact intersection points of two curve entities."""
        ea, eb = self.entities[a_id], self.entities[b_id]
        if a_id == b_id:
            raise DegenerateResult("cannot intersect an entity with itself")
        candidates = self._intersection_candidates(ea, eb)
        out = []
        for v in candidates:
            atom, _created = self.add_point(v, parents=[a_id, b_id], family="I")
            out.append(atom)
        return out

    def _intersection_candidates(self, ea: Entity, eb: Entity) -> list[Vec]:
        def as_geom(e: Entity):
            k = e.kind
            if isinstance(k, Segment):
                return ("seg", self.coords(k.a), self.coords(k.b))
            if isinstance(k, Circle):
                return ("circ", self.coords(k.center), k.radius)
            if isinstance(k, Arc):
                return ("arc", e)
            raise DegenerateResult(f"unsupported intersection kind {e.kind_name}")

        ga, gb = as_geom(ea), as_geom(eb)
        # Arc handled as its circle plus a containment filter.
        def base(g):
            if g[0] == "arc":
                arc = g[1].kind
                return ("circ", self.coords(arc.center), arc.radius)
            return g

        ba, bb = base(ga), base(gb)
        if ba[0] == "seg" and bb[0] == "seg":
            pts = segment_segment(ba[1], ba[2], bb[1], bb[2])
        elif ba[0] == "seg":
            pts = segment_circle(ba[1], ba[2], bb[1], bb[2])
        elif bb[0] == "seg":
            pts = segment_circle(bb[1], bb[2], ba[1], ba[2])
        else:
            pts = circle_circle(ba[1], ba[2], bb[1], bb[2])
        if ga[0] == "arc":
            pts = [p for p in pts if self._within_arc(ga[1].kind, p)]
        if gb[0] == "arc":
            pts = [p for p in pts if self._within_arc(gb[1].kind, p)]
        return pts

    def intersect_with_all(self, new_ids: list[str]) -> list[PointAtom]:
        """Intersect freshly added curves against every earlier curve."""
        created = []
        new_set = set(new_ids)
        for nid in new_ids:
            ent = self.entities[nid]
            if not isinstance(ent.kind, (Segment, Circle, Arc)) or ent.piece_of:
                continue
            for other in self.drawable_entities():
                if other.id in new_set or other.id == nid:
                    continue
                created.extend(self.intersect(nid, other.id))
        return created

    # -- trajectory -----------------------------------------------------------

    def run_step(self, op: str, parents: tuple[str, ...], params: dict) -> ConstructionStep:
        """Execute a registered operator and record it in the trajectory."""
        fn = STEP_EXECUTORS[op]
        produced, description = fn(self, parents, params)
        step = ConstructionStep(
            op,
            tuple(parents),
            tuple(sorted(params.items(), key=lambda kv: kv[0])),
            tuple(produced),
            description,
            self._digest(produced),
        )
        self.steps.append(step)
        return step

    def _digest(self, produced: Iterable[str]) -> str:
        """Short content hash of produced elements; replay tamper check."""
        import hashlib

        h = hashlib.sha256()
        for ident in produced:
            if ident in self.points:
                p = self.points[ident]
                h.update(
                    f"{p.id}|{p.label}|{p.x.to_canonical_string()}|"
                    f"{p.y.to_canonical_string()}|{p.level}".encode()
                )
            else:
                e = self.entities[ident]
                h.update(f"{e.id}|{e.kind!r}|{e.level}".encode())
        return h.hexdigest()[:16]

    def freeze(self) -> "Manifold":
        self.frozen = True
        return self

    def snapshot(self) -> dict:
        """Cheap state capture; values are immutable so shallow copies do."""
        return {
            "points": dict(self.points),
            "entities": dict(self.entities),
            "steps": list(self.steps),
            "_next_point": self._next_point,
            "_next_entity": self._next_entity,
            "_next_letter": self._next_letter,
            "_family_counters": dict(self._family_counters),
        }

    def restore(self, snap: dict) -> None:
        self.points = dict(snap["points"])
        self.entities = dict(snap["entities"])
        self.steps = list(snap["steps"])
        self._next_point = snap["_next_point"]
        self._next_entity = snap["_next_entity"]
        self._next_letter = snap["_next_letter"]
        self._family_counters = dict(snap["_family_counters"])

    def describe(self) -> str:
        return " ".join(s.description for s in self.steps if s.description)

    # -- audits (used by tests and the tier audit) -----------------------------

    def audit_atomicity(self) -> bool:
        for e in self.entities.values():
            k = e.kind
            refs: list[str] = []
            if isinstance(k, Segment):
                refs = [k.a, k.b]
            elif isinstance(k, Circle):
                refs = [k.center]
            elif isinstance(k, Arc):
                refs = [k.center, k.a, k.b]
            elif isinstance(k, PolygonRef):
                refs = list(k.points)
            elif isinstance(k, ShadedBlock):
                if any(eid not in self.entities for eid, _ in k.loop.curves):
                    return False
                continue
            if any(r not in self.points for r in refs):
                return False
        return True

    def audit_levels(self) -> bool:
        for step in self.steps:
            if not step.parents:
                continue
            pl = max(self._level_of(i) for i in step.parents)
            for out in step.produced:
                lvl = self._level_of(out)
                if lvl > pl + 1:
                    return False
        return True

    # -- serialization ----------------------------------------------------------

    def canonical_dump(self) -> str:
        def point_row(p: PointAtom):
            return {
                "id": p.id,
                "label": p.label,
                "x": p.x.to_canonical_string(),
                "y": p.y.to_canonical_string(),
                "level": p.level,
            }

        def entity_row(e: Entity):
            row = {"id": e.id, "kind": e.kind_name, "level": e.level,
                   "provenance": e.provenance, "piece_of": e.piece_of}
            k = e.kind
            if isinstance(k, Segment):
                row["points"] = [k.a, k.b]
            elif isinstance(k, Circle):
                row["center"] = k.center
                row["radius"] = k.radius.to_canonical_string()
            elif isinstance(k, Arc):
                row["center"] = k.center
                row["radius"] = k.radius.to_canonical_string()
                row["points"] = [k.a, k.b]
                row["ccw"] = k.ccw
            elif isinstance(k, PolygonRef):
                row["points"] = list(k.points)
                row["variant"] = k.variant
            elif isinstance(k, ShadedBlock):
                row["loop"] = [[eid, rev] for eid, rev in k.loop.curves]
                row["style"] = k.style
            return row

        doc = {
            "rng_seed": self.rng_seed,
            "limits": {"max_points": self.max_points, "max_lines": self.max_lines},
            "points": [point_row(self.points[k])
                       for k in sorted(self.points, key=lambda s: int(s[1:]))],
            "entities": [entity_row(self.entities[k])
                         for k in sorted(self.entities, key=lambda s: int(s[1:]))],
            "trajectory": [_step_to_json(s) for s in self.steps],
        }
        return json.dumps(doc, indent=1, ensure_ascii=True, sort_keys=False)


# -- step (de)serialization ----------------------------------------------------


def _param_to_json(v: ParamValue):
    if isinstance(v, ExactScalar):
        return {"t": "scalar", "v": v.to_canonical_string()}
    if isinstance(v, ExactAngle):
        return {"t": "angle", "v": str(v.q)}
    if isinstance(v, Fraction):
        return {"t": "fraction", "v": str(v)}
    if isinstance(v, bool):
        return {"t": "bool", "v": v}
    if isinstance(v, int):
        return {"t": "int", "v": v}
    if isinstance(v, str):
        return {"t": "str", "v": v}
    if isinstance(v, tuple):
        return {"t": "tuple", "v": [_param_to_json(x) for x in v]}
    raise TypeError(f"unsupported param type {type(v).__name__}")


def _param_from_json(d) -> ParamValue:
    t, v = d["t"], d["v"]
    if t == "scalar":
        return parse_and_eval(v)
    if t == "angle":
        return ExactAngle(Fraction(v))
    if t == "fraction":
        return Fraction(v)
    if t in ("int", "bool", "str"):
        return v
    if t == "tuple":
        return tuple(_param_from_json(x) for x in v)
    raise TypeError(f"unsupported param tag {t}")


def _step_to_json(s: ConstructionStep):
    return {
        "op": s.op,
        "parents": list(s.parents),
        "params": [[k, _param_to_json(v)] for k, v in s.params],
        "produced": list(s.produced),
        "description": s.description,
        "digest": s.digest,
    }


def _step_from_json(d) -> ConstructionStep:
    return ConstructionStep(
        d["op"],
        tuple(d["parents"]),
        tuple((k, _param_from_json(v)) for k, v in d["params"]),
        tuple(d["produced"]),
        d["description"],
        d.get("digest", ""),
    )


def steps_from_dump(text: str) -> list[ConstructionStep]:
    doc = json.loads(text)
    rows = doc["trajectory"] if isinstance(doc, dict) else doc
    return [_step_from_json(r) for r in rows]


def load_manifold(text: str) -> Manifold:
    """Rebuild a manifold from its canonical dump (no recomputation)."""
    doc = json.loads(text)
    m = Manifold(doc["rng_seed"], doc["limits"]["max_points"], doc["limits"]["max_lines"])
    for row in doc["points"]:
        atom = PointAtom(row["id"], parse_and_eval(row["x"]), parse_and_eval(row["y"]),
                         row["level"], row["label"])
        m.points[atom.id] = atom
        m._next_point = max(m._next_point, int(atom.id[1:]) + 1)
    for row in doc["entities"]:
        kind_name = row["kind"]
        if kind_name == "Segment":
            kind: EntityKind = Segment(row["points"][0], row["points"][1])
        elif kind_name == "Circle":
            kind = Circle(row["center"], parse_and_eval(row["radius"]))
        elif kind_name == "Arc":
            kind = Arc(row["center"], parse_and_eval(row["radius"]),
                       row["points"][0], row["points"][1], row["ccw"])
        elif kind_name == "PolygonRef":
            kind = PolygonRef(tuple(row["points"]), row["variant"])
        elif kind_name == "ShadedBlock":
            kind = ShadedBlock(BoundaryLoop(tuple((e, r) for e, r in row["loop"])),
                               row["style"])
        else:
            raise ValueError(f"unknown entity kind {kind_name}")
        ent = Entity(row["id"], kind, row["level"], row["provenance"], row["piece_of"])
        m.entities[ent.id] = ent
        m._next_entity = max(m._next_entity, int(ent.id[1:]) + 1)
    m.steps = [_step_from_json(r) for r in doc["trajectory"]]
    letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rev_sub = {c: str(i) for i, c in enumerate(SUBSCRIPTS)}
    for p in m.points.values():
        lab = p.label or ""
        if len(lab) == 1 and lab in letters:
            m._next_letter = max(m._next_letter, letters.index(lab) + 1)
        elif len(lab) >= 2 and lab[0] in m._family_counters and all(c in rev_sub for c in lab[1:]):
            n = int("".join(rev_sub[c] for c in lab[1:]))
            fam = lab[0]
            m._family_counters[fam] = max(m._family_counters[fam], n + 1)
    return m


def replay(steps: list[ConstructionStep], rng_seed: int,
           max_points: int = 10 ** 9, max_lines: int = 10 ** 9) -> Manifold:
    """Re-execute a trajectory on an empty manifold and verify outputs.

    Raises ReplayDivergence when any step's recomputed products differ
    from the recorded ones.
    """
    # Executors live in modules that register themselves on import.
    from . import grammar as _grammar  # noqa: F401
    from .render import shading as _shading  # noqa: F401

    m = Manifold(rng_seed, max_points, max_lines)
    for step in steps:
        done = m.run_step(step.op, step.parents, dict(step.params))
        if done.produced != step.produced:
            raise ReplayDivergence(
                f"step {step.op}: produced {done.produced}, recorded {step.produced}"
            )
        if step.digest and done.digest != step.digest:
            raise ReplayDivergence(f"step {step.op}: output digest mismatch")
        if done.description != step.description:
            raise ReplayDivergence(f"step {step.op}: description drift")
    return m.freeze()


__all__ = [
    "PointAtom",
    "Segment",
    "Circle",
    "Arc",
    "PolygonRef",
    "BoundaryLoop",
    "ShadedBlock",
    "Entity",
    "ConstructionStep",
    "Manifold",
    "register_executor",
    "replay",
    "load_manifold",
    "steps_from_dump",
    "subscript",
]
