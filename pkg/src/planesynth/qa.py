"""Question formulation, dataset records, boxed-answer extraction, and the
deterministic answer-equivalence verifier.

Verification parses both the prediction and the stored ground-truth
variants, forms their exact difference, and accepts when the kernel's zero
test certifies equality (symbolically or by certified interval).  Every
failure mode, including timeout, maps to a False verdict.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, field, asdict, replace
from typing import Optional

from .errors import SchemaError
from .exactnum import ExactScalar, is_zero, parse_and_eval
from .manifold import Manifold
from .solver import QueryTarget, Solution

# -- question formulation ------------------------------------------------------


def _subject_phrase(m: Manifold, ent_id: str) -> str:
    from .grammar import polygon_display_name
    from .manifold import Circle, PolygonRef, ShadedBlock

    ent = m.entities[ent_id]
    k = ent.kind
    if isinstance(k, PolygonRef):
        name = polygon_display_name(m, ent)
        head, labels = name.rsplit(" ", 1)
        return f"{head} {_title_kind(head)} {labels}"
    if isinstance(k, Circle):
        return f"circle centered at {m.label_of(k.center)}"
    if isinstance(k, ShadedBlock):
        return f"shadow region Shadow {shaded_label(m, ent_id)}"
    return ent_id


def _title_kind(head: str) -> str:
    """Doubled-kind phrasing: 'trapezoid Trapezoid EFGH'."""
    last = head.split()[-1]
    return "Polygon" if last.endswith("-gon") else last.capitalize()


def shaded_label(m: Manifold, block_id: str) -> str:
    """Label string of a shaded block: its boundary vertices in loop order."""
    from .manifold import Arc, Segment

    ent = m.entities[block_id]
    labels = []
    for eid, reversed_ in ent.kind.loop.curves:
        piece = m.entities[eid].kind
        start = piece.b if reversed_ else piece.a
        labels.append(m.label_of(start))
    return "".join(labels)


def formulate_question(t: QueryTarget, m: Manifold) -> str:
    """Deterministic template question for a solved target (the reference
    question handed to the caption stage)."""
    kind = t.kind
    if kind == "Length":
        a, b = t.subjects
        return f"Calculate the length of Line {m.label_of(a)}{m.label_of(b)}."
    if kind == "Angle":
        v, a, b = t.subjects
        return (
            f"What is the degree measure of Angle "
            f"{m.label_of(a)}{m.label_of(v)}{m.label_of(b)}?"
        )
    if kind == "Perimeter":
        return f"Calculate the perimeter of the {_subject_phrase(m, t.subjects[0])} in the figure."
    if kind == "Entity Area":
        from .manifold import PolygonRef

        ent = m.entities[t.subjects[0]]
        if isinstance(ent.kind, PolygonRef):
            labels = "".join(m.label_of(p) for p in ent.kind.points)
            return f"What is the numerical value of the area of Polygon {labels}?"
        return f"What is the numerical value of the area of the {_subject_phrase(m, t.subjects[0])}?"
    if kind == "Shadow Area":
        return f"Calculate the area of {_subject_phrase(m, t.subjects[0])}."
    if kind in ("Shadow Ratio", "Shadow Entity Ratio"):
        a = _subject_phrase(m, t.subjects[0])
        b = _subject_phrase(m, t.subjects[1])
        return f"What is the ratio of the area of {a} to the area of {b}?"
    if kind == "Overall Shadow Area":
        return "What is the total area of all shaded regions in the figure?"
    raise ValueError(f"unknown question kind {kind}")


# -- dataset records -----------------------------------------------------------

RECORD_FIELDS = (
    "id",
    "tier",
    "image_path",
    "question",
    "question_reference",
    "description",
    "caption",
    "cot",
    "answer_expr",
    "answer_latex",
    "answer_numeric",
    "subtype",
    "difficulty_score",
    "micro_level",
    "trajectory",
    "seed",
    "verified",
)


@dataclass
class DatasetRecord:
    id: str
    tier: str
    image_path: str
    question: Optional[str]
    question_reference: str
    description: str
    caption: Optional[str]
    cot: Optional[str]
    answer_expr: str
    answer_latex: str
    answer_numeric: str
    subtype: str
    difficulty_score: str
    micro_level: int
    trajectory: list[str]
    seed: int
    verified: bool

    def to_json_line(self) -> str:
        doc = {k: getattr(self, k) for k in RECORD_FIELDS}
        return json.dumps(doc, ensure_ascii=True)

    @staticmethod
    def from_json_line(line: str, lineno: int = 0) -> "DatasetRecord":
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            raise SchemaError(f"line {lineno}: invalid JSON ({e})") from e
        missing = [k for k in RECORD_FIELDS if k not in doc]
        if missing:
            raise SchemaError(f"line {lineno}: missing fields {missing}")
        return DatasetRecord(**{k: doc[k] for k in RECORD_FIELDS})


@dataclass(frozen=True)
class GroundTruthVariants:
    expr: str
    latex: str

    def forms(self) -> tuple[str, ...]:
        return (self.expr, self.latex)


def variants_for(sol: Solution) -> GroundTruthVariants:
    return GroundTruthVariants(sol.answer_expr, sol.answer_latex)


def write_records(records: list[DatasetRecord], out_dir) -> list[str]:
    """One JSONL file per tier, records in input order; returns paths."""
    import os

    by_tier: dict[str, list[DatasetRecord]] = {}
    for r in records:
        by_tier.setdefault(r.tier, []).append(r)
    paths = []
    os.makedirs(out_dir, exist_ok=True)
    for tier in sorted(by_tier):
        path = os.path.join(out_dir, f"{tier}.jsonl")
        with open(path, "w", encoding="utf-8") as fh:
            for r in by_tier[tier]:
                fh.write(r.to_json_line() + "\n")
        paths.append(path)
    return paths


def read_records(path) -> list[DatasetRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                out.append(DatasetRecord.from_json_line(line, i))
    return out


# -- boxed answer extraction -----------------------------------------------------


def extract_boxed(response: str) -> Optional[str]:
    """Content of the last balanced \\boxed{...}; None when absent."""
    marker = r"\boxed{"
    start = response.rfind(marker)
    while start != -1:
        depth = 1
        i = start + len(marker)
        while i < len(response) and depth:
            if response[i] == "{":
                depth += 1
            elif response[i] == "}":
                depth -= 1
            i += 1
        if depth == 0:
            return response[start + len(marker): i - 1]
        start = response.rfind(marker, 0, start)
    return None


# -- equivalence verification ----------------------------------------------------

DEFAULT_TIMEOUT_MS = 5000


def _check_equivalence(pred: str, forms: tuple[str, ...]) -> bool:
    try:
        pred_value = parse_and_eval(pred)
    except Exception:
        return False
    for form in forms:
        try:
            gt_value = parse_and_eval(form)
        except Exception:
            continue
        try:
            if is_zero(pred_value - gt_value).is_zero:
                return True
        except Exception:
            continue
    return False


def verify_equivalence(
    pred: str, gt: GroundTruthVariants, timeout_ms: int = DEFAULT_TIMEOUT_MS
) -> bool:
    """True iff the prediction parses and is exactly equal to either
    ground-truth variant; first match wins, timeout rejects."""
    out: queue.Queue = queue.Queue()

    def work():
        try:
            out.put(_check_equivalence(pred, gt.forms()))
        except Exception:
            out.put(False)

    t = threading.Thread(target=work, daemon=True)
    t.start()
    try:
        return bool(out.get(timeout=timeout_ms / 1000.0))
    except queue.Empty:
        return False


__all__ = [
    "DatasetRecord",
    "GroundTruthVariants",
    "RECORD_FIELDS",
    "formulate_question",
    "shaded_label",
    "variants_for",
    "write_records",
    "read_records",
    "extract_boxed",
    "verify_equivalence",
    "DEFAULT_TIMEOUT_MS",
]
