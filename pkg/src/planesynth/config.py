"""Tier configurations: generation hyperparameters for entry/hard/expert.

The JSON schema mirrors the configurable-parameter table one to one; the
built-in defaults reproduce the three shipped tiers exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction

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

SHADE_STYLES = ("hatch", "solid", "crosshatch", "gradient")


@dataclass(frozen=True)
class CanvasConfig:
    width: int = 1600
    height: int = 1200
    line_width: int = 3
    line_color: str = "#000000"


@dataclass(frozen=True)
class ShaderConfig:
    region_min: int
    region_max: int
    max_fill_attempts: int
    styles: tuple[str, ...] = SHADE_STYLES


@dataclass(frozen=True)
class TierConfig:
    name: str
    target_quantity: int
    max_points: int
    max_lines: int
    derivation_rounds: tuple[int, int]
    builder_rounds_max: int
    shader: ShaderConfig
    question_weights: dict[str, Fraction]
    questions_per_geometry: int
    canvas: CanvasConfig = CanvasConfig()
    retry_budget: int = 10
    tail_bias_exponent: int = 2


def _weights(length: Fraction, shadow_area: Fraction, others: tuple[str, ...]) -> dict[str, Fraction]:
    rest = (1 - length - shadow_area) / len(others)
    w = {"Length": length, "Shadow Area": shadow_area}
    w.update({k: rest for k in others})
    return w


ENTRY = TierConfig(
    name="entry",
    target_quantity=20000,
    max_points=30,
    max_lines=40,
    derivation_rounds=(1, 2),
    builder_rounds_max=3,
    shader=ShaderConfig(1, 1, 3),
    question_weights=_weights(
        Fraction(3, 10), Fraction(2, 10),
        ("Angle", "Perimeter", "Entity Area", "Shadow Entity Ratio"),
    ),
    questions_per_geometry=1,
)

HARD = TierConfig(
    name="hard",
    target_quantity=10000,
    max_points=40,
    max_lines=60,
    derivation_rounds=(2, 4),
    builder_rounds_max=5,
    shader=ShaderConfig(1, 4, 5),
    question_weights=_weights(
        Fraction(6, 10), Fraction(3, 10),
        ("Angle", "Perimeter", "Entity Area", "Shadow Entity Ratio", "Shadow Ratio"),
    ),
    questions_per_geometry=5,
)

EXPERT = TierConfig(
    name="expert",
    target_quantity=5000,
    max_points=50,
    max_lines=80,
    derivation_rounds=(3, 5),
    builder_rounds_max=7,
    shader=ShaderConfig(1, 6, 7),
    question_weights=_weights(
        Fraction(3, 10), Fraction(2, 10),
        ("Angle", "Perimeter", "Entity Area", "Shadow Entity Ratio",
         "Shadow Ratio", "Overall Shadow Area"),
    ),
    questions_per_geometry=10,
)

TIERS = {"entry": ENTRY, "hard": HARD, "expert": EXPERT}


def tier_config(name: str) -> TierConfig:
    try:
        return TIERS[name]
    except KeyError:
        raise ValueError(f"unknown tier {name!r} (expected entry|hard|expert)") from None


def config_to_json(cfg: TierConfig) -> str:
    doc = {
        "tier": cfg.name,
        "global": {
            "target_quantity": cfg.target_quantity,
            "max_points": cfg.max_points,
            "max_lines": cfg.max_lines,
        },
        "evolution": {"derivation_rounds": list(cfg.derivation_rounds)},
        "builder": {"max_enhancement_rounds": cfg.builder_rounds_max},
        "drawer": {
            "canvas": [cfg.canvas.width, cfg.canvas.height],
            "line_width": cfg.canvas.line_width,
            "line_color": cfg.canvas.line_color,
        },
        "shader": {
            "target_region_count": [cfg.shader.region_min, cfg.shader.region_max],
            "max_fill_attempts": cfg.shader.max_fill_attempts,
            "styles": list(cfg.shader.styles),
        },
        "qa": {
            "question_weights": {k: str(v) for k, v in cfg.question_weights.items()},
            "questions_per_geometry": cfg.questions_per_geometry,
        },
        "engine": {
            "retry_budget": cfg.retry_budget,
            "tail_bias_exponent": cfg.tail_bias_exponent,
        },
    }
    return json.dumps(doc, indent=2)


def config_from_json(text: str) -> TierConfig:
    doc = json.loads(text)
    base = TIERS.get(doc.get("tier", ""), ENTRY)
    g = doc.get("global", {})
    ev = doc.get("evolution", {})
    bu = doc.get("builder", {})
    dr = doc.get("drawer", {})
    sh = doc.get("shader", {})
    qa = doc.get("qa", {})
    en = doc.get("engine", {})
    canvas = base.canvas
    if dr:
        canvas = CanvasConfig(
            dr.get("canvas", [canvas.width, canvas.height])[0],
            dr.get("canvas", [canvas.width, canvas.height])[1],
            dr.get("line_width", canvas.line_width),
            dr.get("line_color", canvas.line_color),
        )
    shader = base.shader
    if sh:
        rc = sh.get("target_region_count", [shader.region_min, shader.region_max])
        shader = ShaderConfig(
            rc[0], rc[1],
            sh.get("max_fill_attempts", shader.max_fill_attempts),
            tuple(sh.get("styles", shader.styles)),
        )
    weights = dict(base.question_weights)
    if "question_weights" in qa:
        weights = {k: Fraction(v) for k, v in qa["question_weights"].items()}
    for k in weights:
        if k not in QUESTION_KINDS:
            raise ValueError(f"unknown question kind {k!r}")
    return TierConfig(
        name=doc.get("tier", base.name),
        target_quantity=g.get("target_quantity", base.target_quantity),
        max_points=g.get("max_points", base.max_points),
        max_lines=g.get("max_lines", base.max_lines),
        derivation_rounds=tuple(ev.get("derivation_rounds", base.derivation_rounds)),
        builder_rounds_max=bu.get("max_enhancement_rounds", base.builder_rounds_max),
        shader=shader,
        question_weights=weights,
        questions_per_geometry=qa.get("questions_per_geometry", base.questions_per_geometry),
        canvas=canvas,
        retry_budget=en.get("retry_budget", base.retry_budget),
        tail_bias_exponent=en.get("tail_bias_exponent", base.tail_bias_exponent),
    )


__all__ = [
    "TierConfig",
    "CanvasConfig",
    "ShaderConfig",
    "QUESTION_KINDS",
    "SHADE_STYLES",
    "TIERS",
    "ENTRY",
    "HARD",
    "EXPERT",
    "tier_config",
    "config_to_json",
    "config_from_json",
]
