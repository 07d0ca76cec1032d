"""Pluggable caption/CoT client: prompt construction, a generic
chat-completions wire call, and a deterministic offline stub.

The offline stub makes the whole pipeline runnable hermetically: the
caption stub echoes the geometric description plus the reference question,
and the CoT stub ends in a boxed copy of the stored ground truth, so stub
runs always pass verification.  Remote mode posts a generic JSON
chat-completions body with a base64 image part.
"""

from __future__ import annotations

import base64
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import MissingField, ProtocolError
from .qa import DatasetRecord, GroundTruthVariants, extract_boxed, verify_equivalence

CAPTION_DECODING = {"temperature": 0.6, "top_p": 0.95, "max_tokens": 32768}
COT_DECODING = {"temperature": 0.3, "top_p": 0.95, "max_tokens": 16384}

CAPTION_PROMPT = (
    "You are an expert mathematics content creator. Your task is to generate "
    "a complete math problem based on the provided image and metadata. "
    "Please follow these two steps: 1. Caption Generation (Problem Stem): "
    "Analyze the image along with the Full Geometric Description in Input "
    "Data. Synthesize this information into a clear, rigorous, and "
    "descriptive mathematical problem statement. Describe the geometric "
    "construction, the relationships between shapes, such as translation, "
    "connection, polygon on one side, and any shaded regions if any, "
    "strictly using the labels, such as A, B, E, shown in the image. "
    "2. Question Refinement: Read the Question Reference in Input Data. "
    "Rewrite it into a standard, concise English mathematical question that "
    "naturally follows the stem generated in Step 1. You must ensure the "
    "object being calculated, such as length, perimeter, area, or specific "
    "angle, remains exactly the same as the original. Final Output "
    "Requirement: Provide a cohesive problem text, including both Context "
    "and Question.\n"
    "Question Reference: {question}\n"
    "Full Geometric Description: {description}"
)

COT_PROMPT = (
    "Question: {q_text} At the end of your response, place the final "
    "numerical answer inside a LaTeX box using \\boxed{{}}. Make sure that "
    "the final answer uses LaTeX-style expressions and is wrapped in "
    "\\boxed{{}}."
)


@dataclass(frozen=True)
class TeacherConfig:
    endpoint: str = ""
    model: str = "teacher-mllm"
    caption_decoding: dict = field(default_factory=lambda: dict(CAPTION_DECODING))
    cot_decoding: dict = field(default_factory=lambda: dict(COT_DECODING))
    api_key_env: str = "TEACHER_API_KEY"
    mode: str = "offline-stub"  # "offline-stub" | "remote"
    timeout_s: float = 120.0
    max_workers: int = 8
    retries: int = 3
    debug: bool = False


@dataclass(frozen=True)
class PromptPayload:
    image: bytes
    media_type: str
    text: str
    decoding: dict

    def message_body(self, model: str) -> dict:
        return {
            "model": model,
            "messages": [
                {
                    "role": "user",
                    "content": [
                        {
                            "type": "image_url",
                            "image_url": {
                                "url": "data:%s;base64,%s"
                                % (self.media_type, base64.b64encode(self.image).decode())
                            },
                        },
                        {"type": "text", "text": self.text},
                    ],
                }
            ],
            **self.decoding,
        }


def build_caption_prompt(rec: DatasetRecord, image: bytes,
                         media_type: str = "image/png") -> PromptPayload:
    if not rec.question_reference:
        raise MissingField("record has no question_reference")
    if not rec.description:
        raise MissingField("record has no description")
    text = CAPTION_PROMPT.format(
        question=rec.question_reference, description=rec.description
    )
    return PromptPayload(image, media_type, text, dict(CAPTION_DECODING))


def build_cot_prompt(rec: DatasetRecord, image: bytes,
                     media_type: str = "image/png") -> PromptPayload:
    q_text = rec.question or rec.question_reference
    if not q_text:
        raise MissingField("record has neither question nor question_reference")
    text = COT_PROMPT.format(q_text=q_text)
    return PromptPayload(image, media_type, text, dict(COT_DECODING))


class NetworkError(ProtocolError):
    pass


def request(cfg: TeacherConfig, payload: PromptPayload,
            stub_record: Optional[DatasetRecord] = None) -> str:
    """One teacher round trip (or the deterministic offline stub)."""
    if cfg.mode == "offline-stub":
        return _offline_stub(payload, stub_record)
    import requests as _requests

    headers = {"Content-Type": "application/json"}
    key = os.environ.get(cfg.api_key_env, "")
    if key:
        headers["Authorization"] = f"Bearer {key}"
    body = payload.message_body(cfg.model)
    if cfg.debug:
        redacted = dict(headers)
        if "Authorization" in redacted:
            redacted["Authorization"] = "Bearer ***"
        print(f"[teacher] POST {cfg.endpoint} headers={redacted}")
    last_err: Optional[Exception] = None
    for attempt in range(cfg.retries):
        try:
            resp = _requests.post(
                cfg.endpoint, json=body, headers=headers, timeout=cfg.timeout_s
            )
            if resp.status_code != 200:
                raise NetworkError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                doc = resp.json()
                return doc["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as e:
                raise ProtocolError(f"malformed completion body: {e}") from e
        except ProtocolError:
            raise
        except Exception as e:  # connection errors, timeouts
            last_err = e
            time.sleep(min(2.0 ** attempt * 0.1, 2.0))
    raise NetworkError(f"request failed after {cfg.retries} attempts: {last_err}")


def _offline_stub(payload: PromptPayload, rec: Optional[DatasetRecord]) -> str:
    if rec is None:
        raise MissingField("offline stub needs the dataset record")
    if "Question Reference:" in payload.text:
        return f"{rec.description} {rec.question_reference}"
    return (
        "Reading the exact construction off the diagram and evaluating the "
        "target quantity analytically gives \\boxed{%s}" % rec.answer_latex
    )


@dataclass
class FilterStats:
    attempted: int = 0
    discarded_no_box: int = 0
    verified: int = 0

    @property
    def pass_rate(self) -> float:
        return self.verified / self.attempted if self.attempted else 0.0


def generate_and_filter(
    records: list[DatasetRecord],
    cfg: TeacherConfig,
    images: dict[str, bytes],
    timeout_ms: int = 5000,
) -> FilterStats:
    """Caption + CoT for every record, then the deterministic answer filter.

    Records are updated in place: verified records carry caption and cot;
    failures keep verified=False and a null cot.  Per-record errors are
    recorded and the batch continues.
    """
    stats = FilterStats()

    def process(rec: DatasetRecord):
        image = images.get(rec.image_path, b"")
        try:
            caption = request(cfg, build_caption_prompt(rec, image), rec)
            rec.caption = caption
            rec.question = caption
            cot_response = request(cfg, build_cot_prompt(rec, image), rec)
        except (ProtocolError, MissingField):
            return False, None
        boxed = extract_boxed(cot_response)
        if boxed is None:
            return None, None  # discarded: no valid boxed expression
        ok = verify_equivalence(
            boxed, GroundTruthVariants(rec.answer_expr, rec.answer_latex), timeout_ms
        )
        return ok, cot_response

    if cfg.mode == "remote" and cfg.max_workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.max_workers) as pool:
            results = list(pool.map(process, records))
    else:
        results = [process(r) for r in records]

    for rec, (ok, cot_response) in zip(records, results):
        stats.attempted += 1
        if ok is None:
            stats.discarded_no_box += 1
            rec.verified = False
            rec.cot = None
        elif ok:
            stats.verified += 1
            rec.verified = True
            rec.cot = cot_response
        else:
            rec.verified = False
            rec.cot = None
    return stats


__all__ = [
    "TeacherConfig",
    "PromptPayload",
    "CAPTION_PROMPT",
    "COT_PROMPT",
    "CAPTION_DECODING",
    "COT_DECODING",
    "build_caption_prompt",
    "build_cot_prompt",
    "request",
    "generate_and_filter",
    "FilterStats",
    "NetworkError",
]
