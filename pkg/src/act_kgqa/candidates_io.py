"""Loaders for the per-question artifacts consumed by the engine.

Two JSONL formats: candidate lists produced by a text-to-text generator, and
question-entity annotations produced by an external entity linker (or taken
from gold data).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .errors import FormatError


@dataclass(frozen=True)
class GenerationMeta:
    """Provenance of a candidate list; carried but never used for scoring."""

    beams: Optional[int] = None
    diversity_penalty: Optional[float] = None
    model: Optional[str] = None


@dataclass(frozen=True)
class CandidateList:
    """One question's ranked candidate labels, best beam first.

    After loading, the candidate strings are unique and densely indexed
    0..n-1, which makes the beam-rank score well-defined.
    """

    question_id: str
    question_text: str
    candidates: tuple[str, ...]
    meta: Optional[GenerationMeta] = None

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("empty candidate list")
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError("candidate list contains duplicates")


@dataclass(frozen=True)
class QuestionEntities:
    """Entities detected in one question; may be empty."""

    question_id: str
    entities: tuple[str, ...] = ()


def _dedup_keep_first(items) -> tuple[str, ...]:
    seen = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return tuple(out)


def _iter_jsonl(path: Path):
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(path, lineno, f"invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise FormatError(path, lineno, "expected a JSON object")
            yield lineno, record


def _require_str(record, key, path, lineno) -> str:
    value = record.get(key)
    if not isinstance(value, str):
        raise FormatError(path, lineno, f"missing or non-string {key!r}")
    return value


def load_candidates(file: Union[str, Path]) -> list[CandidateList]:
    """Parse a candidates JSONL file, preserving record order.

    Within a record duplicate strings collapse to their first (best) index;
    an empty candidates array or a repeated question id is an error.
    """
    path = Path(file)
    out: list[CandidateList] = []
    seen_ids: set[str] = set()
    for lineno, record in _iter_jsonl(path):
        question_id = _require_str(record, "question_id", path, lineno)
        question_text = _require_str(record, "question_text", path, lineno)
        if question_id in seen_ids:
            raise FormatError(path, lineno, f"duplicate question_id {question_id!r}")
        seen_ids.add(question_id)
        raw_candidates = record.get("candidates")
        if not isinstance(raw_candidates, list) or not all(
            isinstance(c, str) for c in raw_candidates
        ):
            raise FormatError(path, lineno, "candidates must be a list of strings")
        candidates = _dedup_keep_first(raw_candidates)
        if not candidates:
            raise FormatError(path, lineno, "empty candidate list")
        meta = None
        raw_meta = record.get("meta")
        if raw_meta is not None:
            if not isinstance(raw_meta, dict):
                raise FormatError(path, lineno, "meta must be an object")
            meta = GenerationMeta(
                beams=raw_meta.get("beams"),
                diversity_penalty=raw_meta.get("diversity_penalty"),
                model=raw_meta.get("model"),
            )
        out.append(
            CandidateList(
                question_id=question_id,
                question_text=question_text,
                candidates=candidates,
                meta=meta,
            )
        )
    return out


def load_question_entities(file: Union[str, Path]) -> dict[str, QuestionEntities]:
    """Parse a question-entities JSONL file into a map keyed by question id."""
    path = Path(file)
    out: dict[str, QuestionEntities] = {}
    for lineno, record in _iter_jsonl(path):
        question_id = _require_str(record, "question_id", path, lineno)
        if question_id in out:
            raise FormatError(path, lineno, f"duplicate question_id {question_id!r}")
        raw_entities = record.get("entities")
        if not isinstance(raw_entities, list) or not all(
            isinstance(e, str) and e for e in raw_entities
        ):
            raise FormatError(
                path, lineno, "entities must be a list of non-empty strings"
            )
        out[question_id] = QuestionEntities(
            question_id=question_id, entities=_dedup_keep_first(raw_entities)
        )
    return out
