"""Dictionary entity linker over a knowledge-graph label export.

Finds label and alias surfaces inside the question text and emits the
matching entity ids.  This stands in for a learned linker: the output
schema is identical, so a stronger backend can replace it file-for-file.
Matching is case-insensitive on word boundaries; longer surfaces win when
matches start at the same position.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Union

from .io_utils import load_questions, write_jsonl_atomic

logger = logging.getLogger(__name__)

_SURFACE_KINDS = {"label", "alias"}


def load_surface_index(labels_file: Union[str, Path]) -> dict[str, tuple[str, ...]]:
    """Map casefolded surface -> entity ids from a labels TSV export.

    Rows are ``id<TAB>kind<TAB>lang<TAB>text``; only label and alias rows
    define surfaces.  A surface naming several entities keeps them all, in
    id order.
    """
    path = Path(labels_file)
    collected: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 tab-separated fields")
            entity, kind, _lang, text = fields
            if kind not in _SURFACE_KINDS:
                continue
            surface = text.strip().casefold()
            if not surface:
                continue
            ids = collected.setdefault(surface, [])
            if entity not in ids:
                ids.append(entity)
    return {s: tuple(sorted(ids)) for s, ids in collected.items()}


def _match_entities(text: str, index: dict[str, tuple[str, ...]]) -> list[str]:
    folded = text.casefold()
    hits = []
    for surface, ids in index.items():
        # word boundaries, so "paris" does not fire inside "comparison"
        pattern = rf"(?<!\w){re.escape(surface)}(?!\w)"
        match = re.search(pattern, folded)
        if match:
            hits.append((match.start(), -len(surface), surface, ids))
    hits.sort()
    out: list[str] = []
    for _pos, _neg_len, _surface, ids in hits:
        for entity in ids:
            if entity not in out:
                out.append(entity)
    return out


def link_questions(
    questions_file: Union[str, Path],
    labels_file: Union[str, Path],
    out_file: Union[str, Path],
) -> int:
    """Write one entities record per question; empty lists are fine."""
    questions = load_questions(questions_file)
    index = load_surface_index(labels_file)

    records = []
    for qid, text in questions:
        try:
            entities = _match_entities(text, index)
        except Exception as exc:  # pragma: no cover - defensive
            logger.warning("linking failed for %s: %s", qid, exc)
            entities = []
        records.append({"question_id": qid, "entities": entities})
    write_jsonl_atomic(out_file, records)
    return len(records)
