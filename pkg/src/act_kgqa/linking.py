"""Candidate-to-entity linking and neighbor expansion.

Turns the model-generated answer strings into KG entities and enriches the
resulting pool with forward one-hop neighbors of the question entities, so
that entities the generator never produced can still be ranked.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterable, Optional

if TYPE_CHECKING:
    from .candidates_io import CandidateList, QuestionEntities
    from .kg_store import KgSnapshot
    from .pipeline import RunStats


def normalize_label(s: str) -> str:
    """Canonicalize a label for lookup.

    NFC normalization, surrounding whitespace trimmed, at most one trailing
    dot removed (generative models often end answers with a period), then
    case-folded.
    """
    s = unicodedata.normalize("NFC", s).strip()
    if s.endswith("."):
        s = s[:-1]
    return s.casefold()


@dataclass(frozen=True)
class LinkedCandidate:
    """A KG entity admitted to a question's candidate pool.

    ``t2t_index`` is the entity's rank in the generated candidate list
    (absent for entities that entered purely as neighbors).  ``via_properties``
    holds every property connecting a question entity to this one (empty for
    entities that are not neighbors).
    """

    entity: str
    surface: Optional[str] = None
    t2t_index: Optional[int] = None
    via_properties: tuple[str, ...] = ()

    @property
    def is_neighbor(self) -> bool:
        return bool(self.via_properties)

    @property
    def from_t2t(self) -> bool:
        return self.t2t_index is not None


@dataclass(frozen=True)
class CandidatePool:
    """All candidates for one question, unique by entity id."""

    question_id: str
    linked: tuple[LinkedCandidate, ...] = ()

    def __post_init__(self):
        seen = set()
        for cand in self.linked:
            if cand.entity in seen:
                raise ValueError(f"duplicate entity in pool: {cand.entity}")
            seen.add(cand.entity)

    def entities(self) -> tuple[str, ...]:
        return tuple(c.entity for c in self.linked)

    def t2t_candidates(self) -> tuple[LinkedCandidate, ...]:
        """Candidates that came from the generated list (typing input)."""
        return tuple(c for c in self.linked if c.from_t2t)


def link_candidates(
    snapshot: "KgSnapshot",
    clist: "CandidateList",
    stats: Optional["RunStats"] = None,
) -> list[LinkedCandidate]:
    """Resolve each candidate string to KG entities.

    A string at beam index ``i`` that resolves to several entities fans out
    to one LinkedCandidate per entity, all carrying ``t2t_index=i``; scoring
    disambiguates later.  When two strings resolve to the same entity the
    earlier (better-ranked) index wins.  Strings with no KG match are dropped
    and counted.
    """
    out: list[LinkedCandidate] = []
    seen: set[str] = set()
    for index, surface in enumerate(clist.candidates):
        entities = snapshot.resolve_label(surface)
        if not entities:
            if stats is not None:
                stats.link_dropped += 1
            continue
        for entity in entities:
            if entity in seen:
                continue
            seen.add(entity)
            out.append(
                LinkedCandidate(entity=entity, surface=surface, t2t_index=index)
            )
    return out


def pool_from_linked(
    question_id: str, linked: Iterable[LinkedCandidate]
) -> CandidatePool:
    """Build a pool from linker output (already unique by entity)."""
    return CandidatePool(question_id=question_id, linked=tuple(linked))


def expand_with_neighbors(
    snapshot: "KgSnapshot",
    pool: CandidatePool,
    qents: "QuestionEntities",
) -> CandidatePool:
    """Add every forward one-hop neighbor of the question entities.

    Neighbors already in the pool keep their beam index and gain the
    connecting property; new neighbors enter with no beam index.  The
    operation is idempotent.
    """
    merged: dict[str, LinkedCandidate] = {c.entity: c for c in pool.linked}
    order: list[str] = [c.entity for c in pool.linked]

    for qent in qents.entities:
        for prop, obj in snapshot.get_forward_neighbors(qent):
            existing = merged.get(obj)
            if existing is None:
                merged[obj] = LinkedCandidate(entity=obj, via_properties=(prop,))
                order.append(obj)
            elif prop not in existing.via_properties:
                props = tuple(sorted(set(existing.via_properties) | {prop}))
                merged[obj] = replace(existing, via_properties=props)
    return CandidatePool(
        question_id=pool.question_id,
        linked=tuple(merged[e] for e in order),
    )
