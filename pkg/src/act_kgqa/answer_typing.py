"""Expected-answer-type aggregation.

The generator's candidates tend to share the correct answer's type even when
none of them is the correct answer.  This module counts instance-of types
over the generated candidates and merges the most frequent ones, plus types
whose labels embed close to them, into the expected-type set used by the
type score.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

from .embeddings import EmbeddingTable, cosine

if TYPE_CHECKING:
    from .kg_store import KgSnapshot
    from .linking import LinkedCandidate
    from .pipeline import RunStats

DEFAULT_TOP_K = 3
DEFAULT_SIMILARITY_THRESHOLD = 0.6


@dataclass(frozen=True)
class TypeFrequency:
    """How many generated candidates carry a given type."""

    type: str
    count: int


@dataclass(frozen=True)
class AnswerTypeSet:
    """The merged expected-type set for one question."""

    question_id: str
    types: tuple[str, ...] = ()
    top_k: int = DEFAULT_TOP_K
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD

    def __contains__(self, type_id: str) -> bool:
        return type_id in self.types

    def __len__(self) -> int:
        return len(self.types)


def _similarity(a, b) -> float:
    # Degenerate (zero) vectors cannot admit a type, mirroring missing ones.
    try:
        return cosine(a, b)
    except ValueError:
        return float("-inf")


def count_type_frequencies(
    snapshot: "KgSnapshot", lm_candidates: Sequence["LinkedCandidate"]
) -> list[TypeFrequency]:
    """Rank types by how many distinct generated candidates carry them.

    Only candidates with a beam index belong here; neighbor-only candidates
    must not influence the expected type.  Ties break by type id.
    """
    counts: dict[str, int] = {}
    seen: set[str] = set()
    for cand in lm_candidates:
        if cand.t2t_index is None:
            raise ValueError(f"candidate {cand.entity} has no beam index")
        if cand.entity in seen:
            continue
        seen.add(cand.entity)
        for type_id in snapshot.get_types(cand.entity):
            counts[type_id] = counts.get(type_id, 0) + 1
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [TypeFrequency(type=t, count=c) for t, c in ordered]


def select_answer_types(
    freqs: Sequence[TypeFrequency],
    table: EmbeddingTable,
    snapshot: "KgSnapshot",
    k: int = DEFAULT_TOP_K,
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
    question_id: str = "",
    language: str = "en",
    stats: Optional["RunStats"] = None,
) -> AnswerTypeSet:
    """Merge the top-k most frequent types with embedding-similar ones.

    A non-top type joins when the cosine between its label embedding and any
    top-k type's label embedding exceeds ``threshold``.  Types without a
    label, or whose label has no embedding, can never join this way.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    top = [f.type for f in freqs[:k]]
    rest = [f.type for f in freqs[k:]]

    top_vectors = []
    for type_id in top:
        label = snapshot.lookup_label(type_id, language)
        if label is None:
            continue
        vector = table.get(label)
        if vector is None:
            if stats is not None:
                stats.embedding_misses += 1
            continue
        top_vectors.append(vector)

    selected = list(top)
    for type_id in rest:
        label = snapshot.lookup_label(type_id, language)
        if label is None:
            continue
        vector = table.get(label)
        if vector is None:
            if stats is not None:
                stats.embedding_misses += 1
            continue
        if any(
            _similarity(vector, top_vector) > threshold for top_vector in top_vectors
        ):
            selected.append(type_id)

    return AnswerTypeSet(
        question_id=question_id,
        types=tuple(sorted(set(selected))),
        top_k=k,
        threshold=threshold,
    )
