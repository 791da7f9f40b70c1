"""Four-component candidate scoring and ranking.

Each pool candidate gets a type score (overlap with the expected-type set),
a neighbor score (is it one hop from a question entity), a beam-rank score,
and a question-property similarity score.  The final score is the weighted
sum; the highest-scoring entity is the answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, AbstractSet, Iterable, Optional

from .answer_typing import AnswerTypeSet
from .embeddings import EmbeddingTable, similarity_or_zero
from .linking import CandidatePool, LinkedCandidate

if TYPE_CHECKING:
    from .candidates_io import CandidateList
    from .kg_store import KgSnapshot
    from .pipeline import RunStats

T2T_INVERTED = "inverted"
T2T_LITERAL = "literal"

SCORE_TYPE = "type"
SCORE_NEIGHBOUR = "neighbour"
SCORE_T2T = "t2t"
SCORE_PROPERTY = "property"
ALL_SCORES = frozenset({SCORE_TYPE, SCORE_NEIGHBOUR, SCORE_T2T, SCORE_PROPERTY})


@dataclass(frozen=True)
class ScoreWeights:
    """Non-negative weights for the final sum; defaults match the plain sum."""

    w_type: float = 1.0
    w_neighbour: float = 1.0
    w_t2t: float = 1.0
    w_property: float = 1.0

    def __post_init__(self):
        values = (self.w_type, self.w_neighbour, self.w_t2t, self.w_property)
        if not all(math.isfinite(w) for w in values):
            raise ValueError("weights must be finite")
        if any(w < 0 for w in values):
            raise ValueError("weights must be non-negative")
        if not any(w > 0 for w in values):
            raise ValueError("at least one weight must be positive")

    def scaled(self, factor: float) -> "ScoreWeights":
        return ScoreWeights(
            self.w_type * factor,
            self.w_neighbour * factor,
            self.w_t2t * factor,
            self.w_property * factor,
        )


@dataclass(frozen=True)
class ScoredCandidate:
    entity: str
    s_type: float
    s_neighbour: float
    s_t2t: float
    s_property: float
    s_final: float


@dataclass(frozen=True)
class RankedAnswer:
    """Full ranking for one question; ``top`` is the selected answer."""

    question_id: str
    ranking: tuple[ScoredCandidate, ...] = ()

    @property
    def top(self) -> Optional[str]:
        return self.ranking[0].entity if self.ranking else None


def score_type(candidate_types: Iterable[str], type_set: AnswerTypeSet) -> float:
    """Share of the expected-type set covered by the candidate's types.

    0.0 when the expected set is empty (nothing to intersect with).
    """
    if not type_set.types:
        return 0.0
    expected = set(type_set.types)
    overlap = sum(1 for t in set(candidate_types) if t in expected)
    return overlap / len(expected)


def score_neighbour(candidate: LinkedCandidate) -> float:
    """1.0 iff the candidate is a forward one-hop neighbor of a question entity."""
    return 1.0 if candidate.via_properties else 0.0


def score_t2t(
    candidate: LinkedCandidate, c_size: int, mode: str = T2T_INVERTED
) -> float:
    """Beam-rank score; 0.0 for candidates the generator never produced.

    The default gives the top beam the maximum score (beam order is a
    quality signal).  ``literal`` keeps the raw index/size ratio for fidelity
    experiments.
    """
    if c_size < 1:
        raise ValueError("c_size must be >= 1")
    if candidate.t2t_index is None:
        return 0.0
    if mode == T2T_INVERTED:
        return (c_size - candidate.t2t_index) / c_size
    if mode == T2T_LITERAL:
        return candidate.t2t_index / c_size
    raise ValueError(f"unknown t2t score mode {mode!r}")


def score_property(
    candidate: LinkedCandidate,
    question_text: str,
    snapshot: "KgSnapshot",
    table: EmbeddingTable,
    stats: Optional["RunStats"] = None,
) -> float:
    """Best question similarity over the properties connecting the candidate.

    Each connecting property contributes the cosine between its label
    embedding and the question embedding; missing labels or embeddings
    contribute 0.0.  Non-neighbors score 0.0.
    """
    if not candidate.via_properties:
        return 0.0
    best = None
    for prop in candidate.via_properties:
        label = snapshot.property_label(prop)
        if label is None:
            value = 0.0
        else:
            if stats is not None:
                if label not in table or question_text not in table:
                    stats.embedding_misses += 1
            value = similarity_or_zero(table, label, question_text)
        best = value if best is None else max(best, value)
    return best if best is not None else 0.0


def rank_candidates(
    pool: CandidatePool,
    type_set: AnswerTypeSet,
    clist: "CandidateList",
    question_text: str,
    snapshot: "KgSnapshot",
    table: EmbeddingTable,
    weights: ScoreWeights = ScoreWeights(),
    mask: AbstractSet[str] = ALL_SCORES,
    t2t_mode: str = T2T_INVERTED,
    stats: Optional["RunStats"] = None,
) -> RankedAnswer:
    """Score every pool candidate and sort by final score.

    Components absent from ``mask`` are recorded as 0.0 and contribute
    nothing.  The sort compares the weighted sum in exact rational
    arithmetic: candidates whose floating-point finals collide still order
    by true value, and rescaling all weights by a positive factor cannot
    reorder them.  Candidates with identical components tie exactly and
    break by entity id, so the ranking is deterministic and independent of
    pool input order.
    """
    unknown = mask - ALL_SCORES
    if unknown:
        raise ValueError(f"unknown score names: {sorted(unknown)}")
    c_size = len(clist.candidates)
    exact_finals: dict[str, Fraction] = {}
    scored = []
    for cand in pool.linked:
        s_type = (
            score_type(snapshot.get_types(cand.entity), type_set)
            if SCORE_TYPE in mask
            else 0.0
        )
        s_neighbour = score_neighbour(cand) if SCORE_NEIGHBOUR in mask else 0.0
        s_t2t = score_t2t(cand, c_size, t2t_mode) if SCORE_T2T in mask else 0.0
        s_property = (
            score_property(cand, question_text, snapshot, table, stats)
            if SCORE_PROPERTY in mask
            else 0.0
        )
        s_final = (
            weights.w_type * s_type
            + weights.w_neighbour * s_neighbour
            + weights.w_t2t * s_t2t
            + weights.w_property * s_property
        )
        exact_finals[cand.entity] = (
            Fraction(weights.w_type) * Fraction(s_type)
            + Fraction(weights.w_neighbour) * Fraction(s_neighbour)
            + Fraction(weights.w_t2t) * Fraction(s_t2t)
            + Fraction(weights.w_property) * Fraction(s_property)
        )
        scored.append(
            ScoredCandidate(
                entity=cand.entity,
                s_type=s_type,
                s_neighbour=s_neighbour,
                s_t2t=s_t2t,
                s_property=s_property,
                s_final=s_final,
            )
        )
    scored.sort(key=lambda s: (-exact_finals[s.entity], s.entity))
    return RankedAnswer(question_id=pool.question_id, ranking=tuple(scored))
