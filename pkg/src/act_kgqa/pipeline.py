"""Per-question ranking orchestration.

Glues the loaders, linker, type aggregation, and scorer into a single run:
link the generated candidates, expand with question-entity neighbors,
aggregate expected types, score, rank.  Questions are independent, so runs
can fan out over worker threads; results are merged in input order, which
keeps output files byte-identical for any worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from .answer_typing import (
    DEFAULT_SIMILARITY_THRESHOLD,
    DEFAULT_TOP_K,
    AnswerTypeSet,
    count_type_frequencies,
    select_answer_types,
)
from .candidates_io import CandidateList, QuestionEntities
from .embeddings import EmbeddingTable
from .errors import FormatError
from .kg_store import KgSnapshot
from .linking import (
    CandidatePool,
    expand_with_neighbors,
    link_candidates,
    pool_from_linked,
)
from .scoring import (
    ALL_SCORES,
    T2T_INVERTED,
    RankedAnswer,
    ScoredCandidate,
    ScoreWeights,
    rank_candidates,
)

SOURCE_T2T = "t2t"
SOURCE_NEIGHBOURS = "neighbours"
SOURCE_FULL = "full"
POOL_SOURCES = (SOURCE_T2T, SOURCE_NEIGHBOURS, SOURCE_FULL)


@dataclass
class RunStats:
    """Counters accumulated over a run; merged deterministically."""

    link_dropped: int = 0
    embedding_misses: int = 0

    def merge(self, other: "RunStats") -> None:
        self.link_dropped += other.link_dropped
        self.embedding_misses += other.embedding_misses


@dataclass(frozen=True)
class RankConfig:
    """Everything that parametrizes a ranking run."""

    top_k: int = DEFAULT_TOP_K
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    weights: ScoreWeights = field(default_factory=ScoreWeights)
    mask: frozenset[str] = ALL_SCORES
    t2t_mode: str = T2T_INVERTED
    language: str = "en"


@dataclass(frozen=True)
class QuestionResult:
    """Everything computed for one question."""

    answer: RankedAnswer
    type_set: AnswerTypeSet
    pool: CandidatePool
    lm_entities: tuple[str, ...]
    stats: RunStats


def restrict_pool(pool: CandidatePool, source: str) -> CandidatePool:
    """Filter pool membership by candidate provenance.

    Candidates keep all their signal fields (beam index, connecting
    properties); only membership changes.  The full source is the union of
    the other two.
    """
    if source == SOURCE_FULL:
        return pool
    if source == SOURCE_T2T:
        kept = tuple(c for c in pool.linked if c.from_t2t)
    elif source == SOURCE_NEIGHBOURS:
        kept = tuple(c for c in pool.linked if c.is_neighbor)
    else:
        raise ValueError(f"unknown pool source {source!r}")
    return CandidatePool(question_id=pool.question_id, linked=kept)


def rank_question(
    snapshot: KgSnapshot,
    table: EmbeddingTable,
    clist: CandidateList,
    qents: Optional[QuestionEntities],
    config: RankConfig = RankConfig(),
    source: str = SOURCE_FULL,
) -> QuestionResult:
    """Run the whole pipeline for a single question."""
    stats = RunStats()
    linked = link_candidates(snapshot, clist, stats)
    pool = pool_from_linked(clist.question_id, linked)
    if qents is None:
        qents = QuestionEntities(question_id=clist.question_id)
    pool = expand_with_neighbors(snapshot, pool, qents)

    freqs = count_type_frequencies(snapshot, linked)
    type_set = select_answer_types(
        freqs,
        table,
        snapshot,
        k=config.top_k,
        threshold=config.threshold,
        question_id=clist.question_id,
        language=config.language,
        stats=stats,
    )
    answer = rank_candidates(
        restrict_pool(pool, source),
        type_set,
        clist,
        clist.question_text,
        snapshot,
        table,
        weights=config.weights,
        mask=config.mask,
        t2t_mode=config.t2t_mode,
        stats=stats,
    )
    return QuestionResult(
        answer=answer,
        type_set=type_set,
        pool=pool,
        lm_entities=tuple(c.entity for c in linked),
        stats=stats,
    )


@dataclass
class RankRun:
    """Aggregated results of a multi-question run, in input order."""

    results: list[QuestionResult]
    stats: RunStats

    @property
    def answers(self) -> dict[str, RankedAnswer]:
        return {r.answer.question_id: r.answer for r in self.results}

    @property
    def type_sets(self) -> dict[str, AnswerTypeSet]:
        return {r.type_set.question_id: r.type_set for r in self.results}

    @property
    def pools(self) -> dict[str, CandidatePool]:
        return {r.pool.question_id: r.pool for r in self.results}


def run_ranking(
    snapshot: KgSnapshot,
    table: EmbeddingTable,
    clists: Sequence[CandidateList],
    entities: Mapping[str, QuestionEntities],
    config: RankConfig = RankConfig(),
    source: str = SOURCE_FULL,
    workers: int = 1,
) -> RankRun:
    """Rank every question, optionally across worker threads.

    The per-question computation is pure, so the merged result does not
    depend on the worker count.
    """

    def one(clist: CandidateList) -> QuestionResult:
        return rank_question(
            snapshot, table, clist, entities.get(clist.question_id), config, source
        )

    if workers <= 1:
        results = [one(clist) for clist in clists]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(one, clists))

    stats = RunStats()
    for result in results:
        stats.merge(result.stats)
    return RankRun(results=results, stats=stats)


# -- predictions file ----------------------------------------------------


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def prediction_line(answer: RankedAnswer) -> str:
    """One predictions-JSONL line with floats fixed at 6 decimal places."""
    entries = []
    for s in answer.ranking:
        entries.append(
            '{"entity": %s, "s_type": %s, "s_neighbour": %s, "s_t2t": %s, '
            '"s_property": %s, "s_final": %s}'
            % (
                json.dumps(s.entity),
                _fmt(s.s_type),
                _fmt(s.s_neighbour),
                _fmt(s.s_t2t),
                _fmt(s.s_property),
                _fmt(s.s_final),
            )
        )
    return '{"question_id": %s, "top": %s, "ranking": [%s]}' % (
        json.dumps(answer.question_id),
        json.dumps(answer.top),
        ", ".join(entries),
    )


def write_predictions(
    file: Union[str, Path], answers: Sequence[RankedAnswer]
) -> None:
    path = Path(file)
    with open(path, "w", encoding="utf-8") as handle:
        for answer in answers:
            handle.write(prediction_line(answer) + "\n")


def load_predictions(file: Union[str, Path]) -> dict[str, RankedAnswer]:
    """Read a predictions file back into ranked answers keyed by question."""
    path = Path(file)
    out: dict[str, RankedAnswer] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(path, lineno, f"invalid JSON: {exc}") from exc
            question_id = record.get("question_id")
            if not isinstance(question_id, str):
                raise FormatError(path, lineno, "missing question_id")
            if question_id in out:
                raise FormatError(
                    path, lineno, f"duplicate question_id {question_id!r}"
                )
            ranking = tuple(
                ScoredCandidate(
                    entity=e["entity"],
                    s_type=float(e["s_type"]),
                    s_neighbour=float(e["s_neighbour"]),
                    s_t2t=float(e["s_t2t"]),
                    s_property=float(e["s_property"]),
                    s_final=float(e["s_final"]),
                )
                for e in record.get("ranking", ())
            )
            out[question_id] = RankedAnswer(question_id=question_id, ranking=ranking)
    return out
