"""Dataset normalization, Hit@1, type accuracy, and the ablation grid.

Normalizers map heterogeneous benchmark files to a common record shape;
the metrics are deliberately small and auditable: one pass, exact counts,
no weighting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from .candidates_io import CandidateList, QuestionEntities
from .answer_typing import AnswerTypeSet
from .embeddings import EmbeddingTable
from .errors import FormatError
from .kg_store import KgSnapshot
from .pipeline import (
    POOL_SOURCES,
    RankConfig,
    RunStats,
    run_ranking,
)
from .scoring import (
    ALL_SCORES,
    SCORE_NEIGHBOUR,
    SCORE_PROPERTY,
    SCORE_T2T,
    SCORE_TYPE,
    RankedAnswer,
)

FORMAT_SQWD = "sqwd-tsv"
FORMAT_RUBQ = "rubq-json"
FORMAT_MINTAKA = "mintaka-json"
FORMAT_GENERIC = "generic-jsonl"
DATASET_FORMATS = (FORMAT_SQWD, FORMAT_RUBQ, FORMAT_MINTAKA, FORMAT_GENERIC)

MASK_NAMES = (SCORE_TYPE, SCORE_NEIGHBOUR, SCORE_T2T, SCORE_PROPERTY, "all")

_WIKIDATA_URI_PREFIXES = (
    "http://www.wikidata.org/entity/",
    "https://www.wikidata.org/entity/",
)


@dataclass(frozen=True)
class EvalRecord:
    """One benchmark question in normalized form."""

    question_id: str
    question_text: str
    gold_answers: tuple[str, ...]
    question_entities: tuple[str, ...] = ()
    gold_property: Optional[str] = None

    def __post_init__(self):
        if not self.gold_answers:
            raise ValueError("gold_answers must be non-empty")


@dataclass
class EvalReport:
    """Metrics for one evaluation run."""

    n_questions: int
    correct: int
    hit_at_1: float
    per_question: list[tuple[str, bool]]
    type_accuracy: Optional[float] = None
    candidate_type_match_rate: Optional[float] = None
    link_drop_count: int = 0
    embedding_miss_count: int = 0
    gold_missing_count: int = 0

    def to_dict(self) -> dict:
        return {
            "n_questions": self.n_questions,
            "correct": self.correct,
            "hit_at_1": self.hit_at_1,
            "type_accuracy": self.type_accuracy,
            "candidate_type_match_rate": self.candidate_type_match_rate,
            "link_drop_count": self.link_drop_count,
            "embedding_miss_count": self.embedding_miss_count,
            "gold_missing_count": self.gold_missing_count,
            "per_question": [
                {"question_id": qid, "correct": ok} for qid, ok in self.per_question
            ],
        }


def _strip_uri(value: str) -> str:
    for prefix in _WIKIDATA_URI_PREFIXES:
        if value.startswith(prefix):
            return value[len(prefix):]
    return value


def _normalize_sqwd(path: Path) -> list[EvalRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        row = -1
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4 or not all(fields[:3]):
                raise FormatError(
                    path, lineno, "expected subject<TAB>property<TAB>object<TAB>question"
                )
            row += 1
            subject, prop, obj, question = fields
            records.append(
                EvalRecord(
                    question_id=f"sqwd-{row}",
                    question_text=question,
                    gold_answers=(obj,),
                    question_entities=(subject,),
                    gold_property=prop,
                )
            )
    return records


def _answer_ids(raw_answers, path, context) -> tuple[str, ...]:
    ids = []
    for answer in raw_answers:
        if isinstance(answer, str):
            ids.append(_strip_uri(answer))
        elif isinstance(answer, dict) and isinstance(answer.get("value"), str):
            ids.append(_strip_uri(answer["value"]))
        else:
            raise FormatError(path, context, "unrecognized answer entry")
    # preserve order, drop repeats
    seen: set[str] = set()
    out = []
    for i in ids:
        if i not in seen:
            seen.add(i)
            out.append(i)
    return tuple(out)


def _normalize_rubq(path: Path) -> list[EvalRecord]:
    with open(path, encoding="utf-8") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(path, 0, f"invalid JSON: {exc}") from exc
    if isinstance(document, dict):
        document = document.get("questions", [])
    records = []
    for index, item in enumerate(document):
        if not isinstance(item, dict):
            raise FormatError(path, index, "expected an object per question")
        uid = item.get("uid", index)
        text = item.get("question_eng") or item.get("question_text") or ""
        answers = _answer_ids(item.get("answers", []), path, index)
        if not answers:
            raise FormatError(path, index, "question without answers")
        entities = tuple(
            _strip_uri(e) for e in item.get("question_uris", item.get("entities", []))
        )
        records.append(
            EvalRecord(
                question_id=str(uid),
                question_text=text,
                gold_answers=answers,
                question_entities=entities,
            )
        )
    return records


def _normalize_mintaka(
    path: Path, snapshot: Optional[KgSnapshot]
) -> list[EvalRecord]:
    with open(path, encoding="utf-8") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(path, 0, f"invalid JSON: {exc}") from exc
    records = []
    for index, item in enumerate(document):
        if not isinstance(item, dict):
            raise FormatError(path, index, "expected an object per question")
        answer_block = item.get("answer", {})
        raw_answers = answer_block.get("answer") or []
        answers = tuple(
            _strip_uri(a["name"]) if isinstance(a, dict) else _strip_uri(a)
            for a in raw_answers
            if (isinstance(a, dict) and isinstance(a.get("name"), str))
            or isinstance(a, str)
        )
        if not answers:
            continue  # non-entity answers cannot be ranked
        entities = tuple(
            e["name"]
            for e in item.get("questionEntity", [])
            if isinstance(e, dict)
            and e.get("entityType") == "entity"
            and isinstance(e.get("name"), str)
        )
        records.append(
            EvalRecord(
                question_id=str(item.get("id", index)),
                question_text=item.get("question", ""),
                gold_answers=answers,
                question_entities=entities,
            )
        )
    if snapshot is not None:
        records = [r for r in records if _one_hop_reachable(r, snapshot)]
    return records


def _one_hop_reachable(record: EvalRecord, snapshot: KgSnapshot) -> bool:
    gold = set(record.gold_answers)
    for entity in record.question_entities:
        for _prop, obj in snapshot.get_forward_neighbors(entity):
            if obj in gold:
                return True
    return False


def _normalize_generic(path: Path) -> list[EvalRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                item = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(path, lineno, f"invalid JSON: {exc}") from exc
            question_id = item.get("question_id")
            answers = item.get("answers")
            if not isinstance(question_id, str) or not isinstance(answers, list):
                raise FormatError(path, lineno, "need question_id and answers")
            if not answers:
                raise FormatError(path, lineno, "question without answers")
            records.append(
                EvalRecord(
                    question_id=question_id,
                    question_text=item.get("question_text", ""),
                    gold_answers=tuple(answers),
                    question_entities=tuple(item.get("entities", [])),
                    gold_property=item.get("property"),
                )
            )
    return records


def normalize_dataset(
    file: Union[str, Path],
    format: str,
    snapshot: Optional[KgSnapshot] = None,
) -> list[EvalRecord]:
    """Normalize a benchmark file into records, in file order.

    The snapshot argument only matters for the one-hop filter applied to
    mintaka files.
    """
    path = Path(file)
    if format == FORMAT_SQWD:
        return _normalize_sqwd(path)
    if format == FORMAT_RUBQ:
        return _normalize_rubq(path)
    if format == FORMAT_MINTAKA:
        return _normalize_mintaka(path, snapshot)
    if format == FORMAT_GENERIC:
        return _normalize_generic(path)
    raise ValueError(f"unknown dataset format {format!r}")


def hit_at_1(
    records: Sequence[EvalRecord],
    answers: Mapping[str, RankedAnswer],
) -> EvalReport:
    """Exact fraction of questions whose top answer is a gold answer.

    Questions without a ranked answer (or with an empty ranking) count as
    incorrect; they stay in the denominator.
    """
    per_question = []
    correct = 0
    for record in records:
        answer = answers.get(record.question_id)
        top = answer.top if answer is not None else None
        ok = top is not None and top in record.gold_answers
        correct += int(ok)
        per_question.append((record.question_id, ok))
    n = len(records)
    return EvalReport(
        n_questions=n,
        correct=correct,
        hit_at_1=correct / n if n else 0.0,
        per_question=per_question,
    )


def gold_types(record: EvalRecord, snapshot: KgSnapshot) -> set[str]:
    """Union of instance-of types over the record's gold answers."""
    out: set[str] = set()
    for gold in record.gold_answers:
        out.update(snapshot.get_types(gold))
    return out


def type_accuracy(
    records: Sequence[EvalRecord],
    type_sets: Mapping[str, AnswerTypeSet],
    lm_pools: Mapping[str, Sequence[str]],
    snapshot: KgSnapshot,
) -> tuple[float, float]:
    """(question-level, candidate-level) type-match fractions.

    First: share of questions whose expected-type set intersects the gold
    answer's types (untyped golds are misses).  Second: share of generated
    candidates, over all questions, whose own types intersect the gold
    answer's types.  ``lm_pools`` maps each question to its linked generated
    candidate entities.
    """
    question_hits = 0
    candidate_total = 0
    candidate_hits = 0
    for record in records:
        gold = gold_types(record, snapshot)
        expected = type_sets.get(record.question_id)
        if expected is not None and gold and set(expected.types) & gold:
            question_hits += 1
        for entity in lm_pools.get(record.question_id, ()):
            candidate_total += 1
            if gold and set(snapshot.get_types(entity)) & gold:
                candidate_hits += 1
    question_fraction = question_hits / len(records) if records else 0.0
    candidate_fraction = candidate_hits / candidate_total if candidate_total else 0.0
    return question_fraction, candidate_fraction


# -- ablation grid -------------------------------------------------------


@dataclass
class AblationConfig:
    """Inputs for the 3 sources x 5 masks grid."""

    snapshot: KgSnapshot
    table: EmbeddingTable
    clists: Sequence[CandidateList]
    entities: Mapping[str, QuestionEntities]
    records: Sequence[EvalRecord]
    rank: RankConfig = field(default_factory=RankConfig)
    workers: int = 1


@dataclass(frozen=True)
class AblationCell:
    source: str
    mask: str
    hit_at_1: float


def run_ablation(config: AblationConfig) -> list[AblationCell]:
    """Hit@1 for every (pool source, score mask) combination.

    The expected-type set always comes from the generated candidates, no
    matter which pool source a cell ranks over.
    """
    cells = []
    for source in POOL_SOURCES:
        for mask_name in MASK_NAMES:
            mask = ALL_SCORES if mask_name == "all" else frozenset({mask_name})
            cell_config = RankConfig(
                top_k=config.rank.top_k,
                threshold=config.rank.threshold,
                weights=config.rank.weights,
                mask=mask,
                t2t_mode=config.rank.t2t_mode,
                language=config.rank.language,
            )
            run = run_ranking(
                config.snapshot,
                config.table,
                config.clists,
                config.entities,
                cell_config,
                source=source,
                workers=config.workers,
            )
            report = hit_at_1(config.records, run.answers)
            cells.append(
                AblationCell(source=source, mask=mask_name, hit_at_1=report.hit_at_1)
            )
    return cells


_SOURCE_TITLES = {
    "t2t": "generated candidates only",
    "neighbours": "question neighbours only",
    "full": "full candidate set",
}


def format_ablation_table(cells: Sequence[AblationCell]) -> str:
    """Fixed-width text grid: one row per pool source, one column per mask."""
    by_key = {(c.source, c.mask): c.hit_at_1 for c in cells}
    header = f"{'pool source':<28}" + "".join(f"{m:>12}" for m in MASK_NAMES)
    lines = [header, "-" * len(header)]
    for source in POOL_SOURCES:
        row = f"{_SOURCE_TITLES[source]:<28}"
        for mask in MASK_NAMES:
            row += f"{by_key[(source, mask)]*100:>12.2f}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def evaluate_run(
    records: Sequence[EvalRecord],
    answers: Mapping[str, RankedAnswer],
    snapshot: Optional[KgSnapshot] = None,
    type_sets: Optional[Mapping[str, AnswerTypeSet]] = None,
    lm_pools: Optional[Mapping[str, Sequence[str]]] = None,
    stats: Optional[RunStats] = None,
) -> EvalReport:
    """Full report: Hit@1 plus whatever optional signals are available."""
    report = hit_at_1(records, answers)
    if snapshot is not None:
        report.gold_missing_count = sum(
            1
            for record in records
            if not any(snapshot.knows(g) for g in record.gold_answers)
        )
        if type_sets is not None and lm_pools is not None:
            q_frac, c_frac = type_accuracy(records, type_sets, lm_pools, snapshot)
            report.type_accuracy = q_frac
            report.candidate_type_match_rate = c_frac
    if stats is not None:
        report.link_drop_count = stats.link_dropped
        report.embedding_miss_count = stats.embedding_misses
    return report
