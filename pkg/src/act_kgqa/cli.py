"""Command-line entry points.

Subcommands: ``ingest-kg`` (build a snapshot), ``rank`` (produce
predictions), ``evaluate`` (Hit@1 report), ``ablate`` (pool-source x
score-mask grid), ``type-eval`` (expected-type quality).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .candidates_io import load_candidates, load_question_entities
from .embeddings import load_embeddings
from .errors import FormatError
from .evaluation import (
    DATASET_FORMATS,
    AblationConfig,
    evaluate_run,
    format_ablation_table,
    normalize_dataset,
    run_ablation,
    type_accuracy,
)
from .kg_store import IngestConfig, ingest_snapshot, load_snapshot
from .pipeline import (
    RankConfig,
    load_predictions,
    run_ranking,
    write_predictions,
)
from .scoring import ALL_SCORES, T2T_INVERTED, T2T_LITERAL, ScoreWeights

logger = logging.getLogger(__name__)


def _parse_weights(text: str) -> ScoreWeights:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            "weights must be four comma-separated numbers: type,neighbour,t2t,property"
        )
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    try:
        return ScoreWeights(*values)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parse_scores(text: str) -> frozenset[str]:
    names = frozenset(p.strip() for p in text.split(",") if p.strip())
    unknown = names - ALL_SCORES
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown scores: {sorted(unknown)}")
    if not names:
        raise argparse.ArgumentTypeError("at least one score required")
    return names


def _add_rank_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--top-k", type=int, default=3, help="most frequent types kept")
    parser.add_argument(
        "--sim-threshold",
        type=float,
        default=0.6,
        help="label-similarity threshold for admitting extra types",
    )
    parser.add_argument(
        "--weights",
        type=_parse_weights,
        default=ScoreWeights(),
        help="type,neighbour,t2t,property (default 1,1,1,1)",
    )
    parser.add_argument(
        "--t2t-score",
        choices=[T2T_INVERTED, T2T_LITERAL],
        default=T2T_INVERTED,
        help="beam-rank score direction",
    )
    parser.add_argument(
        "--scores",
        type=_parse_scores,
        default=ALL_SCORES,
        help="comma-separated subset of type,neighbour,t2t,property",
    )
    parser.add_argument("--language", default="en")
    parser.add_argument("--workers", type=int, default=1)


def _load_kg(args) -> object:
    if getattr(args, "kg_endpoint", None):
        from .remote import SparqlKgClient

        if not args.kg_cache:
            raise SystemExit("--kg-endpoint requires --kg-cache")
        return SparqlKgClient(
            endpoint=args.kg_endpoint, cache_dir=args.kg_cache, qps=args.kg_qps
        )
    if not args.kg:
        raise SystemExit("--kg (snapshot directory) or --kg-endpoint required")
    return load_snapshot(args.kg)


def _rank_config(args) -> RankConfig:
    return RankConfig(
        top_k=args.top_k,
        threshold=args.sim_threshold,
        weights=args.weights,
        mask=frozenset(args.scores),
        t2t_mode=args.t2t_score,
        language=args.language,
    )


def cmd_ingest_kg(args) -> int:
    config = IngestConfig(
        instance_of=args.instance_of, skip_malformed=args.skip_malformed
    )
    snapshot = ingest_snapshot(args.triples, args.labels, config)
    snapshot.save(args.out)
    n_subjects = len(snapshot.triples_by_subject)
    n_triples = sum(len(v) for v in snapshot.triples_by_subject.values())
    print(
        f"ingested {n_triples} triples over {n_subjects} subjects "
        f"({snapshot.skipped_lines} lines skipped) -> {args.out}"
    )
    return 0


def cmd_rank(args) -> int:
    snapshot = _load_kg(args)
    table = load_embeddings(args.embeddings)
    clists = load_candidates(args.candidates)
    entities = load_question_entities(args.entities) if args.entities else {}
    run = run_ranking(
        snapshot,
        table,
        clists,
        entities,
        _rank_config(args),
        workers=args.workers,
    )
    write_predictions(args.out, [r.answer for r in run.results])
    print(
        f"ranked {len(run.results)} questions -> {args.out} "
        f"(dropped {run.stats.link_dropped} unlinkable candidates, "
        f"{run.stats.embedding_misses} embedding misses)"
    )
    return 0


def cmd_evaluate(args) -> int:
    snapshot = load_snapshot(args.kg) if args.kg else None
    records = normalize_dataset(args.dataset, args.format, snapshot)
    answers = load_predictions(args.predictions)
    report = evaluate_run(records, answers, snapshot=snapshot)
    payload = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    print(f"hit@1 {report.hit_at_1:.4f} on {report.n_questions} questions")
    if not args.out:
        print(payload)
    return 0


def _load_run_inputs(args):
    snapshot = load_snapshot(args.kg)
    table = load_embeddings(args.embeddings)
    clists = load_candidates(args.candidates)
    entities = load_question_entities(args.entities) if args.entities else {}
    records = normalize_dataset(args.dataset, args.format, snapshot)
    return snapshot, table, clists, entities, records


def cmd_ablate(args) -> int:
    snapshot, table, clists, entities, records = _load_run_inputs(args)
    cells = run_ablation(
        AblationConfig(
            snapshot=snapshot,
            table=table,
            clists=clists,
            entities=entities,
            records=records,
            rank=_rank_config(args),
            workers=args.workers,
        )
    )
    table_text = format_ablation_table(cells)
    grid = [
        {"source": c.source, "mask": c.mask, "hit_at_1": c.hit_at_1} for c in cells
    ]
    if args.out:
        Path(args.out).write_text(
            json.dumps({"ablation": grid}, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    if args.table:
        Path(args.table).write_text(table_text, encoding="utf-8")
    print(table_text, end="")
    return 0


def cmd_type_eval(args) -> int:
    snapshot, table, clists, entities, records = _load_run_inputs(args)
    run = run_ranking(
        snapshot, table, clists, entities, _rank_config(args), workers=args.workers
    )
    lm_pools = {r.answer.question_id: r.lm_entities for r in run.results}
    q_frac, c_frac = type_accuracy(records, run.type_sets, lm_pools, snapshot)
    payload = json.dumps(
        {
            "n_questions": len(records),
            "type_accuracy": q_frac,
            "candidate_type_match_rate": c_frac,
        },
        indent=2,
        sort_keys=True,
    )
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    print(
        f"type accuracy {q_frac:.4f}, candidate type match rate {c_frac:.4f} "
        f"over {len(records)} questions"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="act", description="KGQA answer-candidate re-ranking"
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-kg", help="index a triples/labels file pair")
    p.add_argument("--triples", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True, help="snapshot directory to write")
    p.add_argument("--instance-of", default="P31")
    p.add_argument("--skip-malformed", action="store_true")
    p.set_defaults(func=cmd_ingest_kg)

    p = sub.add_parser("rank", help="rank candidates and write predictions")
    p.add_argument("--kg", help="snapshot directory")
    p.add_argument("--kg-endpoint", help="SPARQL endpoint URL (remote mode)")
    p.add_argument("--kg-cache", help="cache directory for remote mode")
    p.add_argument("--kg-qps", type=float, default=5.0)
    p.add_argument("--candidates", required=True)
    p.add_argument("--entities")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    _add_rank_options(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("evaluate", help="score predictions against a dataset")
    p.add_argument("--format", required=True, choices=DATASET_FORMATS)
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--kg", help="snapshot directory (gold-type statistics)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="run the pool-source x score-mask grid")
    p.add_argument("--kg", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--entities")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--format", required=True, choices=DATASET_FORMATS)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out")
    p.add_argument("--table", help="write the fixed-width grid here")
    _add_rank_options(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("type-eval", help="expected-type quality metrics")
    p.add_argument("--kg", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--entities")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--format", required=True, choices=DATASET_FORMATS)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out")
    _add_rank_options(p)
    p.set_defaults(func=cmd_type_eval)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
