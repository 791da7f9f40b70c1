"""Command line entry points for the three artifact producers."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .embedding import export_embeddings
from .entity_linking import link_questions
from .generation import GenerationConfig, generate_candidates


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="act-adapter",
        description="Produce candidate, embedding, and entity files for the ranking engine.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("candidates", help="generate ranked candidate lists")
    gen.add_argument("--questions", required=True, help="questions JSONL file")
    gen.add_argument("--model", required=True, help="seq2seq checkpoint path or name")
    gen.add_argument("--out", required=True, help="output candidates JSONL file")
    gen.add_argument("--beams", type=int, default=200)
    gen.add_argument("--diversity-penalty", type=float, default=0.1)
    gen.add_argument("--max-new-tokens", type=int, default=32)
    gen.add_argument("--language", default="en")

    emb = sub.add_parser("embeddings", help="export an embedding table")
    emb.add_argument("--keys", required=True, help="one key string per line")
    emb.add_argument("--model", required=True, help="sentence encoder path or name")
    emb.add_argument("--out", required=True, help="output embeddings file")
    emb.add_argument("--batch-size", type=int, default=32)

    ent = sub.add_parser("entities", help="link question entities by dictionary")
    ent.add_argument("--questions", required=True, help="questions JSONL file")
    ent.add_argument("--labels", required=True, help="labels TSV export")
    ent.add_argument("--out", required=True, help="output entities JSONL file")

    return parser


def run(args: argparse.Namespace) -> None:
    if args.command == "candidates":
        config = GenerationConfig(
            model_name=args.model,
            beams=args.beams,
            diversity_penalty=args.diversity_penalty,
            max_new_tokens=args.max_new_tokens,
            language=args.language,
        )
        written, skipped = generate_candidates(args.questions, config, args.out)
        print(f"generated candidates for {written} questions -> {args.out} "
              f"({skipped} skipped)")
    elif args.command == "embeddings":
        rows, dimension = export_embeddings(
            args.keys, args.model, args.out, batch_size=args.batch_size
        )
        print(f"embedded {rows} keys at dimension {dimension} -> {args.out}")
    elif args.command == "entities":
        written = link_questions(args.questions, args.labels, args.out)
        print(f"linked {written} questions -> {args.out}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
