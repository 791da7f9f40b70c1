"""Shared file helpers: question input parsing and atomic output writes."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Union


def load_questions(file: Union[str, Path]) -> list[tuple[str, str]]:
    """Read a questions JSONL file into (question_id, question_text) pairs.

    Order is preserved; blank lines are skipped; a repeated question id is
    an error because every downstream artifact requires unique ids.
    """
    path = Path(file)
    out: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise ValueError(f"{path}:{lineno}: expected a JSON object")
            qid = record.get("question_id")
            text = record.get("question_text")
            if not isinstance(qid, str) or not qid:
                raise ValueError(f"{path}:{lineno}: missing or empty question_id")
            if not isinstance(text, str):
                raise ValueError(f"{path}:{lineno}: missing question_text")
            if qid in seen:
                raise ValueError(f"{path}:{lineno}: duplicate question_id {qid!r}")
            seen.add(qid)
            out.append((qid, text))
    return out


def write_text_atomic(file: Union[str, Path], text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a
    half-written artifact."""
    path = Path(file)
    fd, tmp_name = tempfile.mkstemp(
        prefix=path.name + ".", suffix=".tmp", dir=path.parent or Path(".")
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def write_jsonl_atomic(file: Union[str, Path], records: list[dict]) -> None:
    text = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)
    write_text_atomic(file, text)
