"""Embedding table export from a sentence-encoder checkpoint.

The output format is the engine's: a ``#dim d`` header, then one
``key<TAB>v1,v2,...`` row per distinct input string, components at full
round-trip precision.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Union

from .io_utils import write_text_atomic

logger = logging.getLogger(__name__)


def read_keys(file: Union[str, Path]) -> list[str]:
    """One key per line, order kept, duplicates collapsed to the first.

    Tabs cannot appear in keys (they delimit the output rows), and a blank
    line is not a key.
    """
    path = Path(file)
    out: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            key = raw.rstrip("\n").rstrip("\r")
            if not key.strip():
                continue
            if "\t" in key:
                raise ValueError(f"{path}:{lineno}: key contains a tab")
            if key not in seen:
                seen.add(key)
                out.append(key)
    return out


def export_embeddings(
    keys_file: Union[str, Path],
    model_name: str,
    out_file: Union[str, Path],
    batch_size: int = 32,
) -> tuple[int, int]:
    """Encode every distinct key; returns (rows written, dimension)."""
    from sentence_transformers import SentenceTransformer

    keys = read_keys(keys_file)
    model = SentenceTransformer(model_name)
    if hasattr(model, "get_embedding_dimension"):
        dimension = model.get_embedding_dimension()
    else:  # accessor name before the rename
        dimension = model.get_sentence_embedding_dimension()

    lines = [f"#dim {dimension}"]
    if keys:
        vectors = model.encode(
            keys,
            batch_size=batch_size,
            convert_to_numpy=True,
            show_progress_bar=False,
        )
        for key, row in zip(keys, vectors):
            components = ",".join(repr(float(v)) for v in row)
            lines.append(f"{key}\t{components}")
    write_text_atomic(out_file, "\n".join(lines) + "\n")
    return len(keys), dimension
