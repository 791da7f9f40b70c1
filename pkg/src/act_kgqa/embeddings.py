"""Sentence-embedding table and cosine similarity.

Embeddings are produced externally and consumed here as opaque vectors keyed
by exact strings (type labels, property labels, full question texts).  The
table never runs a model; this keeps ranking runs reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import FormatError

HEADER_PREFIX = "#dim "


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable key -> vector store with a single shared dimension."""

    dimension: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def __contains__(self, key: str) -> bool:
        return key in self.vectors

    def get(self, key: str) -> Optional[np.ndarray]:
        return self.vectors.get(key)

    def __len__(self) -> int:
        return len(self.vectors)


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine similarity, clamped to [-1, 1] against float rounding.

    Raises ValueError for mismatched dimensions or a zero vector, where the
    quantity is undefined.
    """
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    norm_a = float(np.linalg.norm(va))
    norm_b = float(np.linalg.norm(vb))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("undefined cosine for zero vector")
    value = float(np.dot(va, vb)) / (norm_a * norm_b)
    return max(-1.0, min(1.0, value))


def similarity_or_zero(table: EmbeddingTable, key_a: str, key_b: str) -> float:
    """Total wrapper over :func:`cosine`: 0.0 on any missing/degenerate input.

    Never raises and never returns NaN, so callers can score arbitrary KG
    labels without guarding.
    """
    va = table.get(key_a)
    vb = table.get(key_b)
    if va is None or vb is None:
        return 0.0
    try:
        return cosine(va, vb)
    except ValueError:
        return 0.0


def load_embeddings(file: Union[str, Path]) -> EmbeddingTable:
    """Parse an embeddings file.

    Format: header line ``#dim <d>``, then ``key<TAB>v1,v2,...,vd`` rows.
    A file with no content at all yields a valid empty table of dimension 0.
    """
    path = Path(file)
    dimension: Optional[int] = None
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            if dimension is None:
                if not line.startswith(HEADER_PREFIX):
                    raise FormatError(path, lineno, f"expected {HEADER_PREFIX!r} header")
                try:
                    dimension = int(line[len(HEADER_PREFIX):].strip())
                except ValueError as exc:
                    raise FormatError(path, lineno, "invalid dimension") from exc
                if dimension < 0:
                    raise FormatError(path, lineno, "dimension must be >= 0")
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise FormatError(path, lineno, "expected key<TAB>components")
            key, components = fields
            if key in vectors:
                raise FormatError(path, lineno, f"duplicate key {key!r}")
            try:
                values = [float(v) for v in components.split(",")]
            except ValueError as exc:
                raise FormatError(path, lineno, "non-numeric component") from exc
            if len(values) != dimension:
                raise FormatError(
                    path,
                    lineno,
                    f"dimension mismatch: expected {dimension}, got {len(values)}",
                )
            if not all(math.isfinite(v) for v in values):
                raise FormatError(path, lineno, "non-finite component")
            vectors[key] = np.asarray(values, dtype=np.float64)
    return EmbeddingTable(dimension=dimension or 0, vectors=vectors)


def save_embeddings(
    file: Union[str, Path], dimension: int, vectors: dict[str, Sequence[float]]
) -> None:
    """Write a table in the load format (floats at full round-trip precision)."""
    path = Path(file)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{HEADER_PREFIX}{dimension}\n")
        for key in vectors:
            components = ",".join(repr(float(v)) for v in vectors[key])
            handle.write(f"{key}\t{components}\n")
