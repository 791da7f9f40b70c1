from __future__ import annotations

from pathlib import Path

import pytest

from act_kgqa.kg_store import IngestConfig, ingest_snapshot

FIXTURES = Path(__file__).parent / "fixtures"


def write_kg(tmp_path: Path, triples: str, labels: str):
    """Write raw snapshot files into tmp_path and ingest them."""
    tmp_path.mkdir(parents=True, exist_ok=True)
    triples_file = tmp_path / "triples.tsv"
    labels_file = tmp_path / "labels.tsv"
    triples_file.write_text(triples, encoding="utf-8")
    labels_file.write_text(labels, encoding="utf-8")
    return ingest_snapshot(triples_file, labels_file, IngestConfig())


@pytest.fixture
def small_kg(tmp_path):
    """Hand-checkable mini graph used across the unit tests.

    Q1 has a birthplace edge and two types; Q90 is Paris with an alias;
    Q77/Q78 share the ambiguous label "Mercury".
    """
    triples = "\n".join(
        [
            "Q1\tP31\tQ5",
            "Q1\tP31\tQ215627",
            "Q1\tP19\tQ90",
            "Q90\tP31\tQ515",
            "Q77\tP31\tQ634",
            "Q78\tP31\tQ11344",
            "# comment line",
            "Q1\tP19\tQ90",  # duplicate, must collapse
        ]
    ) + "\n"
    labels = "\n".join(
        [
            "Q1\tlabel\ten\tAda Lovelace",
            "Q90\tlabel\ten\tParis",
            "Q90\talias\t-\tCity of Light",
            "Q5\tlabel\ten\thuman",
            "Q515\tlabel\ten\tcity",
            "Q77\tlabel\ten\tMercury",
            "Q78\tlabel\ten\tMercury",
            "P19\tplabel\ten\tplace of birth",
            "P31\tplabel\ten\tinstance of",
        ]
    ) + "\n"
    return write_kg(tmp_path, triples, labels)
