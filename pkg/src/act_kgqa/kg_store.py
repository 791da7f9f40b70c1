"""Offline knowledge-graph snapshot: ingestion and lookups.

A snapshot is an indexed, immutable triple store loaded from two flat files
(triples and labels).  It serves the three lookups the ranking pipeline
needs: instance-of types, forward one-hop neighbors, and label resolution.
All indices are kept in sorted order so every downstream ranking is
deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .errors import FormatError
from .linking import normalize_label

logger = logging.getLogger(__name__)

DEFAULT_INSTANCE_OF = "P31"

LABEL_KIND_LABEL = "label"
LABEL_KIND_ALIAS = "alias"
LABEL_KIND_PROPERTY = "plabel"
_LABEL_KINDS = frozenset({LABEL_KIND_LABEL, LABEL_KIND_ALIAS, LABEL_KIND_PROPERTY})


def _check_id(token: str) -> bool:
    """Ids must be non-empty and contain no whitespace."""
    return bool(token) and not any(ch.isspace() for ch in token)


@dataclass(frozen=True)
class IngestConfig:
    """Knobs for snapshot ingestion.

    ``instance_of`` is the property whose objects populate the types index
    (P31 for Wikidata-style graphs).  With ``skip_malformed`` set, bad lines
    are counted and skipped instead of aborting the ingest.
    """

    instance_of: str = DEFAULT_INSTANCE_OF
    skip_malformed: bool = False


@dataclass(frozen=True)
class KgSnapshot:
    """Immutable indexed view of a KG subset.

    Safe to share across threads; every collection is a sorted tuple.
    """

    triples_by_subject: dict[str, tuple[tuple[str, str], ...]]
    types_index: dict[str, tuple[str, ...]]
    labels: dict[tuple[str, str], str]
    aliases: dict[str, tuple[str, ...]]
    label_index: dict[str, tuple[str, ...]]
    property_labels: dict[str, str]
    instance_of: str = DEFAULT_INSTANCE_OF
    known_entities: frozenset[str] = frozenset()
    skipped_lines: int = field(default=0, compare=False)

    # -- lookups ---------------------------------------------------------

    def knows(self, entity: str) -> bool:
        """Whether the entity occurs anywhere in the snapshot."""
        return entity in self.known_entities

    def get_types(self, entity: str) -> tuple[str, ...]:
        """Instance-of types of ``entity``; empty for unknown entities."""
        return self.types_index.get(entity, ())

    def get_forward_neighbors(self, entity: str) -> tuple[tuple[str, str], ...]:
        """All outgoing ``(property, object)`` edges, instance-of included."""
        return self.triples_by_subject.get(entity, ())

    def lookup_label(self, entity: str, language: str = "en") -> Optional[str]:
        """Primary label for ``(entity, language)``, falling back to English.

        Aliases are deliberately not consulted.
        """
        label = self.labels.get((entity, language))
        if label is None and language != "en":
            label = self.labels.get((entity, "en"))
        return label

    def resolve_label(self, surface: str) -> tuple[str, ...]:
        """Entities whose label or alias normalizes like ``surface``."""
        return self.label_index.get(normalize_label(surface), ())

    def property_label(self, prop: str) -> Optional[str]:
        return self.property_labels.get(prop)

    # -- serialization ---------------------------------------------------

    def serialize_triples(self) -> str:
        """Canonical triples-file rendering (sorted, deduplicated)."""
        lines = []
        for subject in sorted(self.triples_by_subject):
            for prop, obj in self.triples_by_subject[subject]:
                lines.append(f"{subject}\t{prop}\t{obj}")
        return "".join(line + "\n" for line in lines)

    def serialize_labels(self) -> str:
        """Canonical labels-file rendering."""
        lines = []
        for (entity, language) in sorted(self.labels):
            lines.append(
                f"{entity}\t{LABEL_KIND_LABEL}\t{language}\t{self.labels[(entity, language)]}"
            )
        for entity in sorted(self.aliases):
            for alias in self.aliases[entity]:
                lines.append(f"{entity}\t{LABEL_KIND_ALIAS}\t-\t{alias}")
        for prop in sorted(self.property_labels):
            lines.append(
                f"{prop}\t{LABEL_KIND_PROPERTY}\ten\t{self.property_labels[prop]}"
            )
        return "".join(line + "\n" for line in lines)

    def save(self, directory: Union[str, Path]) -> None:
        """Write the canonical two-file form into ``directory``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "triples.tsv").write_text(
            self.serialize_triples(), encoding="utf-8"
        )
        (directory / "labels.tsv").write_text(
            self.serialize_labels(), encoding="utf-8"
        )


def load_snapshot(
    directory: Union[str, Path], config: Optional[IngestConfig] = None
) -> KgSnapshot:
    """Ingest a snapshot directory written by :meth:`KgSnapshot.save`."""
    directory = Path(directory)
    return ingest_snapshot(
        directory / "triples.tsv", directory / "labels.tsv", config
    )


def _iter_data_lines(path: Path):
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            yield lineno, line


def ingest_snapshot(
    triples_file: Union[str, Path],
    labels_file: Union[str, Path],
    config: Optional[IngestConfig] = None,
) -> KgSnapshot:
    """Build a fully indexed snapshot from a triples file and a labels file.

    Pure function of the file bytes: the same inputs always produce a
    snapshot with identical serialized form.  Duplicate triples are silently
    deduplicated; malformed lines abort with their line number unless
    ``config.skip_malformed`` is set.
    """
    config = config or IngestConfig()
    triples_file = Path(triples_file)
    labels_file = Path(labels_file)
    skipped = 0

    triple_set: set[tuple[str, str, str]] = set()
    for lineno, line in _iter_data_lines(triples_file):
        fields = line.split("\t")
        if len(fields) != 3 or not all(_check_id(f) for f in fields):
            if config.skip_malformed:
                skipped += 1
                continue
            raise FormatError(
                triples_file, lineno, f"expected 3 tab-separated ids, got {line!r}"
            )
        triple_set.add((fields[0], fields[1], fields[2]))

    by_subject: dict[str, list[tuple[str, str]]] = {}
    for subject, prop, obj in triple_set:
        by_subject.setdefault(subject, []).append((prop, obj))
    triples_by_subject = {
        subject: tuple(sorted(edges)) for subject, edges in by_subject.items()
    }
    types_index = {
        subject: tuple(
            sorted({obj for prop, obj in edges if prop == config.instance_of})
        )
        for subject, edges in triples_by_subject.items()
        if any(prop == config.instance_of for prop, _ in edges)
    }

    labels: dict[tuple[str, str], str] = {}
    aliases: dict[str, list[str]] = {}
    property_labels: dict[str, str] = {}
    for lineno, line in _iter_data_lines(labels_file):
        fields = line.split("\t")
        if len(fields) != 4 or not _check_id(fields[0]) or fields[1] not in _LABEL_KINDS:
            if config.skip_malformed:
                skipped += 1
                continue
            raise FormatError(
                labels_file,
                lineno,
                f"expected entity<TAB>kind<TAB>language<TAB>text, got {line!r}",
            )
        key, kind, language, text = fields
        if kind == LABEL_KIND_LABEL:
            labels[(key, language)] = text
        elif kind == LABEL_KIND_ALIAS:
            bucket = aliases.setdefault(key, [])
            if text not in bucket:
                bucket.append(text)
        else:
            property_labels[key] = text

    label_index: dict[str, set[str]] = {}
    for (entity, _language), text in labels.items():
        label_index.setdefault(normalize_label(text), set()).add(entity)
    for entity, alias_list in aliases.items():
        for alias in alias_list:
            label_index.setdefault(normalize_label(alias), set()).add(entity)

    if skipped:
        logger.warning("ingest skipped %d malformed lines", skipped)

    known: set[str] = set()
    for subject, _prop, obj in triple_set:
        known.add(subject)
        known.add(obj)
    known.update(entity for entity, _language in labels)
    known.update(aliases)

    return KgSnapshot(
        triples_by_subject=triples_by_subject,
        types_index=types_index,
        labels=labels,
        aliases={entity: tuple(sorted(v)) for entity, v in aliases.items()},
        label_index={
            key: tuple(sorted(v)) for key, v in label_index.items()
        },
        property_labels=property_labels,
        instance_of=config.instance_of,
        known_entities=frozenset(known),
        skipped_lines=skipped,
    )
