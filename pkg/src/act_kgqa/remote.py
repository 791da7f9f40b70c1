"""Caching SPARQL-over-HTTP knowledge-graph client.

Optional alternative to the offline snapshot: serves the same lookups by
querying a SPARQL endpoint, writing every answer into a cache directory as
snapshot-format lines so that later runs replay offline.  Public endpoints
rate-limit aggressively, so requests are throttled client-side.
"""

from __future__ import annotations

import logging
import threading
import time
from pathlib import Path
from typing import Optional, Union

import requests

from .kg_store import DEFAULT_INSTANCE_OF, IngestConfig, ingest_snapshot
from .linking import normalize_label

logger = logging.getLogger(__name__)

DEFAULT_QPS = 5.0

WIKIDATA_ENTITY_PREFIX = "http://www.wikidata.org/entity/"
WIKIDATA_PROPERTY_PREFIX = "http://www.wikidata.org/prop/direct/"

_NEIGHBORS_QUERY = """SELECT ?p ?o WHERE {{ <{entity_uri}> ?p ?o . FILTER(isIRI(?o)) }}"""
_LABEL_QUERY = (
    """SELECT ?l WHERE {{ <{entity_uri}> <http://www.w3.org/2000/01/rdf-schema#label> ?l . """
    """FILTER(lang(?l) = "{language}") }}"""
)
_RESOLVE_QUERY = (
    """SELECT ?e ?l WHERE {{ ?e <http://www.w3.org/2000/01/rdf-schema#label> ?l . """
    """FILTER(lcase(str(?l)) = {surface}) }}"""
)


class SparqlKgClient:
    """Snapshot-compatible lookups backed by a SPARQL endpoint.

    Every fetched fact is appended to ``cache_dir/triples.tsv`` and
    ``cache_dir/labels.tsv`` (the snapshot on-disk format), and negative
    results are remembered in-process, so each fact is requested at most
    once per entity.  Reads are safe from multiple threads; cache writes are
    serialized.
    """

    def __init__(
        self,
        endpoint: str,
        cache_dir: Union[str, Path],
        qps: float = DEFAULT_QPS,
        instance_of: str = DEFAULT_INSTANCE_OF,
        entity_prefix: str = WIKIDATA_ENTITY_PREFIX,
        property_prefix: str = WIKIDATA_PROPERTY_PREFIX,
        session: Optional[requests.Session] = None,
        timeout: float = 30.0,
    ):
        if qps <= 0:
            raise ValueError("qps must be positive")
        self.endpoint = endpoint
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.instance_of = instance_of
        self.entity_prefix = entity_prefix
        self.property_prefix = property_prefix
        self.session = session or requests.Session()
        self.timeout = timeout
        self._min_interval = 1.0 / qps
        self._last_request = 0.0
        self._lock = threading.Lock()

        self._triples_path = self.cache_dir / "triples.tsv"
        self._labels_path = self.cache_dir / "labels.tsv"
        self._triples_path.touch()
        self._labels_path.touch()

        self._neighbors: dict[str, tuple[tuple[str, str], ...]] = {}
        self._labels: dict[tuple[str, str], Optional[str]] = {}
        self._resolved: dict[str, tuple[str, ...]] = {}
        self._plabels_written: set[str] = set()
        self._load_cache()

    # -- cache -----------------------------------------------------------

    def _load_cache(self) -> None:
        snapshot = ingest_snapshot(
            self._triples_path,
            self._labels_path,
            IngestConfig(instance_of=self.instance_of),
        )
        self._neighbors.update(snapshot.triples_by_subject)
        for (entity, language), text in snapshot.labels.items():
            self._labels[(entity, language)] = text
        for prop, text in snapshot.property_labels.items():
            self._plabels_written.add(prop)
            self._labels.setdefault((prop, "en"), text)

    def _append(self, path: Path, lines: list[str]) -> None:
        with open(path, "a", encoding="utf-8") as handle:
            for line in lines:
                handle.write(line + "\n")

    # -- transport -------------------------------------------------------

    def _sparql(self, query: str) -> list[dict]:
        with self._lock:
            wait = self._min_interval - (time.monotonic() - self._last_request)
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()
        response = self.session.get(
            self.endpoint,
            params={"query": query, "format": "json"},
            headers={"Accept": "application/sparql-results+json"},
            timeout=self.timeout,
        )
        response.raise_for_status()
        payload = response.json()
        return payload.get("results", {}).get("bindings", [])

    def _to_local(self, uri: str, prefix: str) -> Optional[str]:
        if uri.startswith(prefix):
            return uri[len(prefix):]
        return None

    # -- snapshot-compatible operations ---------------------------------

    def get_forward_neighbors(self, entity: str) -> tuple[tuple[str, str], ...]:
        with self._lock:
            cached = self._neighbors.get(entity)
        if cached is not None:
            return cached
        bindings = self._sparql(
            _NEIGHBORS_QUERY.format(entity_uri=self.entity_prefix + entity)
        )
        edges = set()
        for binding in bindings:
            prop = self._to_local(
                binding.get("p", {}).get("value", ""), self.property_prefix
            )
            obj = self._to_local(
                binding.get("o", {}).get("value", ""), self.entity_prefix
            )
            if prop and obj:
                edges.add((prop, obj))
        ordered = tuple(sorted(edges))
        with self._lock:
            self._neighbors[entity] = ordered
            self._append(
                self._triples_path,
                [f"{entity}\t{p}\t{o}" for p, o in ordered],
            )
        return ordered

    def get_types(self, entity: str) -> tuple[str, ...]:
        return tuple(
            sorted(
                {
                    obj
                    for prop, obj in self.get_forward_neighbors(entity)
                    if prop == self.instance_of
                }
            )
        )

    def lookup_label(self, entity: str, language: str = "en") -> Optional[str]:
        with self._lock:
            known = (entity, language) in self._labels
            label = self._labels.get((entity, language))
        if not known:
            bindings = self._sparql(
                _LABEL_QUERY.format(
                    entity_uri=self.entity_prefix + entity, language=language
                )
            )
            label = None
            for binding in bindings:
                value = binding.get("l", {}).get("value")
                if isinstance(value, str):
                    label = value
                    break
            with self._lock:
                self._labels[(entity, language)] = label
                if label is not None:
                    self._append(
                        self._labels_path, [f"{entity}\tlabel\t{language}\t{label}"]
                    )
        if label is None and language != "en":
            return self.lookup_label(entity, "en")
        return label

    def resolve_label(self, surface: str) -> tuple[str, ...]:
        key = normalize_label(surface)
        with self._lock:
            if key in self._resolved:
                return self._resolved[key]
        quoted = '"' + key.replace("\\", "\\\\").replace('"', '\\"') + '"'
        bindings = self._sparql(_RESOLVE_QUERY.format(surface=quoted))
        entities = set()
        label_lines = []
        for binding in bindings:
            entity = self._to_local(
                binding.get("e", {}).get("value", ""), self.entity_prefix
            )
            value = binding.get("l", {}).get("value")
            if entity:
                entities.add(entity)
                if isinstance(value, str):
                    label_lines.append(f"{entity}\talias\t-\t{value}")
        ordered = tuple(sorted(entities))
        with self._lock:
            self._resolved[key] = ordered
            self._append(self._labels_path, label_lines)
        return ordered

    def property_label(self, prop: str) -> Optional[str]:
        label = self.lookup_label(prop)
        if label is not None:
            with self._lock:
                if prop not in self._plabels_written:
                    self._plabels_written.add(prop)
                    self._append(self._labels_path, [f"{prop}\tplabel\ten\t{label}"])
        return label
