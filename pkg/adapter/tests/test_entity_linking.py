"""Dictionary linker: surface index parsing and mention matching."""

import json

import pytest

from act_adapter.entity_linking import (
    _match_entities,
    link_questions,
    load_surface_index,
)


def _write_labels(path, rows):
    path.write_text("".join("\t".join(r) + "\n" for r in rows), encoding="utf-8")


def test_surface_index_keeps_labels_and_aliases_only(tmp_path):
    path = tmp_path / "labels.tsv"
    _write_labels(
        path,
        [
            ("Q1", "label", "en", "Konami"),
            ("Q1", "alias", "en", "Konami Holdings"),
            ("Q1", "description", "en", "game publisher"),
            ("Q2", "plabel", "en", "publisher"),
        ],
    )
    index = load_surface_index(path)
    assert index == {"konami": ("Q1",), "konami holdings": ("Q1",)}


def test_surface_shared_by_entities_lists_all_ids_sorted(tmp_path):
    path = tmp_path / "labels.tsv"
    _write_labels(
        path,
        [
            ("Q9", "label", "en", "Mercury"),
            ("Q2", "label", "en", "Mercury"),
        ],
    )
    assert load_surface_index(path)["mercury"] == ("Q2", "Q9")


def test_surface_index_skips_comments_and_rejects_short_rows(tmp_path):
    path = tmp_path / "labels.tsv"
    path.write_text("# export header\n\nQ1\tlabel\ten\n", encoding="utf-8")
    with pytest.raises(ValueError, match=r":3: expected 4 tab-separated fields"):
        load_surface_index(path)


def test_matching_is_case_insensitive_on_word_boundaries():
    index = {"paris": ("Q90",), "neo contra": ("Q3",)}
    assert _match_entities("Who published Neo Contra?", index) == ["Q3"]
    # "paris" must not fire inside an unrelated word
    assert _match_entities("a comparison of tools", index) == []
    assert _match_entities("PARIS in spring", index) == ["Q90"]


def test_longer_surface_wins_at_the_same_start():
    index = {"new york": ("Q11",), "new york city": ("Q10",)}
    assert _match_entities("new york city mayor", index) == ["Q10", "Q11"]


def test_matches_are_ordered_by_position():
    index = {"vienna": ("Q5",), "apian": ("Q8",)}
    assert _match_entities("did apian visit vienna?", index) == ["Q8", "Q5"]


def test_link_questions_writes_one_record_per_question(tmp_path):
    questions = tmp_path / "q.jsonl"
    questions.write_text(
        json.dumps({"question_id": "q1", "question_text": "who runs Konami?"})
        + "\n"
        + json.dumps({"question_id": "q2", "question_text": "no mentions here"})
        + "\n",
        encoding="utf-8",
    )
    labels = tmp_path / "labels.tsv"
    _write_labels(labels, [("Q1", "label", "en", "Konami")])

    out = tmp_path / "entities.jsonl"
    assert link_questions(questions, labels, out) == 2
    records = [
        json.loads(line)
        for line in out.read_text(encoding="utf-8").splitlines()
    ]
    assert records == [
        {"question_id": "q1", "entities": ["Q1"]},
        {"question_id": "q2", "entities": []},
    ]
