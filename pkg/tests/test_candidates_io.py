from __future__ import annotations

import json

import pytest

from act_kgqa.candidates_io import (
    CandidateList,
    load_candidates,
    load_question_entities,
)
from act_kgqa.errors import FormatError


def write_jsonl(path, records):
    path.write_text(
        "".join(json.dumps(r) + "\n" for r in records), encoding="utf-8"
    )
    return path


class TestLoadCandidates:
    def test_dedup_keeps_first(self, tmp_path):
        path = write_jsonl(
            tmp_path / "c.jsonl",
            [
                {
                    "question_id": "q1",
                    "question_text": "who?",
                    "candidates": ["Konami", "Konami", "Sega"],
                }
            ],
        )
        [clist] = load_candidates(path)
        assert clist.candidates == ("Konami", "Sega")

    def test_empty_candidates_error(self, tmp_path):
        path = write_jsonl(
            tmp_path / "c.jsonl",
            [{"question_id": "q1", "question_text": "who?", "candidates": []}],
        )
        with pytest.raises(FormatError, match="empty candidate list"):
            load_candidates(path)

    def test_file_order_preserved(self, tmp_path):
        records = [
            {"question_id": f"q{i}", "question_text": "t", "candidates": ["a"]}
            for i in range(3)
        ]
        path = write_jsonl(tmp_path / "c.jsonl", records)
        loaded = load_candidates(path)
        assert [c.question_id for c in loaded] == ["q0", "q1", "q2"]

    def test_duplicate_question_id_error(self, tmp_path):
        records = [
            {"question_id": "q1", "question_text": "t", "candidates": ["a"]},
            {"question_id": "q1", "question_text": "t", "candidates": ["b"]},
        ]
        path = write_jsonl(tmp_path / "c.jsonl", records)
        with pytest.raises(FormatError, match="duplicate question_id"):
            load_candidates(path)

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text(
            '{"question_id": "q1", "question_text": "t", "candidates": ["a"]}\nnot json\n',
            encoding="utf-8",
        )
        with pytest.raises(FormatError) as err:
            load_candidates(path)
        assert err.value.lineno == 2

    def test_meta_carried(self, tmp_path):
        path = write_jsonl(
            tmp_path / "c.jsonl",
            [
                {
                    "question_id": "q1",
                    "question_text": "t",
                    "candidates": ["a"],
                    "meta": {"beams": 200, "diversity_penalty": 0.1, "model": "m"},
                }
            ],
        )
        [clist] = load_candidates(path)
        assert clist.meta.beams == 200
        assert clist.meta.diversity_penalty == 0.1
        assert clist.meta.model == "m"

    def test_indices_dense_after_load(self, tmp_path):
        path = write_jsonl(
            tmp_path / "c.jsonl",
            [
                {
                    "question_id": "q1",
                    "question_text": "t",
                    "candidates": ["a", "b", "a", "c", "b"],
                }
            ],
        )
        [clist] = load_candidates(path)
        assert clist.candidates == ("a", "b", "c")
        assert len(set(clist.candidates)) == len(clist.candidates)

    def test_direct_construction_rejects_empty(self):
        with pytest.raises(ValueError):
            CandidateList(question_id="q", question_text="t", candidates=())


class TestLoadQuestionEntities:
    def test_basic_record(self, tmp_path):
        path = write_jsonl(
            tmp_path / "e.jsonl", [{"question_id": "q1", "entities": ["Q2071524"]}]
        )
        out = load_question_entities(path)
        assert out["q1"].entities == ("Q2071524",)

    def test_empty_entities_allowed(self, tmp_path):
        path = write_jsonl(tmp_path / "e.jsonl", [{"question_id": "q2", "entities": []}])
        assert load_question_entities(path)["q2"].entities == ()

    def test_duplicate_id_error(self, tmp_path):
        path = write_jsonl(
            tmp_path / "e.jsonl",
            [
                {"question_id": "q1", "entities": []},
                {"question_id": "q1", "entities": ["Q5"]},
            ],
        )
        with pytest.raises(FormatError, match="duplicate"):
            load_question_entities(path)

    def test_roundtrip_semantics(self, tmp_path):
        records = [
            {"question_id": "q1", "entities": ["Q1", "Q2"]},
            {"question_id": "q2", "entities": []},
        ]
        path = write_jsonl(tmp_path / "e.jsonl", records)
        loaded = load_question_entities(path)
        rewritten = [
            {"question_id": qid, "entities": list(q.entities)}
            for qid, q in loaded.items()
        ]
        assert rewritten == records
