"""Diverse decoding behavior, pinned on a scripted model, plus end-to-end
runs against a tiny real checkpoint."""

import json
import logging
from types import SimpleNamespace

import pytest

from act_adapter.generation import GenerationConfig, _generate_one, generate_candidates

# scripted vocabulary: 0=pad 1=eos 2..5 = a b c d
_LETTERS = {2: "a", 3: "b", 4: "c", 5: "d"}


class _ScriptedTokenizer:
    def __call__(self, text, return_tensors=None):
        import torch
        from transformers import BatchEncoding

        n = max(1, len(text))
        return BatchEncoding(
            {
                "input_ids": torch.full((1, n), 2, dtype=torch.long),
                "attention_mask": torch.ones(1, n, dtype=torch.long),
            }
        )

    def batch_decode(self, sequences, skip_special_tokens=True):
        return [
            "".join(_LETTERS.get(int(t), "") for t in row) for row in sequences
        ]


class _ScriptedModel:
    """Seq2seq stand-in whose next-token logits depend only on the step."""

    def __init__(self, step_logits):
        import torch

        self._steps = [torch.tensor(row, dtype=torch.float) for row in step_logits]
        self.config = SimpleNamespace(
            decoder_start_token_id=0,
            bos_token_id=None,
            eos_token_id=1,
            pad_token_id=0,
        )

    def parameters(self):
        import torch

        return iter([torch.zeros(1)])

    def get_encoder(self):
        return self._encode

    def _encode(self, input_ids=None, attention_mask=None):
        import torch

        return SimpleNamespace(
            last_hidden_state=torch.zeros(1, input_ids.shape[1], 4)
        )

    def __call__(
        self,
        encoder_outputs=None,
        attention_mask=None,
        decoder_input_ids=None,
        decoder_attention_mask=None,
        use_cache=False,
    ):
        step = decoder_input_ids.shape[1] - 1
        row = self._steps[min(step, len(self._steps) - 1)]
        groups = decoder_input_ids.shape[0]
        return SimpleNamespace(logits=row.view(1, 1, -1).expand(groups, 1, -1))


def _decode(step_logits, beams, penalty, max_new_tokens=8):
    config = GenerationConfig(
        model_name="scripted",
        beams=beams,
        diversity_penalty=penalty,
        max_new_tokens=max_new_tokens,
    )
    return _generate_one(_ScriptedModel(step_logits), _ScriptedTokenizer(), "x", config)


# step 0 prefers a over b by a 0.1 logit gap; step 1 ends every group
_SPLIT_STEPS = [
    [-9.0, -9.0, 3.0, 2.9, 1.0, 0.0],
    [-9.0, 5.0, 0.0, 0.0, 0.0, 0.0],
]


def test_penalty_spreads_groups_across_near_ties():
    # group 0 takes a; group 1 sees a penalized by 0.2 > gap, takes b;
    # group 2 sees both penalized once, raw gap decides, takes a again;
    # group 3 sees a at -0.4 vs b at -0.2, takes b; dedup leaves [a, b]
    assert _decode(_SPLIT_STEPS, beams=4, penalty=0.2) == ["a", "b"]


def test_zero_penalty_collapses_to_greedy():
    assert _decode(_SPLIT_STEPS, beams=4, penalty=0.0) == ["a"]


def test_single_beam_is_plain_greedy():
    assert _decode(_SPLIT_STEPS, beams=1, penalty=0.2) == ["a"]


def test_groups_finishing_early_are_padded_and_empty_strings_dropped():
    # eos beats a by 0.1 raw, so groups 0 and 2 stop immediately with empty
    # strings while 1 and 3 decode "a"; the survivors dedup to one string
    steps = [
        [-9.0, 3.0, 2.9, -9.0, -9.0, -9.0],
        [-9.0, 5.0, 0.0, 0.0, 0.0, 0.0],
    ]
    assert _decode(steps, beams=4, penalty=0.2) == ["a"]


def test_generation_stops_at_token_budget():
    # no eos ever wins, and per-step penalty counts reset each step, so the
    # two groups repeat their first choice until the budget cuts them off
    steps = [[-9.0, -9.0, 3.0, 2.9, 1.0, 0.0]]
    assert _decode(steps, beams=2, penalty=0.2, max_new_tokens=3) == ["aaa", "bbb"]


@pytest.mark.parametrize(
    "kwargs,message",
    [
        (dict(beams=0), "beams"),
        (dict(diversity_penalty=-0.1), "diversity_penalty"),
        (dict(max_new_tokens=0), "max_new_tokens"),
    ],
)
def test_config_rejects_bad_values(kwargs, message):
    with pytest.raises(ValueError, match=message):
        GenerationConfig(model_name="m", **kwargs)


def _read_jsonl(path):
    return [
        json.loads(line)
        for line in path.read_text(encoding="utf-8").splitlines()
    ]


def test_generate_candidates_writes_ranked_records(
    seq2seq_checkpoint, questions_file, tmp_path
):
    config = GenerationConfig(
        model_name=seq2seq_checkpoint, beams=4, max_new_tokens=6
    )
    out = tmp_path / "cands.jsonl"
    written, skipped = generate_candidates(questions_file, config, out)
    assert (written, skipped) == (2, 0)
    records = _read_jsonl(out)
    assert [r["question_id"] for r in records] == ["q1", "q2"]
    for record in records:
        candidates = record["candidates"]
        assert 1 <= len(candidates) <= 4
        assert len(set(candidates)) == len(candidates)
        assert all(c and c == c.strip() for c in candidates)
        assert record["meta"] == {
            "beams": 4,
            "diversity_penalty": 0.1,
            "model": seq2seq_checkpoint,
        }


def test_repeat_runs_are_byte_identical(seq2seq_checkpoint, questions_file, tmp_path):
    config = GenerationConfig(
        model_name=seq2seq_checkpoint, beams=4, max_new_tokens=6
    )
    first = tmp_path / "one.jsonl"
    second = tmp_path / "two.jsonl"
    generate_candidates(questions_file, config, first)
    generate_candidates(questions_file, config, second)
    assert first.read_bytes() == second.read_bytes()


def test_default_settings_are_recorded_in_meta(
    seq2seq_checkpoint, questions_file, tmp_path
):
    config = GenerationConfig(model_name=seq2seq_checkpoint, max_new_tokens=4)
    out = tmp_path / "cands.jsonl"
    generate_candidates(questions_file, config, out)
    for record in _read_jsonl(out):
        assert record["meta"]["beams"] == 200
        assert record["meta"]["diversity_penalty"] == 0.1


def test_failing_question_is_skipped_with_warning(
    seq2seq_checkpoint, questions_file, tmp_path, monkeypatch, caplog
):
    from act_adapter import generation

    def scripted(model, tokenizer, text, config):
        if "neo contra" in text:
            raise RuntimeError("decode exploded")
        return ["fine"]

    monkeypatch.setattr(generation, "_generate_one", scripted)
    config = GenerationConfig(model_name=seq2seq_checkpoint, beams=2, max_new_tokens=4)
    out = tmp_path / "cands.jsonl"
    with caplog.at_level(logging.WARNING, logger="act_adapter.generation"):
        written, skipped = generate_candidates(questions_file, config, out)
    assert (written, skipped) == (1, 1)
    assert "generation failed for q1" in caplog.text
    assert [r["question_id"] for r in _read_jsonl(out)] == ["q2"]


def test_question_with_no_usable_output_is_skipped(
    seq2seq_checkpoint, questions_file, tmp_path, monkeypatch, caplog
):
    from act_adapter import generation

    def scripted(model, tokenizer, text, config):
        return [] if "apian" in text else ["ok"]

    monkeypatch.setattr(generation, "_generate_one", scripted)
    config = GenerationConfig(model_name=seq2seq_checkpoint, beams=2, max_new_tokens=4)
    out = tmp_path / "cands.jsonl"
    with caplog.at_level(logging.WARNING, logger="act_adapter.generation"):
        written, skipped = generate_candidates(questions_file, config, out)
    assert (written, skipped) == (1, 1)
    assert "no usable candidates for q2" in caplog.text
