"""Ranked candidate generation via diverse beam search.

Wraps an already trained sequence-to-sequence checkpoint; no fine-tuning
happens here.  Candidates are written in model rank order, so the first
string is the model's best guess.  Surface normalization is left to the
consumer, which treats all candidate sources uniformly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .io_utils import load_questions, write_jsonl_atomic

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenerationConfig:
    """Decoding settings; defaults are the engine's expected provenance."""

    model_name: str
    beams: int = 200
    diversity_penalty: float = 0.1
    # generation length has no principled default; pick a roomy label size
    max_new_tokens: int = 32
    language: str = "en"

    def __post_init__(self):
        if self.beams < 1:
            raise ValueError("beams must be >= 1")
        if self.diversity_penalty < 0:
            raise ValueError("diversity_penalty must be >= 0")
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")


def _load_model(config: GenerationConfig):
    # imported lazily: torch startup is slow and irrelevant to --help et al.
    from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(config.model_name)
    model = AutoModelForSeq2SeqLM.from_pretrained(config.model_name)
    model.eval()
    return model, tokenizer


def _diverse_decode(model, tokenizer, question_text: str, config: GenerationConfig):
    """Decode ``beams`` sequences with one beam group per sequence.

    Group g picks its next token greedily after subtracting
    ``diversity_penalty`` times the count of tokens already chosen by
    groups before it at the same step.  Group 0 is therefore the plain
    greedy decode, and group order is the model's rank order.  Implemented
    here because current transformers releases ship group beam search only
    as downloaded code.  Sequences are recomputed without a KV cache; for
    the modest generation lengths of answer labels that is fine.
    """
    import torch
    from transformers.modeling_outputs import BaseModelOutput

    device = next(model.parameters()).device
    encoded = tokenizer(question_text, return_tensors="pt").to(device)
    with torch.no_grad():
        encoder_out = model.get_encoder()(
            input_ids=encoded["input_ids"],
            attention_mask=encoded["attention_mask"],
        )

    groups = config.beams
    hidden = encoder_out.last_hidden_state.expand(groups, -1, -1).contiguous()
    encoder_mask = encoded["attention_mask"].expand(groups, -1).contiguous()

    start_id = model.config.decoder_start_token_id
    if start_id is None:
        start_id = model.config.bos_token_id
    eos_id = model.config.eos_token_id
    pad_id = model.config.pad_token_id
    if pad_id is None:
        pad_id = eos_id if eos_id is not None else 0

    sequences = torch.full((groups, 1), start_id, dtype=torch.long, device=device)
    decoder_mask = torch.ones((groups, 1), dtype=torch.long, device=device)
    finished = [False] * groups

    for _ in range(config.max_new_tokens):
        with torch.no_grad():
            out = model(
                encoder_outputs=BaseModelOutput(last_hidden_state=hidden),
                attention_mask=encoder_mask,
                decoder_input_ids=sequences,
                decoder_attention_mask=decoder_mask,
                use_cache=False,
            )
        log_probs = out.logits[:, -1, :].float().log_softmax(dim=-1)

        counts = torch.zeros(log_probs.size(-1), device=device)
        next_tokens = torch.full((groups,), pad_id, dtype=torch.long, device=device)
        grew = torch.zeros(groups, dtype=torch.long, device=device)
        for g in range(groups):
            if finished[g]:
                continue
            adjusted = log_probs[g] - config.diversity_penalty * counts
            token = int(torch.argmax(adjusted))
            next_tokens[g] = token
            counts[token] += 1
            grew[g] = 1
            if eos_id is not None and token == eos_id:
                finished[g] = True
        sequences = torch.cat([sequences, next_tokens.unsqueeze(1)], dim=1)
        decoder_mask = torch.cat([decoder_mask, grew.unsqueeze(1)], dim=1)
        if all(finished):
            break

    return tokenizer.batch_decode(sequences[:, 1:], skip_special_tokens=True)


def _generate_one(model, tokenizer, question_text: str, config: GenerationConfig):
    """Decode one question; returns deduplicated non-empty strings in rank
    order."""
    texts = _diverse_decode(model, tokenizer, question_text, config)
    out: list[str] = []
    seen: set[str] = set()
    for text in texts:
        text = text.strip()
        if text and text not in seen:
            seen.add(text)
            out.append(text)
    return out


def generate_candidates(
    questions_file: Union[str, Path],
    config: GenerationConfig,
    out_file: Union[str, Path],
) -> tuple[int, int]:
    """Write one candidate record per question; returns (written, skipped).

    A question whose generation fails, or yields no usable surface at all,
    is skipped with a warning instead of poisoning the whole file.
    """
    questions = load_questions(questions_file)
    model, tokenizer = _load_model(config)

    records = []
    skipped = 0
    for qid, text in questions:
        try:
            candidates = _generate_one(model, tokenizer, text, config)
        except Exception as exc:  # per-question failure must not kill the run
            logger.warning("generation failed for %s: %s", qid, exc)
            skipped += 1
            continue
        if not candidates:
            logger.warning("no usable candidates for %s; skipped", qid)
            skipped += 1
            continue
        records.append(
            {
                "question_id": qid,
                "question_text": text,
                "candidates": candidates,
                "meta": {
                    "beams": config.beams,
                    "diversity_penalty": config.diversity_penalty,
                    "model": config.model_name,
                },
            }
        )
    write_jsonl_atomic(out_file, records)
    return len(records), skipped
