"""Session fixtures: tiny offline checkpoints and a small questions file.

Both checkpoints are randomly initialized at fixed seeds and saved to a
session temp directory, so every test run decodes and encodes through the
real model code paths without network access.  Their outputs are gibberish
but deterministic, which is all the tests need.
"""

import json
import string

import pytest


@pytest.fixture(scope="session")
def seq2seq_checkpoint(tmp_path_factory):
    """Byte-level seq2seq model small enough to decode in milliseconds."""
    import torch
    from transformers import ByT5Tokenizer, T5Config, T5ForConditionalGeneration

    out = tmp_path_factory.mktemp("models") / "seq2seq"
    tokenizer = ByT5Tokenizer()
    config = T5Config(
        vocab_size=len(tokenizer),
        d_model=32,
        d_kv=8,
        d_ff=64,
        num_layers=2,
        num_heads=2,
        decoder_start_token_id=0,
    )
    torch.manual_seed(20240811)
    model = T5ForConditionalGeneration(config)
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    return str(out)


@pytest.fixture(scope="session")
def encoder_checkpoint(tmp_path_factory):
    """Mean-pooled sentence encoder over a character vocabulary."""
    import torch
    from transformers import BertConfig, BertModel, BertTokenizer

    from sentence_transformers import SentenceTransformer

    try:
        from sentence_transformers.sentence_transformer import modules as st_modules
    except ImportError:  # module layout before the 5.x rename
        from sentence_transformers import models as st_modules

    base = tmp_path_factory.mktemp("models")
    hf_dir = base / "bert"
    st_dir = base / "encoder"
    hf_dir.mkdir()

    tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    tokens += list(string.ascii_lowercase)
    tokens += ["##" + c for c in string.ascii_lowercase]
    tokens += list(string.digits)
    (hf_dir / "vocab.txt").write_text("\n".join(tokens) + "\n", encoding="utf-8")

    config = BertConfig(
        vocab_size=len(tokens),
        hidden_size=16,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=64,
    )
    torch.manual_seed(7)
    BertModel(config).save_pretrained(hf_dir)
    BertTokenizer(str(hf_dir / "vocab.txt")).save_pretrained(hf_dir)

    word = st_modules.Transformer(str(hf_dir), max_seq_length=64)
    pool = st_modules.Pooling(16, pooling_mode="mean")
    SentenceTransformer(modules=[word, pool]).save(str(st_dir))
    return str(st_dir)


@pytest.fixture()
def questions_file(tmp_path):
    path = tmp_path / "questions.jsonl"
    rows = [
        {"question_id": "q1", "question_text": "who published neo contra?"},
        {"question_id": "q2", "question_text": "where was philipp apian born?"},
    ]
    path.write_text(
        "".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8"
    )
    return path
