"""Fixtures: a tiny randomly-initialized local BERT checkpoint (no
network needed) and a small labeled corpus file."""

import os

import pytest

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "a", "news", "covid", "good", "bad", "report", "official",
    "shocking", "secret", "cure", "study", "today", "city", "!", "?",
]


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    path = tmp_path_factory.mktemp("ckpt") / "tinybert"
    path.mkdir()
    (path / "vocab.txt").write_text("\n".join(VOCAB) + "\n")
    tokenizer = BertTokenizerFast(vocab_file=str(path / "vocab.txt"),
                                  do_lower_case=True)
    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    BertModel(config).save_pretrained(path)
    tokenizer.save_pretrained(path)
    return str(path)


CORPUS_ROWS = [
    ("d01", "shocking secret cure covid !", "fake"),
    ("d02", "official report today", "real"),
    ("d03", "the news is bad ?", "fake"),
    ("d04", "city study report good", "real"),
    ("d05", "secret covid cure news !", "fake"),
    ("d06", "official city study today", "real"),
    ("d07", "bad shocking news covid", "fake"),
    ("d08", "the report of the study", "real"),
    ("d09", "cure the covid secret !", "fake"),
    ("d10", "good official news today", "real"),
]


@pytest.fixture(scope="session")
def corpus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "ten.tsv"
    lines = ["id\ttext\tlabel"] + [f"{i}\t{t}\t{l}" for i, t, l in CORPUS_ROWS]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)
