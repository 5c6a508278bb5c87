import json
import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("TOKENIZERS_PARALLELISM", "false")

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizerFast
from transformers import logging as hf_logging

from rowgen import corpus_rows

hf_logging.set_verbosity_error()

# word-initial and continuation pieces covering all lowercase ascii words,
# so the tiny tokenizer never falls back to [UNK] on fixture text
_VOCAB = (
    ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    + list("abcdefghijklmnopqrstuvwxyz")
    + [f"##{c}" for c in "abcdefghijklmnopqrstuvwxyz'"]
    + list("0123456789")
    + ["'", "feeling", "hopeless", "tonight", "sleep", "night",
       "great", "morning", "dinner", "friend"]
)


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """A fully offline random-weight BERT small enough for test runs."""
    root = tmp_path_factory.mktemp("tiny-bert")
    vocab_file = root / "vocab.txt"
    vocab_file.write_text("\n".join(_VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(
        vocab_file=str(vocab_file), do_lower_case=True, model_max_length=64
    )
    config = BertConfig(
        vocab_size=len(_VOCAB),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    torch.manual_seed(0)
    model = BertModel(config)
    model.save_pretrained(root)
    tokenizer.save_pretrained(root)
    return str(root)


@pytest.fixture
def make_cleaned(tmp_path):
    def _make(rows, name="cleaned.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
        return path

    return _make


@pytest.fixture
def ten_doc_rows():
    return corpus_rows(5)


@pytest.fixture
def forty_doc_rows():
    return corpus_rows(20)
