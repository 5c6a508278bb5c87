"""Embedding export: pooled final-layer states from a pretrained encoder."""

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from .corpus_io import read_cleaned, write_embeddings
from .jobs import MODE_EMBED, SidecarError, SidecarJob, resolve_checkpoint

BATCH_SIZE = 16

# fallback when a tokenizer reports no finite context limit
DEFAULT_CONTEXT = 512


def resolve_max_tokens(job: SidecarJob, tokenizer) -> int:
    if job.max_tokens is not None:
        return job.max_tokens
    limit = getattr(tokenizer, "model_max_length", None)
    if limit is None or limit > 1_000_000:  # sentinel for "unset"
        return DEFAULT_CONTEXT
    return int(limit)


def mean_pool(last_hidden: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
    """Average token states, ignoring padding positions."""
    mask = attention_mask.unsqueeze(-1).to(last_hidden.dtype)
    summed = (last_hidden * mask).sum(dim=1)
    counts = mask.sum(dim=1).clamp(min=1.0)
    return summed / counts


def export_embeddings(job: SidecarJob) -> None:
    """Embed every kept document and write the embedding JSONL file."""
    if job.mode != MODE_EMBED:
        raise SidecarError(f"export_embeddings needs mode={MODE_EMBED!r}, got {job.mode!r}")
    checkpoint = resolve_checkpoint(job.checkpoint)
    documents = read_cleaned(job.input)
    tokenizer = AutoTokenizer.from_pretrained(checkpoint)
    model = AutoModel.from_pretrained(checkpoint)
    model.eval()
    max_tokens = resolve_max_tokens(job, tokenizer)

    vectors: dict[str, np.ndarray] = {}
    with torch.no_grad():
        for start in range(0, len(documents), BATCH_SIZE):
            batch = documents[start : start + BATCH_SIZE]
            encoded = tokenizer(
                [doc.text for doc in batch],
                padding=True,
                truncation=True,
                max_length=max_tokens,
                return_tensors="pt",
            )
            output = model(**encoded)
            pooled = mean_pool(output.last_hidden_state, encoded["attention_mask"])
            for doc, vector in zip(batch, pooled):
                vectors[doc.user_id] = vector.numpy()

    dim = int(model.config.hidden_size)
    write_embeddings(job.output, model_name=checkpoint, dim=dim, vectors=vectors)
