"""Fine-tune a binary sequence classifier and score held-out documents.

The sidecar only produces probabilities; every metric is computed by the
consumer from the score file. Train and eval id sets must be disjoint:
scoring a document the head was trained on would leak labels into any
downstream evaluation, so overlap is refused outright.
"""

import random

import torch
from transformers import AutoModelForSequenceClassification, AutoTokenizer

from .corpus_io import CONTROL, DIAGNOSED, read_cleaned, write_scores
from .encode import resolve_max_tokens
from .jobs import MODE_FINETUNE, LeakageError, SidecarError, SidecarJob, resolve_checkpoint

BATCH_SIZE = 8
LEARNING_RATE = 2e-5

LABEL_TO_INDEX = {CONTROL: 0, DIAGNOSED: 1}


def _batched(sequence, size):
    for start in range(0, len(sequence), size):
        yield sequence[start : start + size]


def finetune_and_score(job: SidecarJob, train_ids: list, eval_ids: list) -> None:
    """Train on train_ids for job.epochs, write p_diagnosed for eval_ids."""
    if job.mode != MODE_FINETUNE:
        raise SidecarError(
            f"finetune_and_score needs mode={MODE_FINETUNE!r}, got {job.mode!r}"
        )
    train_ids = list(train_ids)
    eval_ids = list(eval_ids)
    if not train_ids or not eval_ids:
        raise SidecarError("train_ids and eval_ids must both be non-empty")
    overlap = sorted(set(train_ids) & set(eval_ids))
    if overlap:
        shown = ", ".join(repr(i) for i in overlap[:5])
        raise LeakageError(
            f"train and eval ids overlap ({len(overlap)} shared): {shown}"
        )

    documents = {doc.user_id: doc for doc in read_cleaned(job.input)}
    missing = [i for i in train_ids + eval_ids if i not in documents]
    if missing:
        shown = ", ".join(repr(i) for i in missing[:5])
        raise SidecarError(f"{len(missing)} requested ids not in the corpus: {shown}")

    checkpoint = resolve_checkpoint(job.checkpoint)
    # seed before instantiation so the fresh classifier head is reproducible
    torch.manual_seed(job.seed)
    tokenizer = AutoTokenizer.from_pretrained(checkpoint)
    model = AutoModelForSequenceClassification.from_pretrained(
        checkpoint,
        num_labels=2,
        id2label={0: CONTROL, 1: DIAGNOSED},
        label2id=dict(LABEL_TO_INDEX),
    )
    max_tokens = resolve_max_tokens(job, tokenizer)
    optimizer = torch.optim.AdamW(model.parameters(), lr=LEARNING_RATE)

    order = list(train_ids)
    shuffle = random.Random(job.seed)
    model.train()
    for _epoch in range(job.epochs):
        shuffle.shuffle(order)
        for batch_ids in _batched(order, BATCH_SIZE):
            batch = [documents[i] for i in batch_ids]
            encoded = tokenizer(
                [d.text for d in batch],
                padding=True,
                truncation=True,
                max_length=max_tokens,
                return_tensors="pt",
            )
            labels = torch.tensor([LABEL_TO_INDEX[d.label] for d in batch])
            output = model(**encoded, labels=labels)
            output.loss.backward()
            optimizer.step()
            optimizer.zero_grad()

    model.eval()
    scores: dict[str, float] = {}
    with torch.no_grad():
        for batch_ids in _batched(eval_ids, BATCH_SIZE):
            batch = [documents[i] for i in batch_ids]
            encoded = tokenizer(
                [d.text for d in batch],
                padding=True,
                truncation=True,
                max_length=max_tokens,
                return_tensors="pt",
            )
            logits = model(**encoded).logits
            probabilities = torch.softmax(logits, dim=-1)[:, LABEL_TO_INDEX[DIAGNOSED]]
            for doc, p in zip(batch, probabilities):
                scores[doc.user_id] = float(p)

    write_scores(job.output, model_name=checkpoint, scores=scores)
