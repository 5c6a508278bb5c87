"""File contract to external encoders.

Embeddings and scores arrive as line-oriented JSON: a header object first
(model_name, plus dim for embeddings), then one object per document. Values
are written with 9 significant digits, which is also the round-trip
comparison precision. Alignment to a Dataset preserves Dataset order and
reports unmatched ids on both sides.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .corpus import Dataset


class EncoderFileError(Exception):
    """Raised for malformed embedding/score files and failed alignments."""


@dataclass(frozen=True)
class EmbeddingSet:
    model_name: str
    dim: int
    entries: dict[str, np.ndarray]


@dataclass(frozen=True)
class ScoreSet:
    model_name: str
    entries: dict[str, float]


@dataclass(frozen=True)
class Alignment:
    pairs: list
    unmatched_documents: int
    unmatched_entries: int


def _read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise EncoderFileError(f"{path}: line {line_no}: invalid JSON: {exc}") from exc


def load_embeddings(path) -> EmbeddingSet:
    """Parse an embedding file, enforcing one dimension and finite values."""
    records = _read_jsonl(path)
    try:
        line_no, header = next(records)
    except StopIteration:
        raise EncoderFileError(f"{path}: empty embedding file") from None
    if "model_name" not in header or "dim" not in header:
        raise EncoderFileError(
            f"{path}: line {line_no}: header must carry model_name and dim"
        )
    dim = int(header["dim"])
    if dim < 1:
        raise EncoderFileError(f"{path}: line {line_no}: dim must be >= 1, got {dim}")
    entries: dict[str, np.ndarray] = {}
    for line_no, record in records:
        try:
            user_id = record["user_id"]
            vector = record["vector"]
        except (KeyError, TypeError) as exc:
            raise EncoderFileError(
                f"{path}: line {line_no}: records need user_id and vector"
            ) from exc
        if user_id in entries:
            raise EncoderFileError(f"{path}: line {line_no}: duplicate user_id {user_id!r}")
        if not isinstance(vector, list):
            raise EncoderFileError(f"{path}: line {line_no}: vector must be a JSON array")
        if len(vector) != dim:
            raise EncoderFileError(
                f"{path}: line {line_no}: vector has {len(vector)} values, header says {dim}"
            )
        values = np.asarray(vector, dtype=float)
        if not np.all(np.isfinite(values)):
            raise EncoderFileError(f"{path}: line {line_no}: non-finite value in vector")
        entries[user_id] = values
    if not entries:
        raise EncoderFileError(f"{path}: no embedding records after the header")
    return EmbeddingSet(model_name=str(header["model_name"]), dim=dim, entries=entries)


def save_embeddings(embeddings: EmbeddingSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"model_name": embeddings.model_name, "dim": embeddings.dim}) + "\n")
        for user_id, vector in embeddings.entries.items():
            formatted = [float(format(float(v), ".9g")) for v in vector]
            fh.write(json.dumps({"user_id": user_id, "vector": formatted}) + "\n")


def load_scores(path) -> ScoreSet:
    """Parse a score file; every p_diagnosed must be a probability."""
    records = _read_jsonl(path)
    try:
        line_no, header = next(records)
    except StopIteration:
        raise EncoderFileError(f"{path}: empty score file") from None
    if "model_name" not in header:
        raise EncoderFileError(f"{path}: line {line_no}: header must carry model_name")
    entries: dict[str, float] = {}
    for line_no, record in records:
        try:
            user_id = record["user_id"]
            score = float(record["p_diagnosed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise EncoderFileError(
                f"{path}: line {line_no}: records need user_id and p_diagnosed"
            ) from exc
        if user_id in entries:
            raise EncoderFileError(f"{path}: line {line_no}: duplicate user_id {user_id!r}")
        if not math.isfinite(score) or not 0.0 <= score <= 1.0:
            raise EncoderFileError(
                f"{path}: line {line_no}: p_diagnosed must be in [0,1], got {score}"
            )
        entries[user_id] = score
    if not entries:
        raise EncoderFileError(f"{path}: no score records after the header")
    return ScoreSet(model_name=str(header["model_name"]), entries=entries)


def save_scores(scores: ScoreSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"model_name": scores.model_name}) + "\n")
        for user_id, score in scores.entries.items():
            fh.write(
                json.dumps({"user_id": user_id, "p_diagnosed": float(format(score, ".9g"))})
                + "\n"
            )


def align(ds, entry_set) -> Alignment:
    """Pair documents with their vectors/scores, in Dataset order.

    Documents without an entry are excluded and counted; entries without a
    document are counted. An empty intersection is an error.
    """
    documents = ds.documents if isinstance(ds, Dataset) else list(ds)
    pairs = []
    matched_ids = set()
    for doc in documents:
        if doc.user_id in entry_set.entries:
            pairs.append((doc, entry_set.entries[doc.user_id]))
            matched_ids.add(doc.user_id)
    if not pairs:
        raise EncoderFileError("no document ids match the loaded entries")
    return Alignment(
        pairs=pairs,
        unmatched_documents=len(documents) - len(pairs),
        unmatched_entries=len(entry_set.entries) - len(matched_ids),
    )
