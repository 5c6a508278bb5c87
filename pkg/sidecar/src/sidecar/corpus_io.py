"""File contracts: cleaned documents in, embeddings or scores out.

The input is the consumer's cleaned-corpus JSONL (user_id, label,
tokens, dropped, drop_reason per line); dropped documents carry no
usable text and are skipped. Output files start with a header object
and hold one record per document, floats at 9 significant digits.
"""

import json
from dataclasses import dataclass

import numpy as np

from .jobs import SidecarError

DIAGNOSED = "diagnosed"
CONTROL = "control"
LABELS = (DIAGNOSED, CONTROL)


@dataclass(frozen=True)
class SidecarDocument:
    user_id: str
    label: str
    text: str


def read_cleaned(path) -> list[SidecarDocument]:
    """Load the kept documents of a cleaned corpus, token lists re-joined."""
    documents = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SidecarError(f"{path}: line {line_no}: invalid JSON: {exc}") from exc
            try:
                user_id = str(record["user_id"])
                label = record["label"]
                dropped = record["dropped"]
            except (KeyError, TypeError):
                raise SidecarError(
                    f"{path}: line {line_no}: records need user_id, label, dropped"
                ) from None
            if label not in LABELS:
                raise SidecarError(
                    f"{path}: line {line_no}: unknown label {label!r}"
                )
            if user_id in seen:
                raise SidecarError(f"{path}: line {line_no}: duplicate user_id {user_id!r}")
            seen.add(user_id)
            if dropped:
                continue
            tokens = record.get("tokens")
            if not isinstance(tokens, list):
                raise SidecarError(
                    f"{path}: line {line_no}: kept records need a tokens array"
                )
            documents.append(
                SidecarDocument(user_id=user_id, label=label, text=" ".join(tokens))
            )
    if not documents:
        raise SidecarError(f"{path}: no usable documents (all dropped or file empty)")
    return documents


def _nine_digits(value: float) -> float:
    return float(format(float(value), ".9g"))


def write_embeddings(path, model_name: str, dim: int, vectors: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"model_name": model_name, "dim": dim}) + "\n")
        for user_id, vector in vectors.items():
            values = [_nine_digits(v) for v in np.asarray(vector, dtype=float)]
            fh.write(json.dumps({"user_id": user_id, "vector": values}) + "\n")


def write_scores(path, model_name: str, scores: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"model_name": model_name}) + "\n")
        for user_id, score in scores.items():
            fh.write(
                json.dumps({"user_id": user_id, "p_diagnosed": _nine_digits(score)})
                + "\n"
            )
