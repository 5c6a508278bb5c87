"""Transformer sidecar for the textscreen toolkit.

Runs the heavyweight encoder work in a separate process and hands the
results back through files only:

- ``embed``: pooled final-layer embeddings for every cleaned document,
- ``finetune-score``: per-document diagnosed-class probabilities from a
  fine-tuned sequence classifier.

Output files follow the textscreen embedding/score JSONL contract
(header object first, one record per document after it). The sidecar
never computes metrics; scoring quality is always judged on the
consumer side.
"""

from .corpus_io import SidecarDocument, read_cleaned, write_embeddings, write_scores
from .encode import export_embeddings
from .finetune import finetune_and_score
from .jobs import (
    CHECKPOINT_ALIASES,
    MODE_EMBED,
    MODE_FINETUNE,
    LeakageError,
    SidecarError,
    SidecarJob,
    resolve_checkpoint,
)

__version__ = "0.1.0"

__all__ = [
    "CHECKPOINT_ALIASES",
    "MODE_EMBED",
    "MODE_FINETUNE",
    "LeakageError",
    "SidecarDocument",
    "SidecarError",
    "SidecarJob",
    "export_embeddings",
    "finetune_and_score",
    "read_cleaned",
    "resolve_checkpoint",
    "write_embeddings",
    "write_scores",
]
