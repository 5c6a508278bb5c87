"""Job descriptions and checkpoint alias resolution."""

from dataclasses import dataclass


class SidecarError(Exception):
    """Any sidecar failure meant for the operator."""


class LeakageError(SidecarError):
    """Train and eval id sets overlap."""


MODE_EMBED = "embed"
MODE_FINETUNE = "finetune_score"
MODES = (MODE_EMBED, MODE_FINETUNE)

# Short names for the supported published checkpoints.
CHECKPOINT_ALIASES = {
    "DBUFS2E": "distilbert-base-uncased-finetuned-sst-2-english",
    "BBU": "bert-base-uncased",
    "MBBU": "mental/mental-bert-base-uncased",
    "DRB": "distilroberta-base",
}


def resolve_checkpoint(name: str) -> str:
    """Map an alias to its published identifier; pass explicit ids through.

    An all-uppercase token is treated as an alias attempt so typos fail
    loudly instead of turning into a hub lookup.
    """
    if name in CHECKPOINT_ALIASES:
        return CHECKPOINT_ALIASES[name]
    if name.isupper():
        known = ", ".join(sorted(CHECKPOINT_ALIASES))
        raise SidecarError(f"unknown checkpoint alias {name!r}; known aliases: {known}")
    return name


@dataclass(frozen=True)
class SidecarJob:
    checkpoint: str
    mode: str
    input: str
    output: str
    max_tokens: int | None = None
    epochs: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise SidecarError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.epochs < 1:
            raise SidecarError(f"epochs must be >= 1, got {self.epochs}")
        if self.max_tokens is not None and self.max_tokens < 1:
            raise SidecarError(f"max_tokens must be >= 1, got {self.max_tokens}")
