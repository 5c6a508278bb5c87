"""Clean raw values into lowercase lemma sequences.

Per value the pipeline is: skip rules (retweet, mention, non-English), URL
removal, emoji removal, special-character sanitization, lowercasing,
whitespace collapse, tokenization, stopword removal, lemmatization. A
document whose surviving tokens join to fewer than min_chars characters is
dropped. For merged-tweet documents the skip rules run per tweet line; for
bios they run on the whole value.
"""

from __future__ import annotations

import json
import re
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache, partial
from importlib import resources

from .corpus import Document, LABELS, SOURCE_TWEETS

DEFAULT_URL_PATTERN = r"(https?://|www\.)\S+"

# codepoint intervals, inclusive: pictographs, symbols, variation selectors,
# regional indicators, zero-width joiner
DEFAULT_EMOJI_RANGES = (
    (0x1F300, 0x1FAFF),
    (0x2600, 0x27BF),
    (0xFE00, 0xFE0F),
    (0x1F1E6, 0x1F1FF),
    (0x200D, 0x200D),
)

# regex character-class body of the post-pipeline alphabet; sanitization is
# case-insensitive because lowercasing runs after it
DEFAULT_ALLOWED_CHARS = "a-z0-9' "

REASON_RETWEET = "retweet"
REASON_MENTION = "mention"
REASON_NON_ENGLISH = "non_english"
REASON_NONE = "none"

DROP_SKIPPED = "skipped"
DROP_EMPTIED = "emptied"
DROP_BELOW_MIN = "below_min_chars"
DROP_REASONS = (DROP_SKIPPED, DROP_EMPTIED, DROP_BELOW_MIN)


class PreprocessError(Exception):
    """Raised for malformed configs and unreadable cleaned-corpus files."""


def _data_text(name: str) -> str:
    return resources.files("textscreen.data").joinpath(name).read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def load_stopwords() -> frozenset[str]:
    """The shipped stopword list: one lowercase word per line."""
    words = frozenset(
        line.strip() for line in _data_text("stopwords.txt").splitlines() if line.strip()
    )
    return words


@lru_cache(maxsize=1)
def load_lemma_exceptions() -> dict[str, str]:
    """The shipped irregular-form table: ``form<TAB>lemma`` per line."""
    table = {}
    for line_no, line in enumerate(_data_text("lemma_exceptions.txt").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        form, sep, lemma = line.partition("\t")
        if not sep or not form or not lemma:
            raise PreprocessError(f"lemma_exceptions.txt line {line_no}: expected form<TAB>lemma")
        table[form] = lemma
    return table


@dataclass(frozen=True)
class PreprocessConfig:
    url_pattern: str = DEFAULT_URL_PATTERN
    emoji_ranges: tuple[tuple[int, int], ...] = DEFAULT_EMOJI_RANGES
    allowed_chars: str = DEFAULT_ALLOWED_CHARS
    stopwords: frozenset[str] = None  # type: ignore[assignment]
    min_chars: int = 5
    apply_lemmatization: bool = True

    def __post_init__(self) -> None:
        if self.stopwords is None:
            object.__setattr__(self, "stopwords", load_stopwords())
        if self.min_chars < 1:
            raise PreprocessError(f"min_chars must be >= 1, got {self.min_chars}")
        for word in self.stopwords:
            if word != word.lower():
                raise PreprocessError(f"stopword {word!r} is not lowercase")
        for lo, hi in self.emoji_ranges:
            if lo > hi:
                raise PreprocessError(f"emoji range {lo:#x}-{hi:#x} is inverted")


def default_config(**overrides) -> PreprocessConfig:
    return PreprocessConfig(**overrides)


@dataclass(frozen=True)
class SkipDecision:
    skip: bool
    reason: str

    def __post_init__(self) -> None:
        if self.skip == (self.reason == REASON_NONE):
            raise PreprocessError("skip=False requires reason=none and vice versa")


@dataclass(frozen=True)
class CleanDocument:
    user_id: str
    label: str
    tokens: tuple[str, ...]
    dropped: bool
    drop_reason: str | None = None

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise PreprocessError(f"label must be one of {LABELS}, got {self.label!r}")
        if self.dropped and self.tokens:
            raise PreprocessError("a dropped document must have no tokens")
        if self.dropped != (self.drop_reason is not None):
            raise PreprocessError("drop_reason must be set exactly when dropped")
        if self.drop_reason is not None and self.drop_reason not in DROP_REASONS:
            raise PreprocessError(f"unknown drop_reason {self.drop_reason!r}")


@lru_cache(maxsize=8)
def _url_re(pattern: str) -> re.Pattern:
    return re.compile(pattern)


@lru_cache(maxsize=8)
def _emoji_re(ranges: tuple[tuple[int, int], ...]) -> re.Pattern:
    parts = []
    for lo, hi in ranges:
        if lo == hi:
            parts.append(re.escape(chr(lo)))
        else:
            parts.append(f"{re.escape(chr(lo))}-{re.escape(chr(hi))}")
    return re.compile("[" + "".join(parts) + "]")


@lru_cache(maxsize=8)
def _disallowed_re(allowed_chars: str) -> re.Pattern:
    # ASCII keeps case-insensitivity from pulling in Unicode case pairs
    # (Kelvin sign, long s) that lowercasing would not map into a-z
    return re.compile(f"[^{allowed_chars}]", re.IGNORECASE | re.ASCII)


_ASCII_LETTERS = frozenset(string.ascii_letters)
_WORD_RE = re.compile(r"[a-z']+")


def should_skip(value: str, cfg: PreprocessConfig) -> SkipDecision:
    """Decide whether a raw value is excluded before any cleaning.

    Retweets are values whose trimmed text starts with "RT" followed by
    whitespace or "@"; mentions start with "@". A value counts as English
    when at least 90% of its letters are ASCII letters or it contains two
    distinct shipped stopwords.
    """
    trimmed = value.strip()
    if trimmed.startswith("RT"):
        rest = trimmed[2:]
        if not rest or rest[0].isspace() or rest[0] == "@":
            return SkipDecision(skip=True, reason=REASON_RETWEET)
    if trimmed.startswith("@"):
        return SkipDecision(skip=True, reason=REASON_MENTION)
    letters = [ch for ch in value if ch.isalpha()]
    if letters:
        ascii_count = sum(1 for ch in letters if ch in _ASCII_LETTERS)
        if ascii_count / len(letters) < 0.9:
            found = {w for w in _WORD_RE.findall(value.lower()) if w in cfg.stopwords}
            if len(found) < 2:
                return SkipDecision(skip=True, reason=REASON_NON_ENGLISH)
    return SkipDecision(skip=False, reason=REASON_NONE)


def clean_text(value: str, cfg: PreprocessConfig) -> str:
    """Strip URLs, emoji, and disallowed characters; lowercase and collapse.

    Each removal substitutes a space so adjacent words never merge; the
    final collapse reduces runs of whitespace to single spaces and trims.
    """
    text = _url_re(cfg.url_pattern).sub(" ", value)
    text = _emoji_re(cfg.emoji_ranges).sub(" ", text)
    text = _disallowed_re(cfg.allowed_chars).sub(" ", text)
    text = text.lower()
    return " ".join(text.split())


def tokenize(cleaned: str) -> list[str]:
    return cleaned.split()


def remove_stopwords(tokens: list[str], cfg: PreprocessConfig) -> list[str]:
    return [t for t in tokens if t not in cfg.stopwords]


def lemmatize(token: str) -> str:
    """Map a lowercase token to its base form.

    The shipped exception table is consulted first; otherwise ordered
    noun-mode suffix rules apply, each guarded so common false positives
    (glass, virus, basis, ...) pass through unchanged.
    """
    exceptions = load_lemma_exceptions()
    if token in exceptions:
        return exceptions[token]
    if len(token) > 2 and token.endswith("'s"):
        return token[:-2]
    if len(token) > 2 and token.endswith("s'"):
        return token[:-2]
    if len(token) >= 5 and token.endswith("ies"):
        return token[:-3] + "y"
    if len(token) >= 4 and token.endswith(("sses", "zzes", "shes", "ches", "xes")):
        return token[:-2]
    if (
        len(token) >= 4
        and token.endswith("s")
        and not token.endswith(("ss", "us", "is"))
    ):
        return token[:-1]
    return token


def _dropped(doc: Document, reason: str) -> CleanDocument:
    return CleanDocument(
        user_id=doc.user_id, label=doc.label, tokens=(), dropped=True, drop_reason=reason
    )


def preprocess_document(doc: Document, cfg: PreprocessConfig) -> CleanDocument:
    """Run the full cleaning pipeline over one document.

    Every failure mode is represented as a dropped CleanDocument with a
    reason: skipped (no value survived the skip rules), emptied (survivors
    cleaned to nothing), or below_min_chars (joined tokens shorter than
    min_chars).
    """
    if doc.source == SOURCE_TWEETS:
        values = doc.text.split("\n")
    else:
        values = [doc.text]
    survivors = [v for v in values if not should_skip(v, cfg).skip]
    if not survivors:
        return _dropped(doc, DROP_SKIPPED)
    cleaned = [clean_text(v, cfg) for v in survivors]
    if not any(cleaned):
        return _dropped(doc, DROP_EMPTIED)
    tokens: list[str] = []
    for text in cleaned:
        kept = remove_stopwords(tokenize(text), cfg)
        if cfg.apply_lemmatization:
            kept = [lemmatize(t) for t in kept]
            # a lemma can land back on a stopword ("others" -> "other")
            kept = remove_stopwords(kept, cfg)
        tokens.extend(kept)
    if len(" ".join(tokens)) < cfg.min_chars:
        return _dropped(doc, DROP_BELOW_MIN)
    return CleanDocument(
        user_id=doc.user_id, label=doc.label, tokens=tuple(tokens), dropped=False
    )


def preprocess_corpus(
    documents, cfg: PreprocessConfig, workers: int = 1
) -> list[CleanDocument]:
    """Apply preprocess_document to every document, optionally in parallel.

    Results keep input order regardless of worker count, so output is
    independent of scheduling.
    """
    documents = list(documents)
    if workers <= 1 or len(documents) < 4 * max(workers, 1):
        return [preprocess_document(doc, cfg) for doc in documents]
    work = partial(preprocess_document, cfg=cfg)
    chunk = max(1, len(documents) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, documents, chunksize=chunk))


def write_clean_corpus(docs, path) -> None:
    """Serialize CleanDocuments to JSONL, one object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(
                json.dumps(
                    {
                        "user_id": doc.user_id,
                        "label": doc.label,
                        "tokens": list(doc.tokens),
                        "dropped": doc.dropped,
                        "drop_reason": doc.drop_reason,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_clean_corpus(path) -> list[CleanDocument]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                docs.append(
                    CleanDocument(
                        user_id=record["user_id"],
                        label=record["label"],
                        tokens=tuple(record["tokens"]),
                        dropped=record["dropped"],
                        drop_reason=record.get("drop_reason"),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise PreprocessError(f"{path}: line {line_no}: {exc}") from exc
    if not docs:
        raise PreprocessError(f"{path}: no cleaned documents found")
    return docs
