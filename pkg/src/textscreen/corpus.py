"""Load labeled user data and turn it into documents with reproducible splits.

Users arrive as two delimited files: one row per user carrying the label and
an optional bio, plus a tweets file with one row per tweet. Tweets are merged
per user, in file order, into a single newline-joined document so downstream
stages see one text unit per user.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

DIAGNOSED = "diagnosed"
CONTROL = "control"
LABELS = (DIAGNOSED, CONTROL)

SOURCE_TWEETS = "tweets_merged"
SOURCE_BIO = "bio"
SOURCES = (SOURCE_TWEETS, SOURCE_BIO)


class CorpusError(Exception):
    """Raised for schema violations, empty datasets, and bad split specs."""


@dataclass
class UserRecord:
    user_id: str
    label: str
    bio: str | None = None
    tweets: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.user_id:
            raise CorpusError("user_id must be non-empty")
        if self.label not in LABELS:
            raise CorpusError(
                f"label must be one of {LABELS}, got {self.label!r}"
            )


@dataclass(frozen=True)
class Document:
    user_id: str
    label: str
    source: str
    text: str


@dataclass(frozen=True)
class Dataset:
    documents: tuple[Document, ...]
    class_counts: dict[str, int]

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def labels(self) -> list[str]:
        return [doc.label for doc in self.documents]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise CorpusError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )


def _add_tweet(users: dict[str, UserRecord], row_no: int, user_id: str, text: str) -> None:
    if user_id not in users:
        raise CorpusError(
            f"tweets row {row_no}: user_id {user_id!r} not present in the users file"
        )
    users[user_id].tweets.append(text)


def _read_delimited(path, expected_header: tuple[str, ...], format: str):
    """Yield (row_number, record_dict) pairs; row numbers count from 1."""
    if format not in ("csv", "jsonl"):
        raise CorpusError(f"unknown format {format!r}; expected csv or jsonl")
    with open(path, encoding="utf-8", newline="") as fh:
        if format == "csv":
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return
            if tuple(reader.fieldnames) != expected_header:
                raise CorpusError(
                    f"{path}: expected header {','.join(expected_header)}, "
                    f"got {','.join(reader.fieldnames)}"
                )
            for row_no, row in enumerate(reader, start=2):
                yield row_no, row
        elif format == "jsonl":
            for row_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"{path}: line {row_no} is not valid JSON: {exc}") from exc
                yield row_no, record


def load_users(users_path, tweets_path=None, format: str = "csv") -> list[UserRecord]:
    """Load UserRecords from a users file plus an optional tweets file.

    The users file carries ``user_id,label,bio`` (bio may be empty); the
    tweets file carries ``user_id,text`` rows that are appended, in file
    order, to the matching user. Records are returned sorted by user_id so
    the result is independent of input row order.
    """
    users: dict[str, UserRecord] = {}
    rows = _read_delimited(users_path, ("user_id", "label", "bio"), format)
    for row_no, row in rows:
        user_id = row.get("user_id") or ""
        label = row.get("label") or ""
        bio = row.get("bio") or None
        if label not in LABELS:
            raise CorpusError(
                f"{users_path}: row {row_no}: label must be one of {LABELS}, got {label!r}"
            )
        if user_id in users:
            existing = users[user_id]
            if existing.label != label:
                raise CorpusError(
                    f"{users_path}: row {row_no}: conflicting labels for user {user_id!r}"
                )
            if bio is not None and existing.bio is not None and bio != existing.bio:
                raise CorpusError(
                    f"{users_path}: row {row_no}: conflicting bios for user {user_id!r}"
                )
            if bio is not None:
                existing.bio = bio
        else:
            users[user_id] = UserRecord(user_id=user_id, label=label, bio=bio)
    if not users:
        raise CorpusError(f"{users_path}: no user rows found")

    if tweets_path is not None:
        for row_no, row in _read_delimited(tweets_path, ("user_id", "text"), format):
            _add_tweet(users, row_no, row.get("user_id") or "", row.get("text") or "")

    return [users[user_id] for user_id in sorted(users)]


def build_documents(users: list[UserRecord], source: str) -> Dataset:
    """Build one Document per user that has the requested source.

    tweets_merged joins each user's tweets with a single newline; bio uses
    the bio text as-is. Users lacking the requested source are omitted.
    """
    if not users:
        raise CorpusError("build_documents needs at least one user")
    if source not in SOURCES:
        raise CorpusError(f"source must be one of {SOURCES}, got {source!r}")
    documents = []
    for user in users:
        if source == SOURCE_TWEETS:
            if not user.tweets:
                continue
            text = "\n".join(user.tweets)
        else:
            if not user.bio:
                continue
            text = user.bio
        documents.append(Document(user.user_id, user.label, source, text))
    if not documents:
        raise CorpusError(f"no documents with source {source!r}")
    return _make_dataset(documents)


def _make_dataset(documents) -> Dataset:
    counts = {label: 0 for label in LABELS}
    for doc in documents:
        counts[doc.label] += 1
    return Dataset(documents=tuple(documents), class_counts=counts)


def write_documents_jsonl(ds: Dataset, path) -> None:
    """Serialize a Dataset to JSONL, one document per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in ds.documents:
            fh.write(
                json.dumps(
                    {
                        "user_id": doc.user_id,
                        "label": doc.label,
                        "source": doc.source,
                        "text": doc.text,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_documents_jsonl(path) -> Dataset:
    documents = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                documents.append(
                    Document(
                        user_id=record["user_id"],
                        label=record["label"],
                        source=record["source"],
                        text=record["text"],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}: line {line_no}: {exc}") from exc
    if not documents:
        raise CorpusError(f"{path}: no documents found")
    sources = {doc.source for doc in documents}
    if len(sources) > 1:
        raise CorpusError(f"{path}: mixed document sources {sorted(sources)}")
    for doc in documents:
        if doc.label not in LABELS:
            raise CorpusError(f"{path}: label must be one of {LABELS}, got {doc.label!r}")
    return _make_dataset(documents)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def train_test_split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Partition a Dataset into train and test, deterministically from the seed.

    Train size is round(train_fraction * N), applied per class when
    stratified. The same (ds, spec) always yields the same membership.
    """
    rng = np.random.default_rng(spec.seed)
    n = len(ds.documents)
    if spec.stratified:
        for label, count in ds.class_counts.items():
            if 0 < count < 2:
                raise CorpusError(
                    f"stratified split needs >=2 documents per class; "
                    f"class {label!r} has {count}"
                )
        train_idx: list[int] = []
        test_idx: list[int] = []
        for label in sorted(set(ds.labels)):
            members = [i for i, doc in enumerate(ds.documents) if doc.label == label]
            order = rng.permutation(len(members))
            cut = _round_half_up(spec.train_fraction * len(members))
            # keep both sides non-empty so a tiny class never collapses
            cut = min(max(cut, 1), len(members) - 1)
            for j in order[:cut]:
                train_idx.append(members[j])
            for j in order[cut:]:
                test_idx.append(members[j])
        train_idx.sort()
        test_idx.sort()
    else:
        order = rng.permutation(n)
        cut = _round_half_up(spec.train_fraction * n)
        cut = min(max(cut, 1), n - 1)
        train_idx = sorted(int(i) for i in order[:cut])
        test_idx = sorted(int(i) for i in order[cut:])
    train_docs = [ds.documents[i] for i in train_idx]
    test_docs = [ds.documents[i] for i in test_idx]
    return _make_dataset(train_docs), _make_dataset(test_docs)
