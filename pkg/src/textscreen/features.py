"""Sparse n-gram features over cleaned documents.

Word n-grams slide over tokens; char n-grams slide over the space-joined
token string, spaces included. Vocabulary indices are assigned in
lexicographic term order so results never depend on corpus order, and the
vocabulary is built from training documents only.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from math import log, sqrt

import numpy as np
from scipy import sparse

from .preprocess import CleanDocument

KIND_WORD = "word_ngram"
KIND_CHAR = "char_ngram"
KINDS = (KIND_WORD, KIND_CHAR)

WEIGHT_COUNT = "count"
WEIGHT_TFIDF = "tfidf"
WEIGHTINGS = (WEIGHT_COUNT, WEIGHT_TFIDF)


class FeatureError(Exception):
    """Raised for invalid featurizer configs and unusable vocabularies."""


@dataclass(frozen=True)
class FeaturizerConfig:
    kind: str
    n: int
    min_df: int = 1
    weighting: str = WEIGHT_TFIDF

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise FeatureError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n < 1:
            raise FeatureError(f"n must be >= 1, got {self.n}")
        if self.min_df < 1:
            raise FeatureError(f"min_df must be >= 1, got {self.min_df}")
        if self.weighting not in WEIGHTINGS:
            raise FeatureError(
                f"weighting must be one of {WEIGHTINGS}, got {self.weighting!r}"
            )


def word_bigram_config(min_df: int = 2, weighting: str = WEIGHT_TFIDF) -> FeaturizerConfig:
    return FeaturizerConfig(kind=KIND_WORD, n=2, min_df=min_df, weighting=weighting)


def char_fourgram_config(min_df: int = 1, weighting: str = WEIGHT_TFIDF) -> FeaturizerConfig:
    return FeaturizerConfig(kind=KIND_CHAR, n=4, min_df=min_df, weighting=weighting)


@dataclass(frozen=True)
class Vocabulary:
    index: dict[str, int]
    document_frequency: dict[str, int]
    num_documents: int

    @property
    def dimension(self) -> int:
        return len(self.index)


@dataclass(frozen=True)
class FeatureVector:
    indices: np.ndarray
    values: np.ndarray
    dimension: int

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.values):
            raise FeatureError("indices and values must have equal length")
        if len(self.indices) and (
            np.any(np.diff(self.indices) <= 0)
            or self.indices[0] < 0
            or self.indices[-1] >= self.dimension
        ):
            raise FeatureError("indices must be strictly increasing and < dimension")
        if len(self.values) and not np.all(np.isfinite(self.values)):
            raise FeatureError("values must be finite")

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dimension)
        dense[self.indices] = self.values
        return dense


def extract_ngrams(doc: CleanDocument, cfg: FeaturizerConfig) -> Counter:
    """Sliding-window term multiset for one document.

    Documents shorter than the window yield an empty multiset.
    """
    if doc.dropped:
        raise FeatureError(f"document {doc.user_id!r} was dropped during preprocessing")
    if cfg.kind == KIND_WORD:
        units: list[str] | str = list(doc.tokens)
        joiner = " "
    else:
        units = " ".join(doc.tokens)
        joiner = ""
    count = len(units) - cfg.n + 1
    if count <= 0:
        return Counter()
    return Counter(joiner.join(units[i : i + cfg.n]) for i in range(count))


def build_vocabulary(corpus, cfg: FeaturizerConfig) -> Vocabulary:
    """Index every term with document frequency >= min_df, lexicographically."""
    corpus = list(corpus)
    if not corpus:
        raise FeatureError("cannot build a vocabulary from an empty corpus")
    df: Counter = Counter()
    for doc in corpus:
        df.update(extract_ngrams(doc, cfg).keys())
    kept = sorted(term for term, count in df.items() if count >= cfg.min_df)
    if not kept:
        raise FeatureError(
            f"no term reaches min_df={cfg.min_df}; vocabulary would be empty"
        )
    return Vocabulary(
        index={term: i for i, term in enumerate(kept)},
        document_frequency={term: df[term] for term in kept},
        num_documents=len(corpus),
    )


def vectorize(doc: CleanDocument, vocab: Vocabulary, cfg: FeaturizerConfig) -> FeatureVector:
    """Sparse vector of one document against a fixed vocabulary.

    Out-of-vocabulary terms are ignored. tfidf weighting scales counts by
    ln((1+N)/(1+df)) + 1 and L2-normalizes the result; a document with no
    in-vocabulary terms stays the zero vector.
    """
    counts = extract_ngrams(doc, cfg)
    triples = sorted(
        (vocab.index[term], float(count), term)
        for term, count in counts.items()
        if term in vocab.index
    )
    if not triples:
        return FeatureVector(
            indices=np.empty(0, dtype=np.int64),
            values=np.empty(0),
            dimension=vocab.dimension,
        )
    indices = np.array([idx for idx, _, _ in triples], dtype=np.int64)
    values = np.array([count for _, count, _ in triples])
    if cfg.weighting == WEIGHT_TFIDF:
        n = vocab.num_documents
        idf = np.array(
            [
                log((1 + n) / (1 + vocab.document_frequency[term])) + 1
                for _, _, term in triples
            ]
        )
        values = values * idf
        norm = sqrt(float(np.dot(values, values)))
        if norm > 0:
            values = values / norm
    return FeatureVector(indices=indices, values=values, dimension=vocab.dimension)


def stack_vectors(vectors) -> sparse.csr_matrix:
    """Stack FeatureVectors of one dimension into a CSR matrix."""
    vectors = list(vectors)
    if not vectors:
        raise FeatureError("cannot stack zero vectors")
    dim = vectors[0].dimension
    for v in vectors:
        if v.dimension != dim:
            raise FeatureError(f"mixed dimensions: {v.dimension} != {dim}")
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for row, v in enumerate(vectors):
        indptr[row + 1] = indptr[row] + len(v.indices)
    indices = np.concatenate([v.indices for v in vectors]) if indptr[-1] else np.empty(0, dtype=np.int64)
    data = np.concatenate([v.values for v in vectors]) if indptr[-1] else np.empty(0)
    return sparse.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


def write_vocabulary(vocab: Vocabulary, path) -> None:
    """Serialize as ``term<TAB>index<TAB>df`` lines in index order."""
    terms = sorted(vocab.index, key=vocab.index.__getitem__)
    with open(path, "w", encoding="utf-8") as fh:
        for term in terms:
            fh.write(f"{term}\t{vocab.index[term]}\t{vocab.document_frequency[term]}\n")


def read_vocabulary(path, num_documents: int) -> Vocabulary:
    index: dict[str, int] = {}
    df: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                term, idx, count = line.rstrip("\n").split("\t")
                index[term] = int(idx)
                df[term] = int(count)
            except ValueError as exc:
                raise FeatureError(f"{path}: line {line_no}: {exc}") from exc
    if not index:
        raise FeatureError(f"{path}: empty vocabulary file")
    if sorted(index.values()) != list(range(len(index))):
        raise FeatureError(f"{path}: indices are not 0..V-1")
    return Vocabulary(index=index, document_frequency=df, num_documents=num_documents)


def write_vectors_csv(doc_ids, vectors, path) -> None:
    """Debug dump: one ``doc_id,index,value`` row per nonzero entry."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "index", "value"])
        for doc_id, vec in zip(doc_ids, vectors):
            for idx, val in zip(vec.indices, vec.values):
                writer.writerow([doc_id, int(idx), format(float(val), ".9g")])
