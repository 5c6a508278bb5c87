from collections import Counter
from math import log, sqrt

import numpy as np
import pytest

from textscreen.corpus import CONTROL, DIAGNOSED
from textscreen.features import (
    FeatureError,
    FeatureVector,
    FeaturizerConfig,
    Vocabulary,
    build_vocabulary,
    char_fourgram_config,
    extract_ngrams,
    read_vocabulary,
    stack_vectors,
    vectorize,
    word_bigram_config,
    write_vectors_csv,
    write_vocabulary,
)
from textscreen.preprocess import CleanDocument


def clean(tokens, user_id="u", label=DIAGNOSED):
    return CleanDocument(user_id=user_id, label=label, tokens=tuple(tokens), dropped=False)


def unigram_config(min_df=1, weighting="count"):
    return FeaturizerConfig(kind="word_ngram", n=1, min_df=min_df, weighting=weighting)


class TestExtractNgrams:
    def test_word_bigrams_with_repeats(self):
        doc = clean(["feel", "so", "alone", "feel", "so"])
        grams = extract_ngrams(doc, word_bigram_config())
        assert grams == Counter(
            {"feel so": 2, "so alone": 1, "alone feel": 1}
        )

    def test_char_fourgrams_include_the_joining_space(self):
        doc = clean(["sad", "cat"])
        grams = extract_ngrams(doc, char_fourgram_config())
        assert grams == Counter({"sad ": 1, "ad c": 1, "d ca": 1, " cat": 1})

    def test_short_document_yields_nothing(self):
        assert extract_ngrams(clean(["one"]), word_bigram_config()) == Counter()
        assert extract_ngrams(clean(["abc"]), char_fourgram_config()) == Counter()

    def test_dropped_document_rejected(self):
        doc = CleanDocument(user_id="u", label=DIAGNOSED, tokens=(), dropped=True,
                            drop_reason="skipped")
        with pytest.raises(FeatureError, match="dropped"):
            extract_ngrams(doc, word_bigram_config())

    def test_config_validation(self):
        with pytest.raises(FeatureError):
            FeaturizerConfig(kind="sentence", n=2)
        with pytest.raises(FeatureError):
            FeaturizerConfig(kind="word_ngram", n=0)
        with pytest.raises(FeatureError):
            FeaturizerConfig(kind="word_ngram", n=2, min_df=0)
        with pytest.raises(FeatureError):
            FeaturizerConfig(kind="word_ngram", n=2, weighting="binary")


class TestBuildVocabulary:
    def test_lexicographic_indices_and_df(self):
        corpus = [clean(["b", "a"]), clean(["a", "c"]), clean(["a"])]
        vocab = build_vocabulary(corpus, unigram_config())
        assert vocab.index == {"a": 0, "b": 1, "c": 2}
        assert vocab.document_frequency == {"a": 3, "b": 1, "c": 1}
        assert vocab.num_documents == 3
        assert vocab.dimension == 3

    def test_df_counts_documents_not_occurrences(self):
        corpus = [clean(["a", "a", "a"]), clean(["a"])]
        vocab = build_vocabulary(corpus, unigram_config())
        assert vocab.document_frequency["a"] == 2

    def test_min_df_prunes(self):
        corpus = [clean(["a", "b"]), clean(["a", "c"])]
        vocab = build_vocabulary(corpus, unigram_config(min_df=2))
        assert list(vocab.index) == ["a"]

    def test_order_independent(self):
        docs = [clean(["b", "a"]), clean(["a", "c"]), clean(["d"])]
        forward = build_vocabulary(docs, unigram_config())
        backward = build_vocabulary(list(reversed(docs)), unigram_config())
        assert forward.index == backward.index
        assert forward.document_frequency == backward.document_frequency

    def test_empty_corpus_and_empty_vocab_are_errors(self):
        with pytest.raises(FeatureError, match="empty"):
            build_vocabulary([], unigram_config())
        with pytest.raises(FeatureError, match="min_df"):
            build_vocabulary([clean(["a"]), clean(["b"])], unigram_config(min_df=2))


class TestVectorize:
    def _vocab(self):
        corpus = [clean(["a", "b", "a"]), clean(["b", "c"]), clean(["a"])]
        return corpus, build_vocabulary(corpus, unigram_config())

    def test_count_weighting_is_raw_counts(self):
        corpus, vocab = self._vocab()
        vec = vectorize(corpus[0], vocab, unigram_config(weighting="count"))
        assert vec.indices.tolist() == [0, 1]
        assert vec.values.tolist() == [2.0, 1.0]
        assert vec.dimension == 3

    def test_tfidf_matches_hand_formula(self):
        corpus, vocab = self._vocab()
        cfg = unigram_config(weighting="tfidf")
        # df over the three docs: a in docs 1 and 3, b in 1 and 2, c in 2 only
        idf_a = log((1 + 3) / (1 + 2)) + 1
        idf_b = log((1 + 3) / (1 + 2)) + 1
        idf_c = log((1 + 3) / (1 + 1)) + 1

        raw_d1 = np.array([2 * idf_a, 1 * idf_b])
        expected_d1 = raw_d1 / sqrt(float(raw_d1 @ raw_d1))
        vec1 = vectorize(corpus[0], vocab, cfg)
        np.testing.assert_allclose(vec1.values, expected_d1, rtol=0, atol=1e-15)

        raw_d2 = np.array([1 * idf_b, 1 * idf_c])
        expected_d2 = raw_d2 / sqrt(float(raw_d2 @ raw_d2))
        vec2 = vectorize(corpus[1], vocab, cfg)
        assert vec2.indices.tolist() == [1, 2]
        np.testing.assert_allclose(vec2.values, expected_d2, rtol=0, atol=1e-15)

    def test_tfidf_vectors_are_unit_norm(self):
        corpus, vocab = self._vocab()
        for doc in corpus:
            vec = vectorize(doc, vocab, unigram_config(weighting="tfidf"))
            assert np.linalg.norm(vec.values) == pytest.approx(1.0)

    def test_out_of_vocabulary_terms_ignored(self):
        _, vocab = self._vocab()
        vec = vectorize(clean(["a", "zz"]), vocab, unigram_config(weighting="count"))
        assert vec.indices.tolist() == [0]

    def test_fully_oov_document_is_zero_vector(self):
        _, vocab = self._vocab()
        vec = vectorize(clean(["zz"]), vocab, unigram_config(weighting="tfidf"))
        assert len(vec.indices) == 0
        assert vec.to_dense().tolist() == [0.0, 0.0, 0.0]


class TestFeatureVector:
    def test_invariants(self):
        with pytest.raises(FeatureError):
            FeatureVector(indices=np.array([1, 0]), values=np.array([1.0, 2.0]), dimension=3)
        with pytest.raises(FeatureError):
            FeatureVector(indices=np.array([0, 0]), values=np.array([1.0, 2.0]), dimension=3)
        with pytest.raises(FeatureError):
            FeatureVector(indices=np.array([3]), values=np.array([1.0]), dimension=3)
        with pytest.raises(FeatureError):
            FeatureVector(indices=np.array([0]), values=np.array([np.nan]), dimension=3)
        with pytest.raises(FeatureError):
            FeatureVector(indices=np.array([0]), values=np.array([1.0, 2.0]), dimension=3)

    def test_to_dense(self):
        vec = FeatureVector(indices=np.array([1, 3]), values=np.array([0.5, 2.0]), dimension=4)
        assert vec.to_dense().tolist() == [0.0, 0.5, 0.0, 2.0]


class TestStackVectors:
    def test_stack(self):
        vectors = [
            FeatureVector(indices=np.array([0, 2]), values=np.array([1.0, 2.0]), dimension=3),
            FeatureVector(indices=np.empty(0, dtype=np.int64), values=np.empty(0), dimension=3),
            FeatureVector(indices=np.array([1]), values=np.array([4.0]), dimension=3),
        ]
        matrix = stack_vectors(vectors)
        assert matrix.shape == (3, 3)
        np.testing.assert_array_equal(
            matrix.toarray(), [[1.0, 0.0, 2.0], [0.0, 0.0, 0.0], [0.0, 4.0, 0.0]]
        )

    def test_mixed_dimensions_rejected(self):
        vectors = [
            FeatureVector(indices=np.array([0]), values=np.array([1.0]), dimension=2),
            FeatureVector(indices=np.array([0]), values=np.array([1.0]), dimension=3),
        ]
        with pytest.raises(FeatureError, match="dimension"):
            stack_vectors(vectors)

    def test_empty_list_rejected(self):
        with pytest.raises(FeatureError):
            stack_vectors([])


class TestVocabularyFiles:
    def test_round_trip(self, tmp_path):
        corpus = [clean(["b", "a"]), clean(["a", "c"])]
        vocab = build_vocabulary(corpus, unigram_config())
        path = tmp_path / "vocab.tsv"
        write_vocabulary(vocab, path)
        loaded = read_vocabulary(path, num_documents=2)
        assert loaded == vocab

    def test_file_is_tab_separated_in_index_order(self, tmp_path):
        vocab = Vocabulary(index={"b": 1, "a": 0}, document_frequency={"a": 2, "b": 1},
                           num_documents=2)
        path = tmp_path / "vocab.tsv"
        write_vocabulary(vocab, path)
        assert path.read_text() == "a\t0\t2\nb\t1\t1\n"

    def test_bad_indices_rejected(self, tmp_path):
        path = tmp_path / "vocab.tsv"
        path.write_text("a\t0\t1\nb\t2\t1\n")
        with pytest.raises(FeatureError, match="0..V-1"):
            read_vocabulary(path, num_documents=2)

    def test_malformed_line_cites_number(self, tmp_path):
        path = tmp_path / "vocab.tsv"
        path.write_text("a\t0\t1\nbroken line\n")
        with pytest.raises(FeatureError, match="line 2"):
            read_vocabulary(path, num_documents=2)


class TestVectorsCsv:
    def test_format(self, tmp_path):
        vec = FeatureVector(indices=np.array([0, 2]), values=np.array([0.5, 1.0 / 3.0]),
                            dimension=3)
        path = tmp_path / "vectors.csv"
        write_vectors_csv(["doc1"], [vec], path)
        lines = path.read_text().splitlines()
        assert lines[0] == "doc_id,index,value"
        assert lines[1] == "doc1,0,0.5"
        assert lines[2] == "doc1,2,0.333333333"
