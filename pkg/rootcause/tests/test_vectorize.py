import math

import numpy as np
import pytest

from rootcause.core.textprep import TokenStream
from rootcause.core.vectorize import (
    Vocabulary,
    VocabularyError,
    fit_vocabulary,
    tfidf,
    tfidf_matrix,
)


def _docs(*texts):
    return [TokenStream(tuple(text.split()), f"d{i}") for i, text in enumerate(texts)]


def _random_corpus(rng):
    n_terms = int(rng.integers(1, 51))
    terms = [f"t{i:02d}" for i in range(n_terms)]
    docs = []
    for d in range(int(rng.integers(1, 31))):
        length = int(rng.integers(0, 15))
        docs.append(TokenStream(tuple(str(t) for t in rng.choice(terms, size=length)), f"d{d}"))
    return docs


def test_term_in_every_document_is_kept_with_full_frequency():
    vocab = fit_vocabulary(_docs("test", "test case", "test run"), min_df=1, max_df_ratio=1.0)
    assert vocab.doc_freq[vocab.index["test"]] == 3
    assert vocab.corpus_size == 3


def test_rare_term_is_dropped_by_min_df():
    docs = _docs("unique common", *["common"] * 99)
    vocab = fit_vocabulary(docs, min_df=2, max_df_ratio=1.0)
    assert "unique" not in vocab
    assert "common" in vocab


def test_max_df_ratio_drops_ubiquitous_terms():
    vocab = fit_vocabulary(_docs("a b", "a c", "a b"), min_df=1, max_df_ratio=0.9)
    assert vocab.terms == ("b", "c")


def test_vocabulary_matches_a_naive_oracle():
    rng = np.random.default_rng(7)
    for _ in range(50):
        docs = _random_corpus(rng)
        min_df = int(rng.integers(1, 3))
        ratio = float(rng.choice([0.5, 0.95, 1.0]))
        expected = sorted(
            term for term in {t for doc in docs for t in doc.tokens}
            if min_df <= sum(term in doc.tokens for doc in docs) <= ratio * len(docs)
        )
        if not expected:
            with pytest.raises(VocabularyError):
                fit_vocabulary(docs, min_df, ratio)
            continue
        vocab = fit_vocabulary(docs, min_df, ratio)
        assert list(vocab.terms) == expected
        for term, df in zip(vocab.terms, vocab.doc_freq):
            assert df == sum(term in doc.tokens for doc in docs)


def test_fit_errors():
    with pytest.raises(VocabularyError):
        fit_vocabulary([], 1, 1.0)
    with pytest.raises(VocabularyError):
        fit_vocabulary(_docs("a", "b"), min_df=2, max_df_ratio=1.0)


def test_weight_is_count_times_natural_log_idf():
    docs = _docs("alpha alpha beta", "beta", "beta gamma", "gamma")
    vocab = fit_vocabulary(docs, min_df=1, max_df_ratio=1.0)
    row = tfidf(docs[0], vocab).toarray()[0]
    assert row[vocab.index["alpha"]] == pytest.approx(2 * math.log(4), abs=1e-12)
    assert row[vocab.index["alpha"]] == pytest.approx(2.7726, abs=1e-4)
    assert row[vocab.index["beta"]] == pytest.approx(math.log(4 / 3), abs=1e-12)


def test_term_in_every_document_weighs_zero_and_is_not_stored():
    docs = _docs("test test test", "test", "test other")
    vocab = fit_vocabulary(docs, min_df=1, max_df_ratio=1.0)
    matrix = tfidf_matrix(docs, vocab)
    assert matrix[:, vocab.index["test"]].nnz == 0
    assert not np.any(matrix.data == 0)


def test_empty_stream_is_a_zero_vector():
    vocab = fit_vocabulary(_docs("a b", "b c"), min_df=1, max_df_ratio=1.0)
    vector = tfidf(TokenStream((), "empty"), vocab)
    assert vector.shape == (1, len(vocab))
    assert vector.nnz == 0


def test_out_of_vocabulary_terms_contribute_nothing():
    vocab = fit_vocabulary(_docs("a b", "b c"), min_df=1, max_df_ratio=1.0)
    assert tfidf(TokenStream(("zzz",)), vocab).nnz == 0


def test_weights_match_a_two_loop_oracle():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 200:
        docs = _random_corpus(rng)
        try:
            vocab = fit_vocabulary(docs, min_df=1, max_df_ratio=1.0)
        except VocabularyError:
            continue
        matrix = tfidf_matrix(docs, vocab).toarray()
        assert matrix.shape == (len(docs), len(vocab))
        for d, doc in enumerate(docs):
            for w, term in enumerate(vocab.terms):
                df = sum(term in other.tokens for other in docs)
                expected = doc.tokens.count(term) * math.log(len(docs) / df)
                assert abs(matrix[d, w] - expected) < 1e-9
        assert (matrix >= 0).all()
        checked += 1


def test_weight_grows_with_in_document_count():
    docs = _docs("x y", "y", "x x y", "y z")
    vocab = fit_vocabulary(docs, min_df=1, max_df_ratio=1.0)
    weights = tfidf_matrix(docs, vocab).toarray()[:, vocab.index["x"]]
    assert weights[2] > weights[0] > 0


def test_l2_normalization_gives_unit_rows():
    docs = _docs("a b b", "b c", "c d", "")
    vocab = fit_vocabulary(docs, min_df=1, max_df_ratio=1.0)
    matrix = tfidf_matrix(docs, vocab, l2_normalize=True).toarray()
    norms = np.linalg.norm(matrix, axis=1)
    assert norms[:3] == pytest.approx([1.0, 1.0, 1.0])
    assert norms[3] == 0.0


def test_vocabulary_file_round_trip(tmp_path):
    vocab = fit_vocabulary(_docs("a b", "b c", "c a"), min_df=1, max_df_ratio=1.0)
    path = tmp_path / "vocab.json"
    vocab.save(path)
    loaded = Vocabulary.load(path)
    assert loaded == vocab
    assert loaded.fingerprint() == vocab.fingerprint()


def test_vocabulary_invariants_are_enforced():
    with pytest.raises(VocabularyError):
        Vocabulary(("b", "a"), (1, 1), 2)
    with pytest.raises(VocabularyError):
        Vocabulary(("a",), (3,), 2)
    with pytest.raises(VocabularyError):
        Vocabulary.from_dict({"schema_version": 99, "terms": [], "doc_freq": [], "corpus_size": 1})
