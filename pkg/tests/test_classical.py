import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from manas.classical import (
    ALGORITHMS, ClassicalHyperparams, DecisionTree, LogisticRegression, MultinomialNB, RandomForest,
    predict, predict_proba, train_classifier,
)
from manas.classical.base import sigmoid
from manas.classical.tree import resolve_max_features
from manas.errors import DimensionMismatch, InsufficientData, InvalidParameter, SingleClassTraining
from manas.preprocess import PreprocessConfig, preprocess_corpus
from manas.vectorize import build_vocabulary, vectorize, vectorize_all


@pytest.fixture(scope="module")
def hand_corpus():
    docs = [["ভাল", "ভাল"], ["খারাপ"]]
    vocab = build_vocabulary(docs)
    return vectorize_all(docs, vocab, [1, 0]), vocab


def _params(algo, **kw):
    return ClassicalHyperparams(algorithm=algo, **kw)


def _distinct_rows(seed, n=40, v=12):
    rng = np.random.default_rng(seed)
    X = np.unique(rng.integers(0, 4, size=(n, v)).astype(float), axis=0)
    y = rng.integers(0, 2, size=len(X))
    y[:2] = [0, 1]
    return X, y


class TestNaiveBayes:
    def test_hand_likelihoods(self, hand_corpus):
        fm, vocab = hand_corpus
        m = train_classifier(fm, _params("mnb", mnb_alpha=1.0))
        good = vocab.token_to_index["ভাল"]
        lik = np.exp(m.feature_log_prob)
        assert lik[1, good] == pytest.approx(3 / 4, abs=1e-12)
        assert lik[0, good] == pytest.approx(1 / 3, abs=1e-12)
        np.testing.assert_allclose(np.exp(m.class_log_prior), [0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(lik.sum(axis=1), 1.0, atol=1e-12)

    def test_hand_posterior(self, hand_corpus):
        fm, vocab = hand_corpus
        m = train_classifier(fm, _params("mnb"))
        x = vectorize(["ভাল"], vocab)
        expected = 0.375 / (0.375 + 0.5 / 3)
        assert predict_proba(m, x) == pytest.approx(expected, abs=1e-12)
        assert predict_proba(m, x) == pytest.approx(0.6923, abs=1e-4)
        assert predict(m, x) == 1

    def test_duplication_invariance(self):
        X, y = _distinct_rows(3)
        a = MultinomialNB.fit(X, y)
        b = MultinomialNB.fit(np.vstack([X, X]), np.concatenate([y, y]))
        Q = np.random.default_rng(0).integers(0, 3, size=(30, X.shape[1])).astype(float)
        # smoothing keeps the same alpha, so compare with doubled alpha
        b2 = MultinomialNB.fit(np.vstack([X, X]), np.concatenate([y, y]), alpha=2.0)
        np.testing.assert_allclose(a.predict_proba_matrix(Q), b2.predict_proba_matrix(Q), atol=1e-12)
        np.testing.assert_allclose(a.class_log_prior, b.class_log_prior, atol=1e-12)

    def test_class_probabilities_sum_to_one(self):
        X, y = _distinct_rows(4)
        m = MultinomialNB.fit(X, y)
        jll = m.joint_log_likelihood(X)
        p = np.exp(jll - jll.max(axis=1, keepdims=True))
        p /= p.sum(axis=1, keepdims=True)
        np.testing.assert_allclose(p[:, 1], m.predict_proba_matrix(X), atol=1e-12)


class TestLinear:
    def test_zero_weights_tie_to_one(self):
        m = LogisticRegression(3, np.zeros(3), 0.0)
        assert predict_proba(m, np.zeros(3)) == 0.5
        assert predict(m, np.zeros(3)) == 1

    def test_sigmoid_stable(self):
        z = np.array([-1000.0, -30.0, 0.0, 30.0, 1000.0])
        p = sigmoid(z)
        assert np.all(np.isfinite(p)) and p[2] == 0.5
        np.testing.assert_allclose(p + sigmoid(-z), 1.0, atol=1e-15)

    @pytest.mark.parametrize("algo", ["lr", "svc"])
    def test_separable_data(self, algo):
        X = np.array([[3, 0], [2, 0], [0, 2], [0, 3]], dtype=float)
        y = np.array([1, 1, 0, 0])
        m = train_classifier((X, y), _params(algo))
        np.testing.assert_array_equal(m.predict_matrix(X), y)


class TestKNN:
    def test_k1_returns_stored_label(self):
        X, y = _distinct_rows(5)
        m = train_classifier((X, y), _params("knn", knn_k=1))
        for i in range(len(X)):
            assert predict(m, X[i]) == y[i]

    def test_distance_tie_goes_to_lower_index(self):
        X = np.array([[1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
        y = np.array([1, 0, 0])
        m = train_classifier((X, y), _params("knn", knn_k=1))
        # the origin is equidistant from rows 0 and 1
        assert predict_proba(m, np.zeros(2)) == 1.0
        np.testing.assert_array_equal(m.neighbors(np.zeros((1, 2))), [[0]])

    def test_majority_vote_equals_threshold(self):
        X, y = _distinct_rows(6)
        m = train_classifier((X, y), _params("knn", knn_k=5))
        Q = np.random.default_rng(1).integers(0, 4, size=(50, X.shape[1])).astype(float)
        votes = y[m.neighbors(Q)]
        majority = (votes.sum(axis=1) > m.k / 2).astype(int)
        np.testing.assert_array_equal(m.predict_matrix(Q), majority)

    def test_insufficient_rows(self):
        with pytest.raises(InsufficientData):
            train_classifier((np.eye(3), np.array([0, 1, 0])), _params("knn", knn_k=5))

    def test_even_k_rejected(self):
        with pytest.raises(InvalidParameter):
            _params("knn", knn_k=4)


class TestTrees:
    @pytest.mark.parametrize("seed", range(5))
    def test_dtc_fits_distinct_rows(self, seed):
        X, y = _distinct_rows(seed)
        m = train_classifier((X, y), _params("dtc"))
        np.testing.assert_array_equal(m.predict_matrix(X), y)
        leaves = m.counts[m.feature < 0]
        assert np.all(leaves.sum(axis=1) > 0)

    def test_max_depth(self):
        X, y = _distinct_rows(1)
        m = DecisionTree.fit(X, y, max_depth=1)
        assert m.n_nodes <= 3

    def test_gini_tie_prefers_lower_feature(self):
        # features 0 and 2 are identical perfect splitters
        X = np.array([[0, 5, 0], [0, 1, 0], [1, 5, 1], [1, 1, 1]], dtype=float)
        y = np.array([0, 0, 1, 1])
        m = DecisionTree.fit(X, y)
        assert m.feature[0] == 0 and m.threshold[0] == 0.5

    @pytest.mark.parametrize("seed", range(4))
    def test_single_tree_forest_equals_dtc(self, seed):
        X, y = _distinct_rows(seed)
        dtc = train_classifier((X, y), _params("dtc", seed=seed))
        rfc = train_classifier((X, y), _params("rfc", rfc_n_trees=1, rfc_bootstrap=False,
                                               rfc_max_features="all", seed=seed))
        Q = np.random.default_rng(seed).integers(0, 4, size=(100, X.shape[1])).astype(float)
        np.testing.assert_array_equal(rfc.predict_proba_matrix(Q), dtc.predict_proba_matrix(Q))

    def test_forest_mean_within_tree_range(self):
        X, y = _distinct_rows(2)
        rfc = RandomForest.fit(X, y, n_trees=15, seed=3)
        Q = np.random.default_rng(2).integers(0, 4, size=(60, X.shape[1])).astype(float)
        per_tree = rfc.tree_probas(Q)
        p = rfc.predict_proba_matrix(Q)
        np.testing.assert_allclose(p, per_tree.mean(axis=0), atol=1e-15)
        assert np.all(p >= per_tree.min(axis=0)) and np.all(p <= per_tree.max(axis=0))
        assert len(rfc.trees) == 15 and rfc.tree_seeds == tuple(range(3, 18))

    def test_parallel_forest_identical(self):
        X, y = _distinct_rows(7)
        a = RandomForest.fit(X, y, n_trees=8, seed=1)
        b = RandomForest.fit(X, y, n_trees=8, seed=1, n_jobs=4)
        for ta, tb in zip(a.trees, b.trees):
            for k in ("feature", "threshold", "left", "right", "counts"):
                np.testing.assert_array_equal(getattr(ta, k), getattr(tb, k))

    def test_resolve_max_features(self):
        assert resolve_max_features("sqrt", 100) == 10
        assert resolve_max_features("all", 7) == 7
        assert resolve_max_features("sqrt", 1) == 1


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_single_class_rejected_or_knn_ok(algo):
    X = np.eye(5)
    y = np.zeros(5, dtype=int)
    if algo == "knn":
        train_classifier((X, y), _params(algo))
        return
    with pytest.raises(SingleClassTraining):
        train_classifier((X, y), _params(algo))


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_dimension_mismatch(algo):
    X, y = _distinct_rows(0)
    m = train_classifier((X, y), _params(algo, rfc_n_trees=3))
    with pytest.raises(DimensionMismatch):
        m.predict_proba_matrix(np.zeros((2, X.shape[1] + 1)))


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_deterministic_parameters(algo):
    X, y = _distinct_rows(9)
    p = _params(algo, rfc_n_trees=5, seed=4)
    a, b = train_classifier((X, y), p), train_classifier((X, y), p)
    sa, sb = a.state(), b.state()
    assert sa[0] == sb[0]
    for k in sa[1]:
        np.testing.assert_array_equal(sa[1][k], sb[1][k])


@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 20), st.just(6)), elements=st.integers(0, 5)),
       st.sampled_from(ALGORITHMS))
@settings(max_examples=60, deadline=None)
def test_proba_range_and_threshold(Q, algo):
    X, y = _distinct_rows(11, v=6)
    m = train_classifier((X, y), _params(algo, rfc_n_trees=5))
    p = m.predict_proba_matrix(Q)
    assert np.all((p >= 0) & (p <= 1))
    np.testing.assert_array_equal(m.predict_matrix(Q), (p >= 0.5).astype(int))


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_learnable_at_075(synth400, algo):
    from manas.corpus import train_test_split

    s = train_test_split(synth400, 0.75, 0)
    cfg = PreprocessConfig()
    tr = preprocess_corpus([synth400.texts[i] for i in s.train_indices], cfg)
    te = preprocess_corpus([synth400.texts[i] for i in s.test_indices], cfg)
    vocab = build_vocabulary(tr)
    ftr = vectorize_all(tr, vocab, [synth400.labels[i] for i in s.train_indices])
    fte = vectorize_all(te, vocab, [synth400.labels[i] for i in s.test_indices])
    m = train_classifier(ftr, _params(algo, seed=1))
    acc = np.mean(m.predict_matrix(fte.to_dense()) == fte.y)
    assert acc >= 0.90


def test_hyperparam_validation():
    with pytest.raises(InvalidParameter):
        _params("xgb")
    with pytest.raises(InvalidParameter):
        _params("mnb", mnb_alpha=0.0)
    with pytest.raises(InvalidParameter):
        _params("rfc", rfc_max_features="log2")
    assert math.isclose(_params("lr").lr_learning_rate, 0.1)
