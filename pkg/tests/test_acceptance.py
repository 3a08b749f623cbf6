"""Acceptance suite: one numbered criterion per marker, summarized after the run."""

import csv
import io
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from manas.classical import ClassicalHyperparams, train_classifier
from manas.cli import main
from manas.corpus import Corpus, train_test_split
from manas.harness import CLASSICAL, ExperimentConfig, compare_splits, run_experiment
from manas.metrics import confusion_matrix, error_report
from manas.neural import (
    N_SPECIAL, AdamState, RNNModel, TrainConfig, TransformerModel, adam_step, add_special_tokens, bce_loss,
    grad_check, pad_and_mask, steps_per_epoch,
)
from manas.persistence import load_model, save_model
from manas.preprocess import PreprocessConfig, preprocess_corpus
from manas.report import (
    AVERAGES_COLUMNS, AVERAGES_TITLE, ERRORS_COLUMNS, ERRORS_TITLE, NEURAL_COLUMNS, NEURAL_TITLE,
    PER_CLASS_COLUMNS, PER_CLASS_TITLE, SWEEP_TITLE, fmt, parse_report_csv, parse_report_markdown,
    render_report, split_label,
)
from manas.vectorize import build_vocabulary, vectorize_all
from test_metrics import check_against_oracle, check_identities, random_triple

acceptance = pytest.mark.acceptance

# Published per-algorithm MSE and RMSE pairs for the six classical models
PUBLISHED_MSE_RMSE = {
    "MNB": ("0.25", "0.49"), "RFC": ("0.08", "0.29"), "DTC": ("0.11", "0.33"),
    "SVC": ("0.11", "0.39"), "K-NN": ("0.13", "0.36"), "LR": ("0.15", "0.39"),
}
ROUNDING_SLACK = Fraction("0.015")


def sqrt_within(mse: Fraction, rmse: Fraction, tol: Fraction) -> bool:
    """Exact test of |sqrt(mse) - rmse| <= tol by squaring the interval bounds."""
    lo = max(rmse - tol, Fraction(0))
    return lo * lo <= mse <= (rmse + tol) ** 2


def features(corpus, split):
    cfg = PreprocessConfig()
    tr = preprocess_corpus([corpus.texts[i] for i in split.train_indices], cfg)
    te = preprocess_corpus([corpus.texts[i] for i in split.test_indices], cfg)
    vocab = build_vocabulary(tr)
    ftr = vectorize_all(tr, vocab, [corpus.labels[i] for i in split.train_indices])
    fte = vectorize_all(te, vocab, [corpus.labels[i] for i in split.test_indices])
    return ftr, fte, vocab


@acceptance(1, "split arithmetic: 443 x 0.75 -> 332 train, 6 steps of 52")
def test_split_arithmetic():
    corpus = Corpus.from_pairs([(f"ক{i}", i % 2) for i in range(443)])
    split = train_test_split(corpus, 0.75, 0)
    assert len(split.train_indices) == 332 == math.floor(443 * 0.75)
    assert len(split.test_indices) == 111
    assert steps_per_epoch(332, 52) == 6


@acceptance(2, "published MSE/RMSE pairs agree within 0.015 except the SVC row")
def test_published_rmse_consistency():
    verdicts = {}
    for name, (mse, rmse) in PUBLISHED_MSE_RMSE.items():
        verdicts[name] = sqrt_within(Fraction(mse), Fraction(rmse), ROUNDING_SLACK)
        # float cross-check of the exact verdict
        assert verdicts[name] == (abs(math.sqrt(float(mse)) - float(rmse)) <= 0.015)
    assert verdicts == {"MNB": True, "RFC": True, "DTC": True, "SVC": False, "K-NN": True, "LR": True}
    assert abs(math.sqrt(0.08) - 0.283) < 5e-4


@acceptance(3, "mae = 1 - accuracy, consistent with the published RFC pair")
def test_mae_accuracy_consistency():
    rng = random.Random(3)
    for _ in range(200):
        y_true, y_pred, y_prob = random_triple(rng)
        er = error_report(y_true, y_pred, y_prob)
        assert abs(er.mae - (1 - er.accuracy)) <= 1e-15
    # 92 of 100 right: the artifact reports mae 0.08
    er = error_report([1] * 50 + [0] * 50, [1] * 46 + [0] * 4 + [0] * 46 + [1] * 4, [0.5] * 100)
    assert er.mae == pytest.approx(0.08, abs=1e-15)
    published_mae, published_accuracy = 0.08, 0.91
    assert abs(published_mae - (1 - published_accuracy)) <= 0.015


@acceptance(4, "metric oracle fuzz over 1000 random triples")
def test_metric_oracle_fuzz():
    rng = random.Random(1000)
    for _ in range(1000):
        y_true, y_pred, y_prob = random_triple(rng)
        rep, _, er = check_against_oracle(y_true, y_pred, y_prob, tol=1e-12)
        check_identities(rep, er, confusion_matrix(y_true, y_pred))


@acceptance(5, "hand-computed fixtures: MNB posterior, Adam first step, BCE of ln 2")
def test_hand_fixtures():
    docs = [["ভাল", "ভাল"], ["খারাপ"]]
    vocab = build_vocabulary(docs)
    m = train_classifier(vectorize_all(docs, vocab, [1, 0]), ClassicalHyperparams(algorithm="mnb", mnb_alpha=1.0))
    x = np.zeros(len(vocab))
    x[vocab.token_to_index["ভাল"]] = 1
    assert abs(float(m.predict_proba_matrix(x[None, :])[0]) - 0.6923) <= 1e-4
    assert abs(float(m.predict_proba_matrix(x[None, :])[0]) - 9 / 13) <= 1e-6

    state = AdamState(lr=0.0005, beta1=0.9, beta2=0.999)
    params = {"w": np.array(0.0)}
    adam_step(state, params, {"w": np.array(1.0)})
    assert abs(float(params["w"]) - (-0.0005)) <= 1e-6

    assert abs(bce_loss(np.array([0.5]), np.array([1])) - math.log(2)) <= 1e-6


def _random_batch(rng, vocab_size, n=6, body=10):
    seqs = [add_special_tokens(rng.integers(N_SPECIAL, vocab_size, size=rng.integers(1, body)).tolist())
            for _ in range(n)]
    return pad_and_mask(seqs), rng.integers(0, 2, size=n)


@acceptance(6, "analytic gradients match finite differences on >= 200 coordinates")
@pytest.mark.parametrize("kind", ["rnn", "transformer"])
def test_gradient_checks(kind):
    rng = np.random.default_rng(0)
    batch, labels = _random_batch(rng, 60)
    # default-size models, 256 sampled coordinates
    assert grad_check(kind, batch, labels, vocab_size=60, n_coords=256, seed=0) < 1e-4


@acceptance(7, "attention masking and padding invariance")
def test_masking_and_padding():
    rng = np.random.default_rng(7)
    tf = TransformerModel.init(60, seed=1)
    batch, _ = _random_batch(rng, 60)
    keys = batch.attention_mask.astype(bool)[:, None, None, :]
    for a in tf.attention_weights(batch):
        assert np.where(keys, 0.0, a).max() < 1e-9
        assert np.abs(np.where(keys, a, 0.0).sum(axis=-1) - 1.0).max() <= 1e-9
    base = tf.forward(batch)
    assert np.abs(tf.forward(batch.repad(batch.shape[1] + 7)) - base).max() <= 1e-9

    rnn = RNNModel.init(60, seed=2)
    base = rnn.forward(batch)
    assert np.abs(rnn.forward(batch.repad(batch.shape[1] + 30)) - base).max() <= 1e-9


@acceptance(8, "learnability on the 400-document synthetic corpus")
def test_learnability(synth400):
    for algo in CLASSICAL:
        r = run_experiment(synth400, ExperimentConfig(algo, 0.75, 0))
        assert r.accuracy >= 0.90, (algo, r.accuracy)
    # neural defaults: RNN 15 epochs, batch 52, lr 0.0005; transformer 3 epochs
    neural = {a: run_experiment(synth400, ExperimentConfig(a, 0.75, 0)) for a in ("rnn", "bert")}
    for algo, r in neural.items():
        assert r.accuracy >= 0.85, (algo, r.accuracy)
    rnn_cfg = neural["rnn"].config["neural"]
    assert (rnn_cfg["epochs"], rnn_cfg["batch_size"], rnn_cfg["learning_rate"]) == (15, 52, 0.0005)
    assert neural["bert"].config["neural"]["epochs"] == 3

    ftr, fte, _ = features(synth400, train_test_split(synth400, 0.75, 0))
    X, first = np.unique(ftr.to_dense(), axis=0, return_index=True)
    y = ftr.y[first]
    for params in (ClassicalHyperparams(algorithm="knn", knn_k=1), ClassicalHyperparams(algorithm="dtc")):
        m = train_classifier((X, y), params)
        assert np.array_equal(m.predict_matrix(X), y), params.algorithm

    dtc = train_classifier(ftr, ClassicalHyperparams(algorithm="dtc", seed=1))
    rfc = train_classifier(ftr, ClassicalHyperparams(algorithm="rfc", rfc_n_trees=1, rfc_bootstrap=False,
                                                     rfc_max_features="all", seed=1))
    Q = fte.to_dense()
    assert np.array_equal(rfc.predict_proba_matrix(Q), dtc.predict_proba_matrix(Q))


@acceptance(9, "byte-identical compare-splits reports and bit-identical reloaded models")
def test_determinism(synth400, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MANAS_SEED", raising=False)
    assert main(["synth", "--n", "400", "--seed", "7", "--output", "corpus.csv", "--quiet"]) == 0
    outputs = []
    for run in ("a", "b"):
        assert main(["compare-splits", "--corpus", "corpus.csv", "--seed", "0", "--quiet",
                     "--results", f"{run}.json", "--report-md", f"{run}.md", "--report-csv", f"{run}.csv"]) == 0
        outputs.append([(tmp_path / f"{run}.{ext}").read_bytes() for ext in ("json", "md", "csv")])
    assert outputs[0] == outputs[1]

    ftr, _, vocab = features(synth400, train_test_split(synth400, 0.75, 0))
    Q = np.random.default_rng(9).integers(0, 3, size=(100, len(vocab))).astype(float)
    for algo in CLASSICAL:
        model = train_classifier(ftr, ClassicalHyperparams(algorithm=algo, seed=1))
        save_model(model, vocab, tmp_path / f"{algo}.mdl")
        loaded, _ = load_model(tmp_path / f"{algo}.mdl")
        assert loaded.predict_proba_matrix(Q).tobytes() == model.predict_proba_matrix(Q).tobytes(), algo
    rng = np.random.default_rng(10)
    V = len(vocab) + N_SPECIAL
    seqs = [add_special_tokens(rng.integers(N_SPECIAL, V, size=rng.integers(0, 20)).tolist()) for _ in range(100)]
    batch = pad_and_mask(seqs)
    for name, model in (("rnn", RNNModel.init(V, seed=3)), ("bert", TransformerModel.init(V, seed=3))):
        save_model(model, vocab, tmp_path / f"{name}.mdl")
        loaded, _ = load_model(tmp_path / f"{name}.mdl")
        assert loaded.forward(batch).tobytes() == model.forward(batch).tobytes(), name


@acceptance(10, "report column sets and lossless CSV round-trip")
def test_format_fidelity(synth400):
    results = [run_experiment(synth400, ExperimentConfig(a, 0.75, 0)) for a in ("mnb", "lr")]
    results.append(run_experiment(synth400, ExperimentConfig(
        "rnn", 0.75, 0, neural=TrainConfig.rnn(epochs=2, embed_dim=8, hidden_dim=8))))
    sweep = compare_splits(synth400, CLASSICAL, (0.50, 0.60, 0.70, 0.75, 0.80, 0.90), seed=0)

    text = render_report(results, "csv", sweep)
    doc = parse_report_csv(text)
    assert tuple(doc[PER_CLASS_TITLE][0]) == PER_CLASS_COLUMNS
    assert tuple(doc[AVERAGES_TITLE][0]) == AVERAGES_COLUMNS
    assert tuple(doc[ERRORS_TITLE][0]) == ERRORS_COLUMNS
    assert ERRORS_COLUMNS[-1] == "LL"
    assert tuple(doc[NEURAL_TITLE][0]) == NEURAL_COLUMNS
    assert doc[SWEEP_TITLE][0] == ["Train/Test Size", "MNB", "RFC", "DTC", "SVC", "K-NN", "LR"]
    assert [row[0] for row in doc[SWEEP_TITLE][1]] == [
        split_label(f) for f in (0.50, 0.60, 0.70, 0.75, 0.80, 0.90)]
    assert parse_report_markdown(render_report(results, "markdown", sweep)) == doc

    # every cell reads back to the value it was rendered from
    for r, row in zip(results, doc[ERRORS_TITLE][1]):
        e = r.errors
        for cell, v in zip(row[1:], (e.fpr, e.fnr, e.npv, e.fdr, e.mae, e.mse, e.rmse, e.log_loss)):
            assert cell == fmt(v) and abs(float(cell) - v) <= 0.005 + 1e-12
    for (f, cells), row in zip(sweep.rows(), doc[SWEEP_TITLE][1]):
        assert [float(c) for c in row[1:]] == list(cells)

    rebuilt = []
    for title, (header, rows) in doc.items():
        rebuilt.append([title])
        rebuilt.append(header)
        rebuilt.extend(rows)
        rebuilt.append([])
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rebuilt)
    assert buf.getvalue() == text
