"""End-to-end experiments: split -> preprocess -> vectorize -> train -> evaluate.

One master seed drives every random choice through fixed offsets:

* split shuffle: ``seed + SPLIT_SEED_OFFSET``
* model seed (classical RNG, RFC tree ``i`` uses ``model_seed + i``, neural
  initialization, validation carve and epoch shuffles): ``seed + MODEL_SEED_OFFSET``
"""

from __future__ import annotations

import logging
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .classical import ALGORITHMS as CLASSICAL, ClassicalHyperparams, train_classifier
from .corpus import Corpus, train_test_split
from .errors import InvalidParameter, ManasError
from .metrics import (
    AggregateReport, Averages, ClassMetrics, ClassReport, ConfusionMatrix, ErrorReport,
    class_report, confusion_matrix, error_report, log_loss,
)
from .neural import (
    N_SPECIAL, EpochHistory, TrainConfig, add_special_tokens, encode_tokens, predict_sequences,
    train_neural,
)
from .preprocess import PreprocessConfig, preprocess_corpus
from .vectorize import build_vocabulary, vectorize_all

log = logging.getLogger(__name__)

NEURAL = ("rnn", "bert")
ALGORITHMS = CLASSICAL + NEURAL
# column order of the split-sweep table
SWEEP_ORDER = ("mnb", "rfc", "dtc", "svc", "knn", "lr", "rnn", "bert")
DISPLAY_NAMES = {"mnb": "MNB", "rfc": "RFC", "dtc": "DTC", "svc": "SVC", "knn": "K-NN",
                 "lr": "LR", "rnn": "RNN", "bert": "BERT"}
DEFAULT_FRACTIONS = (0.50, 0.60, 0.70, 0.75, 0.80, 0.90)
DEFAULT_TRAIN_FRACTION = {**{a: 0.90 for a in CLASSICAL}, "rnn": 0.75, "bert": 0.80}

SPLIT_SEED_OFFSET = 0
MODEL_SEED_OFFSET = 1


def default_neural_config(algorithm: str) -> TrainConfig:
    return TrainConfig.rnn() if algorithm == "rnn" else TrainConfig.transformer()


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    train_fraction: float | None = None
    seed: int = 0
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    classical: ClassicalHyperparams | None = None
    neural: TrainConfig | None = None
    min_count: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidParameter(f"unknown algorithm {self.algorithm!r}")
        if self.train_fraction is None:
            object.__setattr__(self, "train_fraction", DEFAULT_TRAIN_FRACTION[self.algorithm])
        if self.seed < 0:
            raise InvalidParameter("seed must be non-negative")
        if self.min_count < 1:
            raise InvalidParameter("min_count must be >= 1")

    @property
    def is_neural(self) -> bool:
        return self.algorithm in NEURAL

    def classical_params(self) -> ClassicalHyperparams:
        base = self.classical or ClassicalHyperparams()
        return replace(base, algorithm=self.algorithm, seed=self.seed + MODEL_SEED_OFFSET)

    def neural_params(self) -> TrainConfig:
        base = self.neural or default_neural_config(self.algorithm)
        kind = "rnn" if self.algorithm == "rnn" else "transformer"
        return replace(base, kind=kind, seed=self.seed + MODEL_SEED_OFFSET)

    def to_dict(self) -> dict:
        d = {"algorithm": self.algorithm, "train_fraction": self.train_fraction, "seed": self.seed,
             "min_count": self.min_count,
             "preprocess": {"punctuation": "".join(sorted(self.preprocess.punctuation_set)),
                            "n_stopwords": len(self.preprocess.stopword_list),
                            "casefold_ascii": self.preprocess.casefold_ascii}}
        if self.is_neural:
            d["neural"] = self.neural_params().to_dict()
        else:
            d["classical"] = self.classical_params().to_dict()
        return d


@dataclass
class ExperimentResult:
    algorithm: str
    config: dict
    n_train: int
    n_test: int
    confusion: ConfusionMatrix
    class_report: ClassReport
    aggregate: AggregateReport
    errors: ErrorReport
    accuracy: float
    train_accuracy: float
    train_loss: float
    test_loss: float
    history: EpochHistory | None = None
    runtime_seconds: float = 0.0
    model: object = field(default=None, repr=False, compare=False)
    vocabulary: object = field(default=None, repr=False, compare=False)

    @property
    def display_name(self) -> str:
        return DISPLAY_NAMES[self.algorithm]

    def to_dict(self, include_runtime: bool = False) -> dict:
        d = {
            "algorithm": self.algorithm,
            "config": self.config,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "confusion": asdict(self.confusion),
            "class_report": {str(c): asdict(m) for c, m in self.class_report.per_class.items()},
            "class_report_undefined": sorted(self.class_report.undefined),
            "aggregate": {"macro": asdict(self.aggregate.macro),
                          "weighted": asdict(self.aggregate.weighted)},
            "errors": self.errors.to_dict(),
            "accuracy": self.accuracy,
            "train_accuracy": self.train_accuracy,
            "train_loss": self.train_loss,
            "test_loss": self.test_loss,
            "history": None if self.history is None else self.history.to_list(),
        }
        if include_runtime:
            d["runtime_seconds"] = self.runtime_seconds
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentResult":
        errors = dict(d["errors"])
        errors["undefined"] = frozenset(errors.get("undefined", ()))
        return cls(
            algorithm=d["algorithm"],
            config=d["config"],
            n_train=d["n_train"],
            n_test=d["n_test"],
            confusion=ConfusionMatrix(**d["confusion"]),
            class_report=ClassReport({int(c): ClassMetrics(**m) for c, m in d["class_report"].items()},
                                     frozenset(d.get("class_report_undefined", ()))),
            aggregate=AggregateReport(Averages(**d["aggregate"]["macro"]),
                                      Averages(**d["aggregate"]["weighted"])),
            errors=ErrorReport(**errors),
            accuracy=d["accuracy"],
            train_accuracy=d["train_accuracy"],
            train_loss=d["train_loss"],
            test_loss=d["test_loss"],
            history=None if d.get("history") is None else EpochHistory.from_list(d["history"]),
            runtime_seconds=d.get("runtime_seconds", 0.0),
        )


class _Stage:
    """Tags any pipeline error raised inside the block with the stage name."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, ManasError) and exc.stage is None:
            exc.stage = self.name
        return False


def run_experiment(corpus: Corpus, config: ExperimentConfig, keep_model: bool = False) -> ExperimentResult:
    """Run one (algorithm, split, seed) experiment.

    The vocabulary and every fitted statistic come from the training split
    only; all reported metrics are computed on the test split.
    """
    started = time.perf_counter()
    with _Stage("split"):
        split = train_test_split(corpus, config.train_fraction, config.seed + SPLIT_SEED_OFFSET)
        train, test = corpus.subset(split.train_indices), corpus.subset(split.test_indices)
    with _Stage("preprocess"):
        train_tokens = preprocess_corpus(train.texts, config.preprocess)
        test_tokens = preprocess_corpus(test.texts, config.preprocess)
    with _Stage("vectorize"):
        vocab = build_vocabulary(train_tokens, config.min_count)
    y_train = np.asarray(train.labels)
    y_test = np.asarray(test.labels)

    history = None
    if config.is_neural:
        params = config.neural_params()
        with _Stage("vectorize"):
            body = params.max_len - 2 if params.kind == "transformer" else None
            enc = lambda docs: [add_special_tokens(encode_tokens(t, vocab, body)) for t in docs]  # noqa: E731
            train_seqs, test_seqs = enc(train_tokens), enc(test_tokens)
        with _Stage("train"):
            model, history = train_neural(train_seqs, train.labels, params, len(vocab) + N_SPECIAL)
        with _Stage("evaluate"):
            p_train = predict_sequences(model, train_seqs)
            p_test = predict_sequences(model, test_seqs)
    else:
        params = config.classical_params()
        with _Stage("vectorize"):
            F_train = vectorize_all(train_tokens, vocab, train.labels)
            F_test = vectorize_all(test_tokens, vocab, test.labels)
        with _Stage("train"):
            model = train_classifier(F_train, params)
        with _Stage("evaluate"):
            p_train = model.predict_proba_matrix(F_train.to_dense())
            p_test = model.predict_proba_matrix(F_test.to_dense())

    with _Stage("evaluate"):
        pred_test = (p_test >= 0.5).astype(np.int64)
        pred_train = (p_train >= 0.5).astype(np.int64)
        cm = confusion_matrix(y_test, pred_test)
        per_class, aggregate = class_report(y_test, pred_test)
        errors = error_report(y_test, pred_test, p_test)
        result = ExperimentResult(
            algorithm=config.algorithm,
            config=config.to_dict(),
            n_train=len(train),
            n_test=len(test),
            confusion=cm,
            class_report=per_class,
            aggregate=aggregate,
            errors=errors,
            accuracy=errors.accuracy,
            train_accuracy=float(np.mean(pred_train == y_train)),
            train_loss=log_loss(y_train, p_train),
            test_loss=errors.log_loss,
            history=history,
            runtime_seconds=time.perf_counter() - started,
        )
    if keep_model:
        result.model, result.vocabulary = model, vocab
    log.info("%s @ %.2f: accuracy %.4f (%.2fs)", config.algorithm, config.train_fraction,
             result.accuracy, result.runtime_seconds)
    return result


@dataclass
class SweepTable:
    fractions: tuple[float, ...]
    algorithms: tuple[str, ...]
    cells: dict[tuple[float, str], float]
    results: dict[tuple[float, str], ExperimentResult] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        missing = [(f, a) for f in self.fractions for a in self.algorithms if (f, a) not in self.cells]
        if missing:
            raise ValueError(f"incomplete sweep grid, missing {missing}")

    def rows(self) -> list[tuple[float, list[float]]]:
        return [(f, [self.cells[f, a] for a in self.algorithms]) for f in self.fractions]

    def to_dict(self) -> dict:
        return {"fractions": list(self.fractions), "algorithms": list(self.algorithms),
                "cells": [[self.cells[f, a] for a in self.algorithms] for f in self.fractions]}

    @classmethod
    def from_dict(cls, d: dict) -> "SweepTable":
        fr, al = tuple(d["fractions"]), tuple(d["algorithms"])
        return cls(fr, al, {(f, a): d["cells"][i][j] for i, f in enumerate(fr) for j, a in enumerate(al)})


def _run_cell(args):
    corpus, config = args
    return run_experiment(corpus, config)


def compare_splits(corpus: Corpus, algorithms: Sequence[str] = CLASSICAL,
                   fractions: Sequence[float] = DEFAULT_FRACTIONS, seed: int = 0,
                   base: ExperimentConfig | None = None, jobs: int = 1) -> SweepTable:
    """Test accuracy (percent) for every (fraction, algorithm) cell.

    Every cell uses the same seed, so all algorithms at one fraction see the
    same split. Columns follow the canonical order MNB, RFC, DTC, SVC, K-NN,
    LR (then RNN, BERT).
    """
    if not algorithms or not fractions:
        raise InvalidParameter("algorithms and fractions must be non-empty")
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise InvalidParameter(f"unknown algorithms {unknown}")
    algos = tuple(a for a in SWEEP_ORDER if a in set(algorithms))
    fracs = tuple(sorted(set(float(f) for f in fractions)))
    keys = [(f, a) for f in fracs for a in algos]
    configs = []
    for f, a in keys:
        if base is None:
            configs.append(ExperimentConfig(a, f, seed))
        else:
            configs.append(replace(base, algorithm=a, train_fraction=f, seed=seed))

    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_run_cell, [(corpus, c) for c in configs]))
    else:
        results = []
        for (f, a), c in zip(keys, configs):
            try:
                results.append(run_experiment(corpus, c))
            except ManasError as exc:
                exc.args = (f"cell fraction={f:.2f} algorithm={a}: {exc.args[0] if exc.args else ''}",)
                raise
    cells = {k: round(100.0 * r.accuracy, 2) for k, r in zip(keys, results)}
    return SweepTable(fracs, algos, cells, dict(zip(keys, results)))


def word_frequencies(corpus: Corpus, config: PreprocessConfig, top_k: int = 50) -> list[tuple[str, int]]:
    """Most frequent preprocessed tokens; ties are broken lexicographically."""
    if top_k < 1:
        raise InvalidParameter("top_k must be >= 1")
    counts = Counter()
    for tokens in preprocess_corpus(corpus.texts, config):
        counts.update(tokens)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_k]
