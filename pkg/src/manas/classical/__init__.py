"""The six bag-of-words classifiers: MNB, LR, KNN, DTC, RFC and SVC."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import InsufficientData, InvalidParameter, SingleClassTraining
from ..vectorize import CountVector, FeatureMatrix
from .base import ClassicalModel
from .knn import KNearestNeighbors
from .linear import LinearSVC, LogisticRegression
from .naive_bayes import MultinomialNB
from .tree import DecisionTree, RandomForest

ALGORITHMS = ("mnb", "lr", "knn", "dtc", "rfc", "svc")

MODEL_CLASSES: dict[str, type[ClassicalModel]] = {
    "mnb": MultinomialNB,
    "lr": LogisticRegression,
    "knn": KNearestNeighbors,
    "dtc": DecisionTree,
    "rfc": RandomForest,
    "svc": LinearSVC,
}


@dataclass(frozen=True)
class ClassicalHyperparams:
    algorithm: str = "rfc"
    mnb_alpha: float = 1.0
    knn_k: int = 5
    knn_metric: str = "euclidean"
    tree_criterion: str = "gini"
    tree_max_depth: int | None = None
    rfc_n_trees: int = 100
    rfc_max_features: str = "sqrt"
    rfc_bootstrap: bool = True
    lr_learning_rate: float = 0.1
    lr_l2: float = 1e-4
    lr_epochs: int = 300
    svc_c: float = 1.0
    svc_learning_rate: float = 0.01
    svc_epochs: int = 300
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidParameter(f"unknown classical algorithm {self.algorithm!r}")
        positive = {
            "mnb_alpha": self.mnb_alpha, "knn_k": self.knn_k, "rfc_n_trees": self.rfc_n_trees,
            "lr_learning_rate": self.lr_learning_rate, "lr_epochs": self.lr_epochs,
            "svc_c": self.svc_c, "svc_learning_rate": self.svc_learning_rate,
            "svc_epochs": self.svc_epochs, "n_jobs": self.n_jobs,
        }
        for name, value in positive.items():
            if not value > 0:
                raise InvalidParameter(f"{name} must be positive, got {value}")
        if self.lr_l2 < 0:
            raise InvalidParameter("lr_l2 must be non-negative")
        if self.knn_k % 2 == 0:
            raise InvalidParameter("knn_k must be odd")
        if self.knn_metric != "euclidean":
            raise InvalidParameter(f"unsupported knn_metric {self.knn_metric!r}")
        if self.tree_criterion != "gini":
            raise InvalidParameter(f"unsupported tree_criterion {self.tree_criterion!r}")
        if self.tree_max_depth is not None and self.tree_max_depth < 1:
            raise InvalidParameter("tree_max_depth must be a positive integer or None")
        if self.rfc_max_features not in ("sqrt", "all"):
            raise InvalidParameter(f"unsupported rfc_max_features {self.rfc_max_features!r}")
        if self.seed < 0:
            raise InvalidParameter("seed must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


def _dense(features) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(features, FeatureMatrix):
        return features.to_dense(), features.y
    X, y = features
    return np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64)


def train_classifier(features: FeatureMatrix, params: ClassicalHyperparams) -> ClassicalModel:
    """Fit ``params.algorithm`` on a feature matrix (or an ``(X, y)`` pair)."""
    X, y = _dense(features)
    algo = params.algorithm
    if algo == "knn":
        if len(y) < params.knn_k:
            raise InsufficientData(f"KNN needs at least k={params.knn_k} rows, got {len(y)}")
    elif len(np.unique(y)) < 2:
        raise SingleClassTraining(f"{algo.upper()} needs examples of both classes")

    if algo == "mnb":
        return MultinomialNB.fit(X, y, params.mnb_alpha)
    if algo == "lr":
        return LogisticRegression.fit(X, y, params.lr_learning_rate, params.lr_l2, params.lr_epochs)
    if algo == "svc":
        return LinearSVC.fit(X, y, params.svc_c, params.svc_learning_rate, params.svc_epochs)
    if algo == "knn":
        return KNearestNeighbors.fit(X, y, params.knn_k)
    if algo == "dtc":
        return DecisionTree.fit(X, y, params.tree_max_depth, seed=params.seed)
    return RandomForest.fit(
        X, y, params.rfc_n_trees, params.rfc_max_features, params.rfc_bootstrap,
        params.tree_max_depth, params.seed, params.n_jobs,
    )


def _as_matrix(vector) -> np.ndarray:
    if isinstance(vector, CountVector):
        return vector.to_dense()[None, :]
    return np.asarray(vector, dtype=np.float64)


def predict_proba(model: ClassicalModel, vector) -> float:
    """Probability of class 1 for one count vector."""
    return float(model.predict_proba_matrix(_as_matrix(vector))[0])


def predict(model: ClassicalModel, vector) -> int:
    return int(model.predict_matrix(_as_matrix(vector))[0])


__all__ = [
    "ALGORITHMS", "MODEL_CLASSES", "ClassicalHyperparams", "ClassicalModel", "DecisionTree",
    "KNearestNeighbors", "LinearSVC", "LogisticRegression", "MultinomialNB", "RandomForest",
    "predict", "predict_proba", "train_classifier",
]
