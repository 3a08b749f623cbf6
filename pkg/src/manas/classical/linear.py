"""Linear classifiers trained by full-batch (sub)gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import ClassicalModel, freeze, sigmoid


@dataclass(frozen=True, eq=False)
class LinearModel(ClassicalModel):
    weights: np.ndarray = None
    bias: float = 0.0

    def decision_function(self, X) -> np.ndarray:
        X = self._check(X)
        return X @ self.weights + self.bias

    def _proba(self, X):
        return sigmoid(X @ self.weights + self.bias)

    def state(self):
        return {"bias": self.bias}, {"weights": self.weights}

    @classmethod
    def from_state(cls, meta, arrays):
        w = arrays["weights"]
        return cls(w.shape[0], freeze(w), float(meta["bias"]))


@dataclass(frozen=True, eq=False)
class LogisticRegression(LinearModel):
    algorithm = "lr"

    @classmethod
    def fit(cls, X, y, learning_rate=0.1, l2=1e-4, epochs=300) -> "LogisticRegression":
        """Minimize mean cross-entropy + ``l2/2 * |w|^2`` from zero weights."""
        n, V = X.shape
        yf = y.astype(np.float64)
        w = np.zeros(V)
        b = 0.0
        for _ in range(epochs):
            err = sigmoid(X @ w + b) - yf
            w -= learning_rate * (X.T @ err / n + l2 * w)
            b -= learning_rate * err.mean()
        return cls(V, freeze(w), float(b))


@dataclass(frozen=True, eq=False)
class LinearSVC(LinearModel):
    """Linear soft-margin SVM.

    Objective: ``mean(hinge) + |w|^2 / (2 C n)``, the per-sample rescaling of
    ``C * sum(hinge) + |w|^2 / 2``. Probabilities are ``sigmoid(margin)``,
    which is an uncalibrated approximation.
    """

    algorithm = "svc"

    @classmethod
    def fit(cls, X, y, c=1.0, learning_rate=0.01, epochs=300) -> "LinearSVC":
        n, V = X.shape
        ys = 2.0 * y - 1.0
        lam = 1.0 / (c * n)
        w = np.zeros(V)
        b = 0.0
        for _ in range(epochs):
            active = (ys * (X @ w + b)) < 1.0
            coef = np.where(active, ys, 0.0)
            w -= learning_rate * (lam * w - X.T @ coef / n)
            b -= learning_rate * (-coef.mean())
        return cls(V, freeze(w), float(b))
