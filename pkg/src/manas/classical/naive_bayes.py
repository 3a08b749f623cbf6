from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import ClassicalModel, freeze


@dataclass(frozen=True, eq=False)
class MultinomialNB(ClassicalModel):
    """Multinomial naive Bayes with additive (Laplace) smoothing.

    ``class_log_prior[c]`` is ``log(n_c / n)`` and ``feature_log_prob[c, j]`` is
    ``log((count_cj + alpha) / (count_c + alpha * V))``.
    """

    algorithm = "mnb"
    class_log_prior: np.ndarray = None
    feature_log_prob: np.ndarray = None
    alpha: float = 1.0

    @classmethod
    def fit(cls, X: np.ndarray, y: np.ndarray, alpha: float = 1.0) -> "MultinomialNB":
        n, V = X.shape
        counts = np.stack([X[y == c].sum(axis=0) for c in (0, 1)])
        class_n = np.array([np.sum(y == 0), np.sum(y == 1)], dtype=np.float64)
        smoothed = counts + alpha
        log_lik = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
        return cls(V, freeze(np.log(class_n / n)), freeze(log_lik), float(alpha))

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        return X @ self.feature_log_prob.T + self.class_log_prior

    def _proba(self, X):
        jll = self.joint_log_likelihood(X)
        top = jll.max(axis=1, keepdims=True)
        norm = top[:, 0] + np.log(np.exp(jll - top).sum(axis=1))
        return np.exp(jll[:, 1] - norm)

    def state(self):
        return {"alpha": self.alpha}, {
            "class_log_prior": self.class_log_prior,
            "feature_log_prob": self.feature_log_prob,
        }

    @classmethod
    def from_state(cls, meta, arrays):
        flp = arrays["feature_log_prob"]
        return cls(flp.shape[1], freeze(arrays["class_log_prior"]), freeze(flp), float(meta["alpha"]))
