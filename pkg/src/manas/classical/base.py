from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from ..errors import DimensionMismatch


def sigmoid(z):
    z = np.asarray(z)
    if not np.issubdtype(z.dtype, np.floating):
        z = z.astype(np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def freeze(a) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ClassicalModel:
    """Base for trained classifiers over dense count matrices.

    Subclasses implement :meth:`_proba`; hard labels are ``proba >= 0.5``.
    ``state()`` / ``from_state()`` expose a flat dict of arrays plus scalar
    metadata for persistence.
    """

    algorithm: ClassVar[str] = ""
    n_features: int

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got shape {X.shape}")
        return X

    def predict_proba_matrix(self, X) -> np.ndarray:
        return self._proba(self._check(X))

    def predict_matrix(self, X) -> np.ndarray:
        return (self.predict_proba_matrix(X) >= 0.5).astype(np.int64)

    def _proba(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def state(self) -> tuple[dict, dict[str, np.ndarray]]:
        raise NotImplementedError

    @classmethod
    def from_state(cls, meta: dict, arrays: dict[str, np.ndarray]):
        raise NotImplementedError
