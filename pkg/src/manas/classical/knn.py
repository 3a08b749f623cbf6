from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import ClassicalModel, freeze

# cap on query x train x feature elements held at once
_BLOCK_ELEMENTS = 4_000_000


@dataclass(frozen=True, eq=False)
class KNearestNeighbors(ClassicalModel):
    """Euclidean k-NN over raw counts. Equal distances go to the lower training index."""

    algorithm = "knn"
    train_X: np.ndarray = None
    train_y: np.ndarray = None
    k: int = 5

    @classmethod
    def fit(cls, X, y, k=5) -> "KNearestNeighbors":
        return cls(X.shape[1], freeze(X), freeze(y.astype(np.int64)), int(k))

    def neighbors(self, X) -> np.ndarray:
        X = self._check(X)
        out = np.empty((X.shape[0], self.k), dtype=np.int64)
        chunk = max(1, _BLOCK_ELEMENTS // max(1, self.train_X.size))
        for start in range(0, X.shape[0], chunk):
            q = X[start:start + chunk]
            # exact squared distances (no expansion trick) so zero stays zero
            d = ((q[:, None, :] - self.train_X[None, :, :]) ** 2).sum(axis=2)
            out[start:start + chunk] = np.argsort(d, axis=1, kind="stable")[:, : self.k]
        return out

    def _proba(self, X):
        return self.train_y[self.neighbors(X)].mean(axis=1)

    def state(self):
        return {"k": self.k}, {"train_X": self.train_X, "train_y": self.train_y}

    @classmethod
    def from_state(cls, meta, arrays):
        X = arrays["train_X"]
        return cls(X.shape[1], freeze(X), freeze(arrays["train_y"].astype(np.int64)), int(meta["k"]))
