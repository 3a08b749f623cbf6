"""CART-style decision trees (Gini) and bagged random forests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import ClassicalModel, freeze

LEAF = -1


def _best_split(X: np.ndarray, y: np.ndarray, features: np.ndarray):
    """Lowest weighted-Gini split over ``features``.

    Candidate thresholds are midpoints between consecutive distinct values.
    Ties go to the lower feature index, then the lower threshold. Returns
    ``(feature, threshold)`` or ``None`` if every candidate feature is
    constant on this node.
    """
    n = X.shape[0]
    cols = X[:, features]
    order = np.argsort(cols, axis=0, kind="stable")
    sv = np.take_along_axis(cols, order, axis=0)
    sy = y[order].astype(np.float64)

    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    pos_left = np.cumsum(sy, axis=0)[:-1]
    pos_right = sy.sum(axis=0) - pos_left
    neg_left = n_left - pos_left
    neg_right = n_right - pos_right
    # n * weighted gini = n_l * (1 - sum p^2) + n_r * (1 - sum p^2)
    score = (n_left - (pos_left ** 2 + neg_left ** 2) / n_left) + (
        n_right - (pos_right ** 2 + neg_right ** 2) / n_right
    )
    valid = sv[:-1] < sv[1:]
    if not valid.any():
        return None
    score = np.where(valid, score, np.inf)
    best_rows = score.argmin(axis=0)
    best = score[best_rows, np.arange(len(features))]
    tied = np.flatnonzero(best == best.min())
    j = tied[np.argmin(features[tied])]
    r = best_rows[j]
    return int(features[j]), float((sv[r, j] + sv[r + 1, j]) / 2.0)


def _grow(X, y, sample_idx, max_depth, max_features, rng):
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        n1 = int(y[idx].sum())
        counts.append((len(idx) - n1, n1))
        return len(feature) - 1

    root = new_node(sample_idx)
    stack = [(root, sample_idx, 0)]
    n_features = X.shape[1]
    while stack:
        node, idx, depth = stack.pop()
        c0, c1 = counts[node]
        if c0 == 0 or c1 == 0 or (max_depth is not None and depth >= max_depth):
            continue
        Xn, yn = X[idx], y[idx]
        if max_features >= n_features:
            split = _best_split(Xn, yn, np.arange(n_features))
        else:
            # sample max_features candidates; keep drawing if all were constant
            perm = rng.permutation(n_features)
            split = None
            for start in range(0, n_features, max_features):
                split = _best_split(Xn, yn, perm[start:start + max_features])
                if split is not None:
                    break
        if split is None:
            continue
        f, t = split
        go_left = Xn[:, f] <= t
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, t
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return (
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(counts, dtype=np.int64).reshape(-1, 2),
    )


@dataclass(frozen=True, eq=False)
class DecisionTree(ClassicalModel):
    """Binary tree; internal nodes route ``x[feature] <= threshold`` to the left.

    Leaves keep their class counts, and ``predict_proba`` returns the class-1
    share of the leaf reached.
    """

    algorithm = "dtc"
    feature: np.ndarray = None
    threshold: np.ndarray = None
    left: np.ndarray = None
    right: np.ndarray = None
    counts: np.ndarray = None

    @classmethod
    def fit(cls, X, y, max_depth=None, max_features=None, seed=0, sample_idx=None) -> "DecisionTree":
        n, V = X.shape
        if sample_idx is None:
            sample_idx = np.arange(n)
        mf = V if max_features is None else max_features
        rng = np.random.default_rng(seed)
        arrays = _grow(X, y.astype(np.int64), np.asarray(sample_idx), max_depth, mf, rng)
        return cls(V, *(freeze(a) for a in arrays))

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X) -> np.ndarray:
        X = self._check(X)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            internal = f != LEAF
            if not internal.any():
                return node
            r, n = rows[internal], node[internal]
            go_left = X[r, f[internal]] <= self.threshold[n]
            node[internal] = np.where(go_left, self.left[n], self.right[n])

    def _proba(self, X):
        c = self.counts[self.apply(X)]
        return c[:, 1] / c.sum(axis=1)

    def state(self):
        return {}, {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "counts": self.counts,
        }

    @classmethod
    def from_state(cls, meta, arrays, n_features=None):
        if n_features is None:
            n_features = int(meta["n_features"])
        return cls(n_features, *(freeze(arrays[k]) for k in ("feature", "threshold", "left", "right", "counts")))


def resolve_max_features(setting: str | int | None, n_features: int) -> int:
    if setting in (None, "all"):
        return n_features
    if setting == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    return max(1, min(int(setting), n_features))


@dataclass(frozen=True, eq=False)
class RandomForest(ClassicalModel):
    """Bagged Gini trees. Tree ``i`` is grown with seed ``seed + i``.

    ``predict_proba`` is the mean of the per-tree leaf probabilities.
    """

    algorithm = "rfc"
    trees: tuple[DecisionTree, ...] = ()
    tree_seeds: tuple[int, ...] = ()

    @classmethod
    def fit(cls, X, y, n_trees=100, max_features="sqrt", bootstrap=True, max_depth=None, seed=0,
            n_jobs=1) -> "RandomForest":
        n, V = X.shape
        mf = resolve_max_features(max_features, V)
        seeds = tuple(seed + i for i in range(n_trees))

        def grow(s):
            if bootstrap:
                idx = np.random.default_rng(s).integers(0, n, size=n)
                # feature draws use a separate stream from the bootstrap draw
                return DecisionTree.fit(X, y, max_depth, mf, seed=[s, 1], sample_idx=idx)
            return DecisionTree.fit(X, y, max_depth, mf, seed=s)

        if n_jobs > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(n_jobs) as pool:
                trees = tuple(pool.map(grow, seeds))
        else:
            trees = tuple(grow(s) for s in seeds)
        return cls(V, trees, seeds)

    def _proba(self, X):
        return np.mean([t._proba(X) for t in self.trees], axis=0)

    def tree_probas(self, X) -> np.ndarray:
        X = self._check(X)
        return np.stack([t._proba(X) for t in self.trees])

    def state(self):
        arrays = {}
        for i, t in enumerate(self.trees):
            for k, v in t.state()[1].items():
                arrays[f"tree{i}.{k}"] = v
        return {"tree_seeds": list(self.tree_seeds)}, arrays

    @classmethod
    def from_state(cls, meta, arrays):
        seeds = tuple(int(s) for s in meta["tree_seeds"])
        n_features = int(meta["n_features"])
        trees = tuple(
            DecisionTree.from_state({}, {k.split(".", 1)[1]: v for k, v in arrays.items()
                                         if k.startswith(f"tree{i}.")}, n_features)
            for i in range(len(seeds))
        )
        return cls(n_features, trees, seeds)
