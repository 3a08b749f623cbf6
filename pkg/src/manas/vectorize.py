"""Bag-of-words vocabulary and count vectors."""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyVocabulary, InvalidLabelValue


@dataclass(frozen=True)
class Vocabulary:
    """Frozen token -> index map, indices assigned in code-point order."""

    index_to_token: tuple[str, ...]
    token_to_index: Mapping[str, int] = field(init=False, repr=False, compare=False)
    frozen: bool = field(default=True, init=False)

    def __post_init__(self):
        tokens = tuple(self.index_to_token)
        mapping = {t: i for i, t in enumerate(tokens)}
        if len(mapping) != len(tokens):
            raise ValueError("duplicate tokens in vocabulary")
        object.__setattr__(self, "index_to_token", tokens)
        object.__setattr__(self, "token_to_index", mapping)

    def __len__(self) -> int:
        return len(self.index_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    def get(self, token: str, default=None):
        return self.token_to_index.get(token, default)

    def save(self, path: str | os.PathLike) -> None:
        Path(path).write_text("".join(t + "\n" for t in self.index_to_token), encoding="utf-8")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Vocabulary":
        text = Path(path).read_text(encoding="utf-8")
        return cls(tuple(line for line in text.split("\n")[:-1]))


@dataclass(frozen=True)
class CountVector:
    entries: Mapping[int, int]
    dimension: int

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dimension)
        for i, c in self.entries.items():
            out[i] = c
        return out

    def total(self) -> int:
        return sum(self.entries.values())


@dataclass(frozen=True)
class FeatureMatrix:
    rows: tuple[CountVector, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.rows) != len(self.labels):
            raise DimensionMismatch(f"{len(self.rows)} rows but {len(self.labels)} labels")
        dims = {r.dimension for r in self.rows}
        if len(dims) > 1:
            raise DimensionMismatch(f"rows have mixed dimensions {sorted(dims)}")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def dimension(self) -> int:
        return self.rows[0].dimension if self.rows else 0

    def to_dense(self) -> np.ndarray:
        X = np.zeros((len(self.rows), self.dimension))
        for r, row in enumerate(self.rows):
            for i, c in row.entries.items():
                X[r, i] = c
        return X

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)


def build_vocabulary(token_sequences: Iterable[Sequence[str]], min_count: int = 1) -> Vocabulary:
    """Collect the distinct tokens of the training documents.

    Tokens occurring fewer than ``min_count`` times in total are dropped.
    """
    counts = Counter()
    for seq in token_sequences:
        counts.update(seq)
    tokens = sorted(t for t, c in counts.items() if c >= min_count)
    if not tokens:
        raise EmptyVocabulary("no tokens in training documents")
    return Vocabulary(tuple(tokens))


def vectorize(tokens: Sequence[str], vocab: Vocabulary) -> CountVector:
    """Count in-vocabulary tokens; out-of-vocabulary tokens are dropped."""
    lookup = vocab.token_to_index
    counts: dict[int, int] = {}
    for t in tokens:
        i = lookup.get(t)
        if i is not None:
            counts[i] = counts.get(i, 0) + 1
    return CountVector(dict(sorted(counts.items())), len(vocab))


def vectorize_all(
    token_sequences: Iterable[Sequence[str]], vocab: Vocabulary, labels: Sequence[int]
) -> FeatureMatrix:
    return FeatureMatrix(tuple(vectorize(t, vocab) for t in token_sequences), tuple(encode_labels(labels)))


def encode_labels(statuses: Sequence[int]) -> list[int]:
    out = []
    for s in statuses:
        if s not in (0, 1):
            raise InvalidLabelValue(f"label {s!r} is not 0 or 1")
        out.append(int(s))
    return out
