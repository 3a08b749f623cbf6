"""Labeled survey corpora: loading, label encoding, splitting and synthesis."""

from __future__ import annotations

import csv
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import (
    DataError,
    DegenerateSplit,
    EmptyCorpus,
    InvalidLabel,
    InvalidParameter,
    MissingColumn,
    MissingFile,
)
from .rng import LCG, permutation

log = logging.getLogger(__name__)

TEXT_COLUMN = "TypeOfOpinion"
STATUS_COLUMN = "Status"

NOT_DEPRESSED = 0
DEPRESSED = 1


@dataclass(frozen=True)
class SurveyRecord:
    opinion_text: str
    status: int

    def __post_init__(self):
        if not self.opinion_text.strip():
            raise DataError("opinion text is empty")
        if self.status not in (0, 1):
            raise InvalidLabel(str(self.status))


@dataclass(frozen=True)
class Corpus:
    records: tuple[SurveyRecord, ...]
    class_counts: dict[int, int] = field(init=False, compare=False)

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        counts = Counter(r.status for r in records)
        object.__setattr__(self, "class_counts", {0: counts.get(0, 0), 1: counts.get(1, 0)})

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, int]]) -> "Corpus":
        return cls(tuple(SurveyRecord(t, s) for t, s in pairs))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def texts(self) -> list[str]:
        return [r.opinion_text for r in self.records]

    @property
    def labels(self) -> list[int]:
        return [r.status for r in self.records]

    def subset(self, indices: Iterable[int]) -> "Corpus":
        return Corpus(tuple(self.records[i] for i in indices))


@dataclass(frozen=True)
class DatasetSplit:
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    train_fraction: float
    seed: int


def encode_status(raw: str) -> int:
    """Map a yes/no status answer to 1/0 (case-insensitive, trimmed)."""
    value = raw.strip().casefold()
    if value == "yes":
        return DEPRESSED
    if value == "no":
        return NOT_DEPRESSED
    raise InvalidLabel(raw)


def load_csv(path: str | os.PathLike) -> Corpus:
    """Read a survey export with ``TypeOfOpinion`` and ``Status`` columns.

    Rows are kept in file order. Extra columns are ignored with a warning.
    Row numbers in error messages are 1-based file rows (the header is row 1).
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MissingColumn(TEXT_COLUMN) from None
        for col in (TEXT_COLUMN, STATUS_COLUMN):
            if col not in header:
                raise MissingColumn(col)
        extra = [h for h in header if h not in (TEXT_COLUMN, STATUS_COLUMN)]
        if extra:
            log.warning("ignoring extra columns: %s", ", ".join(extra))
        ti, si = header.index(TEXT_COLUMN), header.index(STATUS_COLUMN)

        records = []
        for rowno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) <= max(ti, si):
                raise DataError(f"row {rowno}: expected {len(header)} fields, got {len(row)}")
            text = row[ti]
            if not text.strip():
                raise DataError(f"row {rowno}: empty {TEXT_COLUMN}")
            try:
                status = encode_status(row[si])
            except InvalidLabel:
                raise InvalidLabel(row[si], rowno) from None
            records.append(SurveyRecord(text, status))
    if not records:
        raise EmptyCorpus(f"{path}: no data rows")
    return Corpus(tuple(records))


def write_csv(corpus: Corpus, path: str | os.PathLike) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([TEXT_COLUMN, STATUS_COLUMN])
        for r in corpus.records:
            writer.writerow([r.opinion_text, "Yes" if r.status == DEPRESSED else "No"])


def train_test_split(corpus: Corpus, train_fraction: float, seed: int = 0) -> DatasetSplit:
    """Shuffle indices with the portable LCG and cut at ``floor(N * fraction)``.

    No stratification is applied.
    """
    if not 0.0 < train_fraction < 1.0:
        raise InvalidParameter(f"train_fraction must be in (0, 1), got {train_fraction}")
    if seed < 0:
        raise InvalidParameter("seed must be non-negative")
    n = len(corpus)
    if n == 0:
        raise EmptyCorpus("cannot split an empty corpus")
    n_train = math.floor(n * train_fraction)
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(
            f"train_fraction={train_fraction} on N={n} gives {n_train} train / {n - n_train} test"
        )
    order = permutation(n, seed)
    return DatasetSplit(tuple(order[:n_train]), tuple(order[n_train:]), train_fraction, seed)


# Token inventory for synthetic corpora. The shared pool mixes neutral content
# words with common stopwords so that preprocessing has something to remove.
DEPRESSED_TOKENS = (
    "হতাশ", "একাকী", "দুশ্চিন্তা", "ভয়", "অসুস্থ", "ক্লান্ত", "বিষণ্ণ", "কষ্ট",
    "বেকার", "ঋণ", "অস্থির", "নিঃসঙ্গ", "আক্রান্ত", "ক্ষতি", "অনিশ্চিত",
)
NOT_DEPRESSED_TOKENS = (
    "সচেতন", "আনন্দ", "পরিবার", "অবসর", "বই", "শখ", "ব্যায়াম", "রান্না",
    "নিরাপদ", "সুস্থ", "শান্তি", "পড়ালেখা", "স্বাস্থ্য", "এক্টিভিটিস", "প্রার্থনা",
)
SHARED_TOKENS = (
    "কভিড", "লকডাউন", "বাসা", "দিন", "মানুষ", "কাজ", "অনলাইন", "ক্লাস", "খবর",
    "দেশ", "হয়েছি", "পেয়েছি", "করার", "সময়", "এই", "এবং", "অনেক", "যথেষ্ট",
    "থেকে", "আমি", "আমার",
)

MIN_DOC_TOKENS = 6
MAX_DOC_TOKENS = 14


def synthesize_corpus(
    n: int, class_balance: float = 0.5, signal_strength: float = 0.9, seed: int = 0
) -> Corpus:
    """Generate a labeled Bangla-like corpus with tunable class signal.

    Exactly ``floor(n * class_balance + 0.5)`` documents are labeled 1. Each token is
    drawn from its label's indicative inventory with probability
    ``signal_strength`` and from the shared pool otherwise.
    """
    if n < 2:
        raise InvalidParameter("n must be at least 2")
    if not 0.0 < class_balance < 1.0:
        raise InvalidParameter("class_balance must be in (0, 1)")
    if not 0.0 <= signal_strength <= 1.0:
        raise InvalidParameter("signal_strength must be in [0, 1]")
    if seed < 0:
        raise InvalidParameter("seed must be non-negative")

    rng = LCG(seed)
    n_pos = math.floor(n * class_balance + 0.5)
    labels = [1] * n_pos + [0] * (n - n_pos)
    rng.shuffle(labels)

    records = []
    for label in labels:
        indicative = DEPRESSED_TOKENS if label == 1 else NOT_DEPRESSED_TOKENS
        length = MIN_DOC_TOKENS + rng.randbelow(MAX_DOC_TOKENS - MIN_DOC_TOKENS + 1)
        words = []
        for _ in range(length):
            pool = indicative if rng.random() < signal_strength else SHARED_TOKENS
            words.append(rng.choice(pool))
        records.append(SurveyRecord(" ".join(words), label))
    return Corpus(tuple(records))
