"""Text normalization: punctuation stripping, tokenization, stopword removal.

The pipeline order is fixed: punctuation -> whitespace tokenization ->
stopwords. Everything operates on Unicode code points; Bangla combining marks
(virama, nukta, vowel signs) are never split from their base characters because
only whitespace and listed punctuation act as boundaries.
"""

from __future__ import annotations

import os
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

# Characters observed in the survey export, plus sentence punctuation and the
# Bangla danda that the raw list does not show.
BASE_PUNCTUATION = "[(),\\$%^&*+=}{]:'\"/>"
EXTRA_PUNCTUATION = ".!?;<-_#।"
DEFAULT_PUNCTUATION = frozenset(BASE_PUNCTUATION + EXTRA_PUNCTUATION)

STOPWORD_RESOURCE = "stopwords_bn.txt"


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


def parse_stopwords(lines: Iterable[str]) -> frozenset[str]:
    words = set()
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(_nfc(line))
    return frozenset(words)


def load_stopwords(path: str | os.PathLike | None = None) -> frozenset[str]:
    """Load a stopword file (UTF-8, one token per line, ``#`` comments).

    With no path, the bundled Bangla list is returned.
    """
    if path is None:
        text = resources.files("manas.data").joinpath(STOPWORD_RESOURCE).read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_stopwords(text.splitlines())


@dataclass(frozen=True)
class PreprocessConfig:
    punctuation_set: frozenset[str] = DEFAULT_PUNCTUATION
    stopword_list: frozenset[str] = field(default_factory=load_stopwords)
    casefold_ascii: bool = False

    def __post_init__(self):
        punct = frozenset(self.punctuation_set)
        if any(len(c) != 1 for c in punct):
            raise ValueError("punctuation_set must contain single code points")
        object.__setattr__(self, "punctuation_set", punct)
        object.__setattr__(self, "stopword_list", frozenset(_nfc(w) for w in self.stopword_list))

    @property
    def _table(self) -> dict[int, str]:
        return {ord(c): " " for c in self.punctuation_set}

    def to_dict(self) -> dict:
        return {
            "punctuation": "".join(sorted(self.punctuation_set)),
            "stopwords": sorted(self.stopword_list),
            "casefold_ascii": self.casefold_ascii,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessConfig":
        return cls(frozenset(d["punctuation"]), frozenset(d["stopwords"]), bool(d["casefold_ascii"]))


def strip_punctuation(text: str, config: PreprocessConfig) -> str:
    """Replace every punctuation code point with one space.

    Replacement (not deletion) keeps ``word,word`` as two tokens.  When
    ``casefold_ascii`` is set, ASCII letters are also lowercased here.
    """
    out = text.translate(config._table)
    if config.casefold_ascii:
        out = "".join(c.lower() if c.isascii() else c for c in out)
    return out


def tokenize(text: str) -> list[str]:
    # str.split() with no argument splits on runs of Unicode whitespace.
    return text.split()


def remove_stopwords(tokens: Sequence[str], config: PreprocessConfig) -> list[str]:
    stop = config.stopword_list
    if not stop:
        return list(tokens)
    return [t for t in tokens if _nfc(t) not in stop]


def preprocess_document(text: str, config: PreprocessConfig) -> list[str]:
    return remove_stopwords(tokenize(strip_punctuation(text, config)), config)


def preprocess_corpus(texts: Iterable[str], config: PreprocessConfig) -> list[list[str]]:
    return [preprocess_document(t, config) for t in texts]
