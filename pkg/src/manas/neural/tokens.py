"""Token ids, special tokens and padded batches for the neural models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EmptyBatch, ReservedIdCollision
from ..vectorize import Vocabulary

PAD_ID = 0
CLS_ID = 1
SEP_ID = 2
UNK_ID = 3
N_SPECIAL = 4
SPECIAL_NAMES = ("[PAD]", "[CLS]", "[SEP]", "[UNK]")


@dataclass(frozen=True)
class SpecialTokens:
    pad_id: int = PAD_ID
    cls_id: int = CLS_ID
    sep_id: int = SEP_ID
    unk_id: int = UNK_ID


@dataclass(frozen=True)
class PaddedBatch:
    token_ids: np.ndarray       # (B, L) int64
    attention_mask: np.ndarray  # (B, L) 0/1
    lengths: np.ndarray         # (B,)

    @property
    def shape(self) -> tuple[int, int]:
        return self.token_ids.shape

    def repad(self, length: int) -> "PaddedBatch":
        """Same sequences right-padded to ``length`` (>= current length)."""
        B, L = self.token_ids.shape
        if length < L:
            raise ValueError("cannot shrink a batch")
        ids = np.full((B, length), PAD_ID, dtype=np.int64)
        ids[:, :L] = self.token_ids
        mask = np.zeros((B, length), dtype=np.int64)
        mask[:, :L] = self.attention_mask
        return PaddedBatch(ids, mask, self.lengths.copy())


def token_id(vocab: Vocabulary, token: str) -> int:
    i = vocab.get(token)
    return UNK_ID if i is None else i + N_SPECIAL


def encode_tokens(tokens: Sequence[str], vocab: Vocabulary, max_body: int | None = None) -> list[int]:
    """Map tokens to ids (corpus index + 4), OOV -> [UNK], optionally truncated."""
    ids = [token_id(vocab, t) for t in tokens]
    return ids if max_body is None else ids[:max_body]


def add_special_tokens(ids: Sequence[int]) -> list[int]:
    ids = list(ids)
    bad = [i for i in ids if 0 <= i < N_SPECIAL]
    if bad:
        raise ReservedIdCollision(f"sequence contains reserved ids {sorted(set(bad))}")
    return [CLS_ID, *ids, SEP_ID]


def pad_and_mask(sequences: Sequence[Sequence[int]]) -> PaddedBatch:
    """Right-pad to the longest sequence; mask is 1 on real positions."""
    if not sequences:
        raise EmptyBatch("no sequences to pad")
    lengths = np.array([len(s) for s in sequences], dtype=np.int64)
    if lengths.min() == 0:
        raise EmptyBatch("empty sequence in batch")
    L = int(lengths.max())
    ids = np.full((len(sequences), L), PAD_ID, dtype=np.int64)
    for r, s in enumerate(sequences):
        ids[r, : len(s)] = s
    mask = (np.arange(L)[None, :] < lengths[:, None]).astype(np.int64)
    return PaddedBatch(ids, mask, lengths)
