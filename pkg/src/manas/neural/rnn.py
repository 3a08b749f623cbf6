"""Single-layer Elman RNN classifier with explicit backpropagation through time.

Row-vector convention: ``h_t = tanh(E[x_t] @ W_xh + h_{t-1} @ W_hh + b_h)``.
Padded steps leave the state untouched, so the readout sees the hidden state
after the last real token regardless of how much padding follows it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..classical.base import sigmoid
from ..errors import DimensionMismatch, IndexOutOfVocabulary
from .optim import bce_grad_wrt_logit, bce_loss
from .tokens import PaddedBatch

PARAM_NAMES = ("E", "W_xh", "W_hh", "b_h", "w_o", "b_o")


@dataclass
class RNNModel:
    vocab_size: int
    embed_dim: int
    hidden_dim: int
    params: dict[str, np.ndarray] = field(default_factory=dict)

    kind = "rnn"

    @classmethod
    def init(cls, vocab_size, embed_dim=64, hidden_dim=64, seed=0, scale=0.1) -> "RNNModel":
        rng = np.random.default_rng(seed)
        shapes = cls.shapes(vocab_size, embed_dim, hidden_dim)
        params = {k: rng.uniform(-scale, scale, size=s) for k, s in shapes.items()}
        return cls(vocab_size, embed_dim, hidden_dim, params)

    @staticmethod
    def shapes(V, d, h) -> dict[str, tuple]:
        return {"E": (V, d), "W_xh": (d, h), "W_hh": (h, h), "b_h": (h,), "w_o": (h,), "b_o": ()}

    def config(self) -> dict:
        return {"vocab_size": self.vocab_size, "embed_dim": self.embed_dim, "hidden_dim": self.hidden_dim}

    def _check(self, batch: PaddedBatch):
        ids = batch.token_ids
        if ids.ndim != 2:
            raise DimensionMismatch(f"token_ids must be 2-D, got {ids.shape}")
        if ids.size and (ids.min() < 0 or ids.max() >= self.vocab_size):
            raise IndexOutOfVocabulary(f"token id outside [0, {self.vocab_size})")
        for name, shape in self.shapes(self.vocab_size, self.embed_dim, self.hidden_dim).items():
            if self.params[name].shape != shape:
                raise DimensionMismatch(f"{name} has shape {self.params[name].shape}, expected {shape}")

    def _forward(self, batch: PaddedBatch):
        self._check(batch)
        P = self.params
        ids = batch.token_ids
        mask = batch.attention_mask.astype(bool)
        B, L = ids.shape
        h = np.zeros((B, self.hidden_dim), dtype=P["E"].dtype)
        hs = [h]
        xs = P["E"][ids]  # (B, L, d)
        for t in range(L):
            cand = np.tanh(xs[:, t] @ P["W_xh"] + h @ P["W_hh"] + P["b_h"])
            h = np.where(mask[:, t:t + 1], cand, h)
            hs.append(h)
        logits = h @ P["w_o"] + P["b_o"]
        return sigmoid(logits), (xs, hs, mask)

    def forward(self, batch: PaddedBatch) -> np.ndarray:
        return self._forward(batch)[0]

    def loss_and_grads(self, batch: PaddedBatch, labels) -> tuple[float, dict[str, np.ndarray], np.ndarray]:
        P = self.params
        probs, (xs, hs, mask) = self._forward(batch)
        loss = float(bce_loss(probs, labels))
        dlogit = bce_grad_wrt_logit(probs, labels)
        ids = batch.token_ids
        B, L = ids.shape

        g = {k: np.zeros_like(v) for k, v in P.items()}
        h_last = hs[-1]
        g["w_o"] = h_last.T @ dlogit
        g["b_o"] = np.array(dlogit.sum())
        dh = np.outer(dlogit, P["w_o"])
        dxs = np.zeros_like(xs)
        for t in range(L - 1, -1, -1):
            m = mask[:, t:t + 1]
            h_new, h_prev = hs[t + 1], hs[t]
            da = np.where(m, dh * (1.0 - h_new ** 2), 0.0)
            g["W_xh"] += xs[:, t].T @ da
            g["W_hh"] += h_prev.T @ da
            g["b_h"] += da.sum(axis=0)
            dxs[:, t] = da @ P["W_xh"].T
            dh = da @ P["W_hh"].T + np.where(m, 0.0, dh)
        np.add.at(g["E"], ids, dxs)
        return loss, g, probs
