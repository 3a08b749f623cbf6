"""Tiny BERT-style encoder classifier with hand-written backward pass.

Input embedding is token + position + segment. Each layer is post-norm:
masked multi-head self-attention, residual, layer norm, GELU feed-forward,
residual, layer norm. The classifier reads the [CLS] position (index 0) of the
last layer through a logistic output. Masked keys get exactly zero attention
weight, which makes outputs independent of how much padding a batch carries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..classical.base import sigmoid
from ..errors import DimensionMismatch, IndexOutOfVocabulary, SequenceTooLong
from .optim import bce_grad_wrt_logit, bce_loss
from .tokens import PaddedBatch

LN_EPS = 1e-5
_GELU_C = math.sqrt(2.0 / math.pi)
LAYER_PARAMS = ("W_q", "W_k", "W_v", "W_o", "W_1", "W_2", "ln1_g", "ln1_b", "ln2_g", "ln2_b")


def gelu(u):
    return 0.5 * u * (1.0 + np.tanh(_GELU_C * (u + 0.044715 * u ** 3)))


def gelu_grad(u):
    t = np.tanh(_GELU_C * (u + 0.044715 * u ** 3))
    return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * _GELU_C * (1.0 + 3 * 0.044715 * u * u)


def _layer_norm(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    rstd = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + LN_EPS)
    xhat = xc * rstd
    return xhat * g + b, (xhat, rstd)


def _layer_norm_backward(dy, g, cache):
    xhat, rstd = cache
    dg = (dy * xhat).sum(axis=(0, 1))
    db = dy.sum(axis=(0, 1))
    dxhat = dy * g
    dx = rstd * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                 - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
    return dx, dg, db


@dataclass
class TransformerModel:
    vocab_size: int
    d_model: int = 64
    n_heads: int = 2
    n_layers: int = 2
    ffn_dim: int = 128
    max_len: int = 128
    params: dict[str, np.ndarray] = field(default_factory=dict)

    kind = "transformer"

    def __post_init__(self):
        if self.d_model % self.n_heads:
            raise DimensionMismatch("d_model must be divisible by n_heads")

    @classmethod
    def init(cls, vocab_size, d_model=64, n_heads=2, n_layers=2, ffn_dim=128, max_len=128,
             seed=0, scale=0.1) -> "TransformerModel":
        """Uniform(-scale, scale) weights; layer-norm scales start at 1 and shifts at 0."""
        model = cls(vocab_size, d_model, n_heads, n_layers, ffn_dim, max_len)
        rng = np.random.default_rng(seed)
        for name, shape in model.shapes().items():
            if name.endswith("_g"):
                model.params[name] = np.ones(shape)
            elif name.endswith("_b") and ".ln" in name:
                model.params[name] = np.zeros(shape)
            else:
                model.params[name] = rng.uniform(-scale, scale, size=shape)
        return model

    def shapes(self) -> dict[str, tuple]:
        d, f = self.d_model, self.ffn_dim
        s = {"tok_emb": (self.vocab_size, d), "pos_emb": (self.max_len, d), "seg_emb": (2, d)}
        for i in range(self.n_layers):
            p = f"layer{i}."
            s.update({p + "W_q": (d, d), p + "W_k": (d, d), p + "W_v": (d, d), p + "W_o": (d, d),
                      p + "W_1": (d, f), p + "W_2": (f, d),
                      p + "ln1_g": (d,), p + "ln1_b": (d,), p + "ln2_g": (d,), p + "ln2_b": (d,)})
        s.update({"cls_w": (d,), "cls_b": ()})
        return s

    def config(self) -> dict:
        return {"vocab_size": self.vocab_size, "d_model": self.d_model, "n_heads": self.n_heads,
                "n_layers": self.n_layers, "ffn_dim": self.ffn_dim, "max_len": self.max_len}

    def _check(self, batch: PaddedBatch, segment_ids):
        ids = batch.token_ids
        if ids.ndim != 2:
            raise DimensionMismatch(f"token_ids must be 2-D, got {ids.shape}")
        if ids.shape[1] > self.max_len:
            raise SequenceTooLong(f"batch length {ids.shape[1]} exceeds max_len {self.max_len}")
        if ids.size and (ids.min() < 0 or ids.max() >= self.vocab_size):
            raise IndexOutOfVocabulary(f"token id outside [0, {self.vocab_size})")
        if segment_ids is None:
            return np.zeros_like(ids)
        segment_ids = np.asarray(segment_ids)
        if segment_ids.shape != ids.shape:
            raise DimensionMismatch(f"segment_ids shape {segment_ids.shape} != {ids.shape}")
        return segment_ids

    def _split(self, x):
        B, L, _ = x.shape
        return x.reshape(B, L, self.n_heads, -1).transpose(0, 2, 1, 3)

    def _merge(self, x):
        B, H, L, dh = x.shape
        return x.transpose(0, 2, 1, 3).reshape(B, L, H * dh)

    def _forward(self, batch: PaddedBatch, segment_ids=None):
        seg = self._check(batch, segment_ids)
        P = self.params
        ids = batch.token_ids
        B, L = ids.shape
        key_ok = batch.attention_mask.astype(bool)[:, None, None, :]
        scale = 1.0 / math.sqrt(self.d_model // self.n_heads)

        x = P["tok_emb"][ids] + P["pos_emb"][:L][None] + P["seg_emb"][seg]
        caches, attentions = [], []
        for i in range(self.n_layers):
            p = f"layer{i}."
            q = self._split(x @ P[p + "W_q"])
            k = self._split(x @ P[p + "W_k"])
            v = self._split(x @ P[p + "W_v"])
            s = np.where(key_ok, q @ k.transpose(0, 1, 3, 2) * scale, -np.inf)
            e = np.exp(s - s.max(axis=-1, keepdims=True))
            a = e / e.sum(axis=-1, keepdims=True)
            c = self._merge(a @ v)
            h1, ln1 = _layer_norm(x + c @ P[p + "W_o"], P[p + "ln1_g"], P[p + "ln1_b"])
            u = h1 @ P[p + "W_1"]
            act = gelu(u)
            out, ln2 = _layer_norm(h1 + act @ P[p + "W_2"], P[p + "ln2_g"], P[p + "ln2_b"])
            caches.append((x, q, k, v, a, c, h1, ln1, u, act, ln2))
            attentions.append(a)
            x = out
        cls = x[:, 0, :]
        probs = sigmoid(cls @ P["cls_w"] + P["cls_b"])
        return probs, (seg, caches, cls, scale), attentions

    def forward(self, batch: PaddedBatch, segment_ids=None) -> np.ndarray:
        return self._forward(batch, segment_ids)[0]

    def attention_weights(self, batch: PaddedBatch, segment_ids=None) -> list[np.ndarray]:
        """Per-layer attention tensors of shape (B, heads, L, L)."""
        return self._forward(batch, segment_ids)[2]

    def loss_and_grads(self, batch: PaddedBatch, labels, segment_ids=None):
        P = self.params
        probs, (seg, caches, cls, scale), _ = self._forward(batch, segment_ids)
        loss = float(bce_loss(probs, labels))
        dlogit = bce_grad_wrt_logit(probs, labels)
        ids = batch.token_ids
        B, L = ids.shape

        g = {k: np.zeros_like(v) for k, v in P.items()}
        g["cls_w"] = cls.T @ dlogit
        g["cls_b"] = np.array(dlogit.sum())
        dx = np.zeros((B, L, self.d_model))
        dx[:, 0, :] = np.outer(dlogit, P["cls_w"])

        for i in range(self.n_layers - 1, -1, -1):
            p = f"layer{i}."
            x, q, k, v, a, c, h1, ln1, u, act, ln2 = caches[i]
            dr2, g[p + "ln2_g"], g[p + "ln2_b"] = _layer_norm_backward(dx, P[p + "ln2_g"], ln2)
            g[p + "W_2"] = np.einsum("blf,bld->fd", act, dr2)
            du = (dr2 @ P[p + "W_2"].T) * gelu_grad(u)
            g[p + "W_1"] = np.einsum("bld,blf->df", h1, du)
            dh1 = dr2 + du @ P[p + "W_1"].T
            dr1, g[p + "ln1_g"], g[p + "ln1_b"] = _layer_norm_backward(dh1, P[p + "ln1_g"], ln1)
            g[p + "W_o"] = np.einsum("bli,blj->ij", c, dr1)
            dc = self._split(dr1 @ P[p + "W_o"].T)
            da = dc @ v.transpose(0, 1, 3, 2)
            dv = a.transpose(0, 1, 3, 2) @ dc
            ds = a * (da - (da * a).sum(axis=-1, keepdims=True)) * scale
            dq = self._merge(ds @ k)
            dk = self._merge(ds.transpose(0, 1, 3, 2) @ q)
            dv = self._merge(dv)
            g[p + "W_q"] = np.einsum("bli,blj->ij", x, dq)
            g[p + "W_k"] = np.einsum("bli,blj->ij", x, dk)
            g[p + "W_v"] = np.einsum("bli,blj->ij", x, dv)
            dx = dr1 + dq @ P[p + "W_q"].T + dk @ P[p + "W_k"].T + dv @ P[p + "W_v"].T

        np.add.at(g["tok_emb"], ids, dx)
        g["pos_emb"][:L] = dx.sum(axis=0)
        np.add.at(g["seg_emb"], seg, dx)
        return loss, g, probs
