from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import LengthMismatch, ShapeMismatch

BCE_EPS = 1e-7


def bce_loss(probs, labels, eps: float = BCE_EPS):
    """Mean binary cross-entropy with probabilities clipped to ``[eps, 1-eps]``.

    Computed in the dtype of ``probs`` (float64 for non-float input).
    """
    p = np.asarray(probs)
    if not np.issubdtype(p.dtype, np.floating):
        p = p.astype(np.float64)
    y = np.asarray(labels).astype(p.dtype)
    if p.shape != y.shape:
        raise LengthMismatch(f"{p.shape} probabilities vs {y.shape} labels")
    p = np.clip(p, eps, 1.0 - eps)
    return -np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


def bce_grad_wrt_logit(probs, labels, eps: float = BCE_EPS) -> np.ndarray:
    """d(bce_loss)/d(logit) for ``probs = sigmoid(logit)``; zero where clipped."""
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    inside = (p > eps) & (p < 1.0 - eps)
    return np.where(inside, (p - y) / p.size, 0.0)


@dataclass
class AdamState:
    lr: float = 0.0005
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(state: AdamState, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
    """One Adam update, in place on ``params`` and ``state``.

    Moments start at zero for parameters seen for the first time.
    """
    if params.keys() != grads.keys():
        raise ShapeMismatch("params and grads have different names")
    for name, g in grads.items():
        if g.shape != params[name].shape:
            raise ShapeMismatch(f"{name}: grad {g.shape} vs param {params[name].shape}")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for name, g in grads.items():
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(params[name])
            state.v[name] = np.zeros_like(params[name])
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        params[name] -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon)
