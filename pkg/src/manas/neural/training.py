"""Minibatch Adam training loop, epoch history and gradient checking."""

from __future__ import annotations

import copy
import csv
import io
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..errors import EmptyTrainSet, InvalidParameter
from .optim import AdamState, adam_step, bce_loss
from .rnn import RNNModel
from .tokens import pad_and_mask
from .transformer import TransformerModel

log = logging.getLogger(__name__)

KINDS = ("rnn", "transformer")
EVAL_BATCH = 256


@dataclass(frozen=True)
class TrainConfig:
    kind: str = "rnn"
    epochs: int = 15
    batch_size: int = 52
    validation_split: float = 0.15
    seed: int = 0
    learning_rate: float = 0.0005
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    init_scale: float = 0.1
    # architecture
    embed_dim: int = 64
    hidden_dim: int = 64
    d_model: int = 64
    n_heads: int = 2
    n_layers: int = 2
    ffn_dim: int = 128
    max_len: int = 128

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown model kind {self.kind!r}")
        if self.epochs < 1:
            raise InvalidParameter("epochs must be >= 1")
        if self.batch_size < 1:
            raise InvalidParameter("batch_size must be >= 1")
        if not 0.0 <= self.validation_split < 1.0:
            raise InvalidParameter("validation_split must be in [0, 1)")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise InvalidParameter("beta1 and beta2 must be in (0, 1)")
        if self.learning_rate <= 0:
            raise InvalidParameter("learning_rate must be positive")
        if self.seed < 0:
            raise InvalidParameter("seed must be non-negative")

    @classmethod
    def rnn(cls, **overrides) -> "TrainConfig":
        return cls(**{"kind": "rnn", **overrides})

    @classmethod
    def transformer(cls, **overrides) -> "TrainConfig":
        defaults = {"kind": "transformer", "epochs": 3, "batch_size": 8}
        return cls(**{**defaults, **overrides})

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    accuracy: float
    val_loss: float | None
    val_accuracy: float | None


@dataclass
class EpochHistory:
    records: list[EpochRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i) -> EpochRecord:
        return self.records[i]

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "loss", "accuracy", "val_loss", "val_accuracy"])
        for r in self.records:
            w.writerow([r.epoch, *("" if v is None else repr(float(v))
                                   for v in (r.loss, r.accuracy, r.val_loss, r.val_accuracy))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EpochHistory":
        rows = list(csv.DictReader(io.StringIO(text)))
        opt = lambda s: None if s == "" else float(s)  # noqa: E731
        return cls([EpochRecord(int(r["epoch"]), float(r["loss"]), float(r["accuracy"]),
                                opt(r["val_loss"]), opt(r["val_accuracy"])) for r in rows])

    def to_list(self) -> list[dict]:
        return [asdict(r) for r in self.records]

    @classmethod
    def from_list(cls, rows: list[dict]) -> "EpochHistory":
        return cls([EpochRecord(**r) for r in rows])


def steps_per_epoch(n_train: int, batch_size: int) -> int:
    """Full minibatches per epoch; the trailing partial batch is dropped."""
    if n_train <= 0 or batch_size <= 0:
        raise InvalidParameter("n_train and batch_size must be positive")
    return max(1, n_train // batch_size)


def build_model(config: TrainConfig, vocab_size: int):
    if config.kind == "rnn":
        return RNNModel.init(vocab_size, config.embed_dim, config.hidden_dim,
                             seed=config.seed, scale=config.init_scale)
    return TransformerModel.init(vocab_size, config.d_model, config.n_heads, config.n_layers,
                                 config.ffn_dim, config.max_len, seed=config.seed,
                                 scale=config.init_scale)


def predict_sequences(model, sequences: Sequence[Sequence[int]], batch_size: int = EVAL_BATCH) -> np.ndarray:
    """Class-1 probabilities for id sequences, evaluated in padded chunks."""
    out = []
    for start in range(0, len(sequences), batch_size):
        out.append(model.forward(pad_and_mask(sequences[start:start + batch_size])))
    return np.concatenate(out) if out else np.zeros(0)


def train_neural(sequences: Sequence[Sequence[int]], labels: Sequence[int], config: TrainConfig,
                 vocab_size: int, model=None):
    """Train an RNN or transformer with Adam on binary cross-entropy.

    The last ``floor(N * validation_split)`` examples of a seeded shuffle are
    held out for validation. Each epoch reshuffles the rest and runs
    ``steps_per_epoch`` full minibatches. Training loss/accuracy are averaged
    over the minibatches seen in the epoch; validation metrics are computed on
    the held-out set after the epoch.

    Returns ``(model, EpochHistory)``.
    """
    y = np.asarray(labels, dtype=np.int64)
    n = len(sequences)
    if len(y) != n:
        raise InvalidParameter(f"{n} sequences but {len(y)} labels")
    rng = np.random.default_rng([config.seed, 1])
    perm = rng.permutation(n)
    n_val = math.floor(n * config.validation_split)
    train_idx, val_idx = perm[: n - n_val], perm[n - n_val:]
    if len(train_idx) == 0:
        raise EmptyTrainSet("no training examples left after the validation split")

    if model is None:
        model = build_model(config, vocab_size)
    adam = AdamState(config.learning_rate, config.beta1, config.beta2, config.epsilon)
    steps = steps_per_epoch(len(train_idx), config.batch_size)
    val_seqs = [sequences[i] for i in val_idx]
    history = EpochHistory()

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(train_idx)
        loss_sum = correct = seen = 0.0
        for s in range(steps):
            idx = order[s * config.batch_size:(s + 1) * config.batch_size]
            batch = pad_and_mask([sequences[i] for i in idx])
            loss, grads, probs = model.loss_and_grads(batch, y[idx])
            adam_step(adam, model.params, grads)
            loss_sum += loss * len(idx)
            correct += np.sum((probs >= 0.5) == (y[idx] == 1))
            seen += len(idx)
        val_loss = val_acc = None
        if n_val:
            vp = predict_sequences(model, val_seqs)
            val_loss = float(bce_loss(vp, y[val_idx]))
            val_acc = float(np.mean((vp >= 0.5) == (y[val_idx] == 1)))
        rec = EpochRecord(epoch, float(loss_sum / seen), float(correct / seen), val_loss, val_acc)
        history.records.append(rec)
        log.info("epoch %d/%d - %d steps - loss: %.4f - accuracy: %.4f - val_loss: %s - val_accuracy: %s",
                 epoch, config.epochs, steps, rec.loss, rec.accuracy,
                 "n/a" if val_loss is None else f"{val_loss:.4f}",
                 "n/a" if val_acc is None else f"{val_acc:.4f}")
    return model, history


def _sample_coordinates(model, batch, n_coords: int, rng) -> list[tuple[str, tuple]]:
    """Spread ``n_coords`` probes over every parameter tensor.

    Embedding-table probes are restricted to rows the batch actually reads.
    """
    params = model.params
    total = sum(p.size for p in params.values())
    used_ids = np.unique(batch.token_ids)
    coords = []
    for name, p in params.items():
        k = max(4, math.ceil(n_coords * p.size / total))
        for _ in range(k):
            if p.ndim == 0:
                coords.append((name, ()))
                continue
            if name in ("E", "tok_emb"):
                idx = (int(rng.choice(used_ids)), int(rng.integers(p.shape[1])))
            elif name == "pos_emb":
                idx = (int(rng.integers(batch.token_ids.shape[1])), int(rng.integers(p.shape[1])))
            elif name == "seg_emb":
                idx = (0, int(rng.integers(p.shape[1])))
            else:
                idx = tuple(int(rng.integers(s)) for s in p.shape)
            coords.append((name, idx))
    return coords


def grad_check(kind: str, batch, labels, epsilon: float = 1e-5, model=None, seed: int = 0,
               n_coords: int = 256, vocab_size: int | None = None,
               fd_dtype=np.longdouble) -> float:
    """Max relative error between analytic and central-difference gradients.

    Error per coordinate is ``|ga - gn| / max(|ga|, |gn|, 1e-8)``. Analytic
    gradients come from the float64 backward pass. The finite-difference side
    re-runs the forward pass on a copy of the parameters cast to ``fd_dtype``
    (extended precision where the platform has it), which keeps cancellation
    noise well below the smallest gradients being probed.
    """
    if not epsilon > 0:
        raise InvalidParameter("epsilon must be positive")
    if n_coords < 1:
        raise InvalidParameter("n_coords must be positive")
    if model is None:
        if kind not in KINDS:
            raise InvalidParameter(f"unknown model kind {kind!r}")
        V = vocab_size or int(batch.token_ids.max()) + 1
        model = build_model(TrainConfig(kind=kind, seed=seed), V)
    labels = np.asarray(labels)
    _, grads, _ = model.loss_and_grads(batch, labels)

    probe = copy.copy(model)
    probe.params = {k: v.astype(fd_dtype) for k, v in model.params.items()}
    step = fd_dtype(epsilon)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, idx in _sample_coordinates(model, batch, n_coords, rng):
        p = probe.params[name]
        orig = p[idx]
        p[idx] = orig + step
        plus = bce_loss(probe.forward(batch), labels)
        p[idx] = orig - step
        minus = bce_loss(probe.forward(batch), labels)
        p[idx] = orig
        gn = float((plus - minus) / (2 * step))
        ga = float(grads[name][idx])
        err = abs(ga - gn) / max(abs(ga), abs(gn), 1e-8)
        worst = max(worst, err)
    return worst
