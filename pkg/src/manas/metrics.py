"""Confusion-matrix statistics for binary classifiers.

Class 1 is the positive class unless stated otherwise. Every ratio whose
denominator is zero is reported as 0 and its name is recorded in the
report's ``undefined`` set instead of raising, so that a degenerate test fold
does not abort a sweep.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidLabelValue, LengthMismatch, ProbabilityOutOfRange

LOG_LOSS_EPS = 1e-15


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def flipped(self) -> "ConfusionMatrix":
        """The same counts with class 0 treated as positive."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, fn=self.fp, tn=self.tp)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ClassReport:
    per_class: dict[int, ClassMetrics]
    undefined: frozenset[str] = frozenset()

    def __getitem__(self, label: int) -> ClassMetrics:
        return self.per_class[label]


@dataclass(frozen=True)
class Averages:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class AggregateReport:
    macro: Averages
    weighted: Averages


@dataclass(frozen=True)
class ErrorReport:
    fpr: float
    fnr: float
    npv: float
    fdr: float
    mae: float
    mse: float
    rmse: float
    log_loss: float
    accuracy: float
    sensitivity: float
    specificity: float
    undefined: frozenset[str] = field(default=frozenset())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["undefined"] = sorted(self.undefined)
        return d


def _ratio(num: float, den: float, name: str, undefined: set[str] | None) -> float:
    if den == 0:
        if undefined is not None:
            undefined.add(name)
        return 0.0
    return num / den


def _check_labels(y_true, y_pred) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(y_true)
    p = np.asarray(y_pred)
    if t.shape != p.shape or t.ndim != 1:
        raise LengthMismatch(f"y_true has shape {t.shape}, y_pred has shape {p.shape}")
    if t.size == 0:
        raise LengthMismatch("no samples")
    for name, a in (("y_true", t), ("y_pred", p)):
        if not np.isin(a, (0, 1)).all():
            raise InvalidLabelValue(f"{name} contains values other than 0 and 1")
    return t.astype(np.int64), p.astype(np.int64)


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int]) -> ConfusionMatrix:
    t, p = _check_labels(y_true, y_pred)
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=t.size - tp - fp - fn)


def precision(cm: ConfusionMatrix, undefined: set[str] | None = None) -> float:
    return _ratio(cm.tp, cm.tp + cm.fp, "precision", undefined)


def recall(cm: ConfusionMatrix, undefined: set[str] | None = None) -> float:
    return _ratio(cm.tp, cm.tp + cm.fn, "recall", undefined)


def f1(cm: ConfusionMatrix, undefined: set[str] | None = None) -> float:
    p, r = precision(cm), recall(cm)
    return _ratio(2 * p * r, p + r, "f1", undefined)


def class_report(y_true, y_pred) -> tuple[ClassReport, AggregateReport]:
    cm = confusion_matrix(y_true, y_pred)
    undefined: set[str] = set()
    per_class = {}
    for label, view in ((0, cm.flipped()), (1, cm)):
        u: set[str] = set()
        per_class[label] = ClassMetrics(
            precision(view, u), recall(view, u), f1(view, u), view.tp + view.fn
        )
        undefined.update(f"{name}[{label}]" for name in u)

    n = cm.total
    macro = Averages(*(sum(getattr(per_class[c], m) for c in (0, 1)) / 2
                       for m in ("precision", "recall", "f1")))
    weighted = Averages(*(sum(getattr(per_class[c], m) * per_class[c].support for c in (0, 1)) / n
                          for m in ("precision", "recall", "f1")))
    return ClassReport(per_class, frozenset(undefined)), AggregateReport(macro, weighted)


def _check_probs(y_true, y_prob) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(y_true, dtype=np.float64)
    p = np.asarray(y_prob, dtype=np.float64)
    if t.shape != p.shape or t.ndim != 1:
        raise LengthMismatch(f"y_true has shape {t.shape}, y_prob has shape {p.shape}")
    if t.size == 0:
        raise LengthMismatch("no samples")
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise ProbabilityOutOfRange("probabilities must lie in [0, 1]")
    return t, p


def log_loss(y_true, y_prob, eps: float = LOG_LOSS_EPS) -> float:
    """Mean negative log-likelihood with probabilities clipped to ``[eps, 1-eps]``."""
    t, p = _check_probs(y_true, y_prob)
    p = np.clip(p, eps, 1.0 - eps)
    return float(-np.mean(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)))


def error_report(y_true, y_pred, y_prob) -> ErrorReport:
    cm = confusion_matrix(y_true, y_pred)
    t, p = _check_labels(y_true, y_pred)
    if len(y_prob) != len(t):
        raise LengthMismatch(f"{len(t)} labels but {len(y_prob)} probabilities")
    ll = log_loss(t, y_prob)
    u: set[str] = set()
    err = (t - p).astype(np.float64)
    mse = float(np.mean(err ** 2))
    return ErrorReport(
        fpr=_ratio(cm.fp, cm.fp + cm.tn, "fpr", u),
        fnr=_ratio(cm.fn, cm.fn + cm.tp, "fnr", u),
        npv=_ratio(cm.tn, cm.tn + cm.fn, "npv", u),
        fdr=_ratio(cm.fp, cm.fp + cm.tp, "fdr", u),
        mae=float(np.mean(np.abs(err))),
        mse=mse,
        rmse=math.sqrt(mse),
        log_loss=ll,
        accuracy=(cm.tp + cm.tn) / cm.total,
        sensitivity=_ratio(cm.tp, cm.tp + cm.fn, "sensitivity", u),
        specificity=_ratio(cm.tn, cm.tn + cm.fp, "specificity", u),
        undefined=frozenset(u),
    )
