"""Classification and calibration metrics.

Confusion counts, macro-averaged precision/recall/F1, mean negative
log-likelihood, and equal-width-binned expected calibration error with
per-bin reliability statistics.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProbPredictions",
    "ConfusionCounts",
    "ReliabilityBins",
    "confusion_matrix",
    "accuracy",
    "precision_macro",
    "recall_macro",
    "f1_macro",
    "per_class_precision",
    "per_class_recall",
    "per_class_f1",
    "mean_nll",
    "reliability_bins",
    "ece",
]

_LOG_CLAMP = 1e-12  # keeps NLL finite for degenerate zero probabilities
_ROW_SUM_TOL = 1e-9


@dataclass
class ProbPredictions:
    """Per-record probability rows paired with true labels."""

    probs: np.ndarray  # (n, K), each row sums to 1
    labels: np.ndarray  # (n,) int

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.validate()

    @classmethod
    def _from_valid(cls, probs: np.ndarray, labels: np.ndarray) -> "ProbPredictions":
        """Fast-path constructor for rows already known to satisfy validate().

        Only for internal callers whose probs come out of a softmax; external
        input must go through the normal constructor.
        """
        obj = cls.__new__(cls)
        obj.probs = probs
        obj.labels = labels
        return obj

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def num_classes(self) -> int:
        return self.probs.shape[1]

    def validate(self):
        if self.probs.ndim != 2 or self.probs.shape[0] < 1:
            raise ValueError("probs must be a nonempty 2-D array")
        if self.labels.shape != (self.probs.shape[0],):
            raise ValueError("labels length must match probs rows")
        # scalar min/max scans; cheaper than boolean masks on the hot path
        if self.probs.min() < 0.0 or self.probs.max() > 1.0:
            raise ValueError("probabilities outside [0, 1]")
        if np.max(np.abs(self.probs.sum(axis=1) - 1.0)) > _ROW_SUM_TOL:
            raise ValueError("probability rows must sum to 1")
        k = self.probs.shape[1]
        if self.labels.min() < 0 or self.labels.max() >= k:
            raise ValueError("label out of range [0, K)")

    def predicted(self) -> np.ndarray:
        """Argmax class per row; ties go to the smallest class index."""
        return np.argmax(self.probs, axis=1)

    def confidence(self) -> np.ndarray:
        """Maximum probability per row."""
        return np.max(self.probs, axis=1)


@dataclass
class ConfusionCounts:
    """K x K counts; counts[t][p] = records with true class t predicted p."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ValueError("counts must be square")
        if self.counts.size and self.counts.min() < 0:
            raise ValueError("counts must be nonnegative")
        self._n = int(self.counts.sum())

    @classmethod
    def _from_valid(cls, counts: np.ndarray, n: int) -> "ConfusionCounts":
        """Fast path for int64 counts produced internally (square, nonnegative)."""
        obj = cls.__new__(cls)
        obj.counts = counts
        obj._n = n
        return obj

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def n(self) -> int:
        return self._n

    # binary convention: class 1 is positive
    @property
    def tp(self) -> int:
        return int(self.counts[1, 1])

    @property
    def fn(self) -> int:
        return int(self.counts[1, 0])

    @property
    def fp(self) -> int:
        return int(self.counts[0, 1])

    @property
    def tn(self) -> int:
        return int(self.counts[0, 0])

    @classmethod
    def from_binary(cls, tp: int, fn: int, fp: int, tn: int) -> "ConfusionCounts":
        return cls(counts=np.array([[tn, fp], [fn, tp]], dtype=np.int64))


@dataclass
class ReliabilityBins:
    """M equal-width confidence bins with raw per-bin sums.

    Bin m (1-based) covers [(m-1)/M, m/M), except the last bin which
    also includes confidence exactly 1.
    """

    num_bins: int
    counts: np.ndarray  # (M,) int
    sum_confidence: np.ndarray  # (M,) float
    sum_correct: np.ndarray  # (M,) int

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def mean_confidence(self, m: int) -> float | None:
        c = int(self.counts[m])
        return None if c == 0 else float(self.sum_confidence[m]) / c

    def mean_accuracy(self, m: int) -> float | None:
        c = int(self.counts[m])
        return None if c == 0 else float(self.sum_correct[m]) / c


def confusion_matrix(preds: ProbPredictions) -> ConfusionCounts:
    """Population counts[t][p] from argmax predictions."""
    k = preds.num_classes
    flat = np.bincount(preds.labels * k + preds.predicted(), minlength=k * k)
    return ConfusionCounts._from_valid(flat.reshape(k, k), preds.n)


def accuracy(c: ConfusionCounts) -> float:
    n = c.n
    if n < 1:
        raise ValueError("empty confusion matrix")
    return float(c.counts.trace()) / n


def per_class_precision(c: ConfusionCounts) -> np.ndarray:
    """counts[k][k] / column sum; 0 for classes never predicted."""
    col = c.counts.sum(axis=0)
    diag = c.counts.diagonal()
    return np.divide(diag, col, out=np.zeros(c.num_classes), where=col > 0)


def per_class_recall(c: ConfusionCounts) -> np.ndarray:
    """counts[k][k] / row sum; 0 for classes with no support."""
    row = c.counts.sum(axis=1)
    diag = c.counts.diagonal()
    return np.divide(diag, row, out=np.zeros(c.num_classes), where=row > 0)


def per_class_f1(c: ConfusionCounts) -> np.ndarray:
    k = c.num_classes
    col = c.counts.sum(axis=0)
    row = c.counts.sum(axis=1)
    diag = c.counts.diagonal()
    p = np.divide(diag, col, out=np.zeros(k), where=col > 0)
    r = np.divide(diag, row, out=np.zeros(k), where=row > 0)
    s = p + r
    return np.divide(2.0 * p * r, s, out=np.zeros_like(s), where=s > 0)


def precision_macro(c: ConfusionCounts) -> float:
    if c.n < 1:
        raise ValueError("empty confusion matrix")
    return float(per_class_precision(c).sum()) / c.num_classes


def recall_macro(c: ConfusionCounts) -> float:
    if c.n < 1:
        raise ValueError("empty confusion matrix")
    return float(per_class_recall(c).sum()) / c.num_classes


def f1_macro(c: ConfusionCounts) -> float:
    if c.n < 1:
        raise ValueError("empty confusion matrix")
    return float(per_class_f1(c).sum()) / c.num_classes


def mean_nll(preds: ProbPredictions) -> float:
    """Mean over records of -ln p(true class), clamped at 1e-12."""
    p_true = preds.probs[np.arange(preds.n), preds.labels]
    return float(np.mean(-np.log(np.maximum(p_true, _LOG_CLAMP))))


def bin_index(confidence: float, edges: list[float]) -> int:
    """Largest m with edges[m] <= confidence, clamped into the last bin."""
    return min(bisect_right(edges, confidence) - 1, len(edges) - 2)


def bin_edges(num_bins: int) -> list[float]:
    return [m / num_bins for m in range(num_bins + 1)]


def reliability_bins(preds: ProbPredictions, num_bins: int) -> ReliabilityBins:
    """Assign each record to its confidence bin and accumulate raw sums.

    Accumulation is sequential in record order so the resulting sums are
    bit-reproducible.
    """
    if num_bins < 1:
        raise ValueError("num_bins must be >= 1")
    edges = bin_edges(num_bins)
    counts = np.zeros(num_bins, dtype=np.int64)
    sum_conf = np.zeros(num_bins, dtype=np.float64)
    sum_correct = np.zeros(num_bins, dtype=np.int64)
    conf = preds.confidence()
    correct = preds.predicted() == preds.labels
    for i in range(preds.n):
        m = bin_index(float(conf[i]), edges)
        counts[m] += 1
        sum_conf[m] += conf[i]
        sum_correct[m] += int(correct[i])
    return ReliabilityBins(
        num_bins=num_bins,
        counts=counts,
        sum_confidence=sum_conf,
        sum_correct=sum_correct,
    )


def ece_from_bins(bins: ReliabilityBins) -> float:
    """Count-weighted mean |per-bin accuracy - per-bin confidence|."""
    n = bins.n
    if n < 1:
        raise ValueError("no records binned")
    total = 0.0
    for m in range(bins.num_bins):
        c = int(bins.counts[m])
        if c == 0:
            continue
        acc = bins.sum_correct[m] / c
        conf = bins.sum_confidence[m] / c
        total += (c / n) * abs(acc - conf)
    return total


def ece(preds: ProbPredictions, num_bins: int) -> float:
    return ece_from_bins(reliability_bins(preds, num_bins))
