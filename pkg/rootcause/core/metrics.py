"""
Classification Metrics

Confusion matrix over the nine root causes, one-vs-rest precision, recall,
F-measure and MCC, rank-statistic AUC-ROC, and the stratified fold splitter
shared by cross-validation and grid search.

Conventions:
- precision, recall and F-measure with a zero denominator are 0
- MCC with a zero denominator is 0
- AUC-ROC is undefined (None) when the truth vector holds a single class
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import rankdata
from sklearn.metrics import confusion_matrix

from .corpus import CANONICAL_ORDER, NUM_CLASSES, RootCause

logger = logging.getLogger(__name__)

ClassRef = Union[RootCause, int]


class EvaluationError(Exception):
    """Raised when an evaluation cannot be carried out"""
    pass


def _class_index(cls: ClassRef) -> int:
    return cls.index if isinstance(cls, RootCause) else int(cls)


def label_indices(labels: Iterable) -> np.ndarray:
    """Canonical indices for a sequence of RootCause members or indices"""
    return np.array([_class_index(label) for label in labels], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """9 x 9 counts; rows are actual classes, columns predicted classes"""
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (NUM_CLASSES, NUM_CLASSES):
            raise ValueError(f"Confusion matrix must be {NUM_CLASSES}x{NUM_CLASSES}, got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("Confusion matrix entries must be >= 0")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def zeros(cls) -> "ConfusionMatrix":
        return cls(np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64))

    @classmethod
    def from_predictions(cls, actual: Sequence, predicted: Sequence) -> "ConfusionMatrix":
        actual = label_indices(actual)
        predicted = label_indices(predicted)
        if len(actual) == 0:
            return cls.zeros()
        return cls(confusion_matrix(actual, predicted, labels=list(range(NUM_CLASSES))))

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)

    def __eq__(self, other) -> bool:
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def one_vs_rest(self, cls: ClassRef) -> Tuple[int, int, int, int]:
        """(TP, FP, FN, TN) for one class against all others"""
        c = _class_index(cls)
        tp = int(self.counts[c, c])
        fp = int(self.counts[:, c].sum()) - tp
        fn = int(self.counts[c, :].sum()) - tp
        tn = self.total - tp - fp - fn
        return tp, fp, fn, tn

    def present_classes(self) -> List[RootCause]:
        """Classes with at least one actual instance"""
        support = self.counts.sum(axis=1)
        return [cause for cause in CANONICAL_ORDER if support[cause.index] > 0]


def precision(cm: ConfusionMatrix, cls: ClassRef) -> float:
    tp, fp, _, _ = cm.one_vs_rest(cls)
    return tp / (tp + fp) if tp + fp else 0.0


def recall(cm: ConfusionMatrix, cls: ClassRef) -> float:
    tp, _, fn, _ = cm.one_vs_rest(cls)
    return tp / (tp + fn) if tp + fn else 0.0


def f_measure(cm: ConfusionMatrix, cls: ClassRef) -> float:
    p = precision(cm, cls)
    r = recall(cm, cls)
    return 2 * p * r / (p + r) if p + r else 0.0


def mcc(cm: ConfusionMatrix, cls: ClassRef) -> float:
    """Matthews correlation coefficient of the one-vs-rest binarization"""
    tp, fp, fn, tn = cm.one_vs_rest(cls)
    denominator = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denominator == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denominator)


def macro_f_measure(cm: ConfusionMatrix) -> float:
    """Unweighted mean F-measure over the classes present in the matrix"""
    present = cm.present_classes()
    if not present:
        return 0.0
    return float(np.mean([f_measure(cm, cause) for cause in present]))


def auc_roc(scores: Sequence[float], truths: Sequence[bool]) -> Optional[float]:
    """
    One-vs-rest AUC by the Mann-Whitney rank statistic; tied scores count 1/2.

    Returns:
        AUC in [0, 1], or None when truths hold only one class
    """
    scores = np.asarray(scores, dtype=np.float64)
    truths = np.asarray(truths, dtype=bool)
    n_pos = int(truths.sum())
    n_neg = len(truths) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores, method="average")
    u_statistic = ranks[truths].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_statistic / (n_pos * n_neg))


def stratified_kfold(labels: Sequence, k: int, seed: int) -> List[np.ndarray]:
    """
    Split indices into k disjoint folds with per-class counts within 1.

    Each class (canonical order) is shuffled and dealt round-robin, starting
    where the previous class stopped so fold sizes stay balanced too.

    Returns:
        k sorted index arrays that partition range(len(labels))

    Raises:
        EvaluationError: If k < 2 or k exceeds the number of instances
    """
    labels = label_indices(labels)
    n = len(labels)
    if k < 2:
        raise EvaluationError(f"k must be >= 2, got {k}")
    if k > n:
        raise EvaluationError(f"k={k} exceeds the number of instances ({n})")
    if n and (labels.min() < 0 or labels.max() >= NUM_CLASSES):
        raise EvaluationError("labels must be canonical category indices")

    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=np.int64)
    offset = 0
    for c in range(NUM_CLASSES):
        members = np.flatnonzero(labels == c)
        if len(members) == 0:
            continue
        shuffled = rng.permutation(members)
        assignment[shuffled] = (offset + np.arange(len(shuffled))) % k
        offset = (offset + len(shuffled)) % k

    return [np.flatnonzero(assignment == fold) for fold in range(k)]
