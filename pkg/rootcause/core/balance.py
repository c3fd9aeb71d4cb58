"""
SMOTE Balancing

Oversamples every minority class with synthetic rows interpolated between a
member and one of its k nearest same-class neighbours, until each class
present has as many rows as the majority class.

Output order is canonical: the original rows unchanged, then the synthetic
rows grouped by class in canonical category order, each group in generation
order.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
from scipy import sparse
from sklearn.neighbors import NearestNeighbors

from .corpus import CANONICAL_ORDER, RootCause

logger = logging.getLogger(__name__)

METRICS = ("euclidean", "cosine")


class BalanceError(Exception):
    """Raised when a class cannot be oversampled"""
    pass


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """
    Feature rows with parallel labels (canonical category indices) and a
    mask marking synthetic rows.
    """
    vectors: sparse.csr_matrix
    labels: np.ndarray
    synthetic_mask: np.ndarray = None

    def __post_init__(self):
        vectors = sparse.csr_matrix(self.vectors)
        labels = np.asarray(self.labels, dtype=np.int64)
        mask = (np.zeros(len(labels), dtype=bool) if self.synthetic_mask is None
                else np.asarray(self.synthetic_mask, dtype=bool))
        if not (vectors.shape[0] == len(labels) == len(mask)):
            raise ValueError(
                f"vectors ({vectors.shape[0]}), labels ({len(labels)}) and "
                f"synthetic_mask ({len(mask)}) must have equal length"
            )
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "synthetic_mask", mask)

    @classmethod
    def from_causes(cls, vectors, causes: Sequence[RootCause]) -> "LabeledDataset":
        return cls(vectors, np.array([cause.index for cause in causes], dtype=np.int64))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def causes(self) -> List[RootCause]:
        return [CANONICAL_ORDER[i] for i in self.labels]

    def class_counts(self) -> Dict[RootCause, int]:
        """Row count per class present, in canonical order"""
        counts = np.bincount(self.labels, minlength=len(CANONICAL_ORDER))
        return {cause: int(counts[cause.index]) for cause in CANONICAL_ORDER if counts[cause.index]}

    def originals(self) -> "LabeledDataset":
        keep = np.flatnonzero(~self.synthetic_mask)
        return LabeledDataset(self.vectors[keep], self.labels[keep], self.synthetic_mask[keep])


@dataclass
class BalanceResult:
    data: LabeledDataset
    warnings: List[str] = field(default_factory=list)


def _neighbours(X: sparse.csr_matrix, k: int, metric: str) -> np.ndarray:
    """k nearest neighbours of every row, the row itself excluded"""
    search = NearestNeighbors(n_neighbors=k + 1, algorithm="brute", metric=metric)
    search.fit(X)
    _, indices = search.kneighbors(X)

    result = np.empty((X.shape[0], k), dtype=np.int64)
    for row, candidates in enumerate(indices):
        others = candidates[candidates != row]
        result[row] = others[:k]
    return result


def smote(
    data: LabeledDataset,
    k: int = 5,
    seed: int = 0,
    metric: str = "euclidean",
    skip_singletons: bool = False
) -> BalanceResult:
    """
    Balance every class up to the majority-class count.

    Args:
        data: Training rows (originals only)
        k: Neighbour count; clamped per class to class size - 1
        seed: RNG seed; same seed gives bit-identical output
        metric: "euclidean" or "cosine"
        skip_singletons: Leave single-member classes as they are (with a
            warning) instead of raising; the other classes are still balanced

    Returns:
        BalanceResult with the balanced dataset and any clamp or skip warnings

    Raises:
        BalanceError: If k < 1, the metric is unknown, or (unless
            skip_singletons) a class needing synthetic rows has fewer than 2 members
    """
    if k < 1:
        raise BalanceError(f"k must be >= 1, got {k}")
    if metric not in METRICS:
        raise BalanceError(f"Unknown distance metric: {metric}")

    counts = data.class_counts()
    if not counts:
        return BalanceResult(data)

    target = max(counts.values())
    rng = np.random.default_rng(seed)
    warnings: List[str] = []
    blocks: List[sparse.csr_matrix] = []
    block_labels: List[np.ndarray] = []

    for cause, count in counts.items():
        needed = target - count
        if needed == 0:
            continue
        if count < 2 and skip_singletons:
            message = f"SMOTE skipped {cause.value}: a single member cannot be interpolated"
            logger.warning(f"⚠️ {message}")
            warnings.append(message)
            continue
        if count < 2:
            raise BalanceError(
                f"Class {cause.value} has {count} member; SMOTE needs at least 2 to interpolate"
            )

        k_eff = min(k, count - 1)
        if k_eff < k:
            message = f"SMOTE k clamped from {k} to {k_eff} for {cause.value} ({count} members)"
            logger.warning(f"⚠️ {message}")
            warnings.append(message)

        members = np.flatnonzero(data.labels == cause.index)
        X = data.vectors[members]
        neighbours = _neighbours(X, k_eff, metric)

        base = rng.integers(0, count, size=needed)
        pick = rng.integers(0, k_eff, size=needed)
        gap = rng.random(size=needed)
        partner = neighbours[base, pick]

        origin = X[base]
        synthetic = origin + sparse.diags(gap) @ (X[partner] - origin)
        synthetic = sparse.csr_matrix(synthetic)
        synthetic.eliminate_zeros()

        blocks.append(synthetic)
        block_labels.append(np.full(needed, cause.index, dtype=np.int64))
        logger.debug(f"SMOTE: {needed} synthetic rows for {cause.value} (k={k_eff})")

    if not blocks:
        return BalanceResult(data, warnings)

    vectors = sparse.vstack([data.vectors] + blocks, format="csr")
    labels = np.concatenate([data.labels] + block_labels)
    mask = np.concatenate([data.synthetic_mask] + [np.ones(len(b), dtype=bool) for b in block_labels])
    return BalanceResult(LabeledDataset(vectors, labels, mask), warnings)


def balance_training_set(
    data: LabeledDataset,
    enabled: bool = True,
    k: int = 5,
    metric: str = "euclidean",
    seed: int = 0
) -> BalanceResult:
    """
    SMOTE for one training split.

    A minority class with a single member in the split cannot be
    interpolated; it is kept as is with a warning while every other class
    is still oversampled.
    """
    if not enabled:
        return BalanceResult(data)
    return smote(data, k=k, seed=seed, metric=metric, skip_singletons=True)
