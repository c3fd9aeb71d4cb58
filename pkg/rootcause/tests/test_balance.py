import numpy as np
import pytest
from scipy import sparse

from rootcause.core.balance import (
    BalanceError,
    LabeledDataset,
    balance_training_set,
    smote,
)
from rootcause.core.corpus import RootCause

A = RootCause.GUI.index
B = RootCause.SECURITY.index


def _dataset(counts, dim=6, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.concatenate([np.full(n, c) for c, n in counts.items()])
    vectors = sparse.csr_matrix(rng.random((len(labels), dim)) * (rng.random((len(labels), dim)) > 0.4))
    return LabeledDataset(vectors, labels)


def test_balanced_data_is_returned_unchanged():
    data = _dataset({A: 5, B: 5})
    result = smote(data, k=3, seed=1)
    assert len(result.data) == 10
    assert not result.data.synthetic_mask.any()
    assert result.warnings == []


def test_minority_is_filled_up_to_the_majority():
    data = _dataset({A: 10, B: 5})
    result = smote(data, k=3, seed=1)
    counts = result.data.class_counts()
    assert counts == {RootCause.GUI: 10, RootCause.SECURITY: 10}
    assert result.data.synthetic_mask.sum() == 5
    assert (result.data.labels[result.data.synthetic_mask] == B).all()


def test_synthetic_points_lie_on_the_segment_of_a_two_point_class():
    vectors = sparse.csr_matrix(np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 0.0], [5.0, 1.0], [6.0, 0.0]]))
    labels = np.array([B, B, A, A, A])
    result = smote(LabeledDataset(vectors, labels), k=1, seed=4)
    synthetic = result.data.vectors[result.data.synthetic_mask].toarray()
    assert len(synthetic) == 1
    for x, y in synthetic:
        assert 0.0 <= x <= 1.0
        assert x == pytest.approx(y)


def test_every_synthetic_row_is_a_same_class_convex_combination():
    data = _dataset({A: 12, B: 4, RootCause.NETWORK.index: 7}, dim=5, seed=3)
    result = smote(data, k=3, seed=9)
    originals = data.vectors.toarray()
    out = result.data
    synthetic = out.vectors[out.synthetic_mask].toarray()
    synthetic_labels = out.labels[out.synthetic_mask]

    for row, label in zip(synthetic, synthetic_labels):
        members = originals[data.labels == label]
        found = False
        for i in range(len(members)):
            for j in range(len(members)):
                low = np.minimum(members[i], members[j]) - 1e-12
                high = np.maximum(members[i], members[j]) + 1e-12
                if np.all((low <= row) & (row <= high)):
                    found = True
        assert found


def test_post_balance_class_counts_are_equal():
    data = _dataset({A: 9, B: 3, RootCause.DATABASE.index: 2, RootCause.GUI.index + 1: 6})
    counts = list(smote(data, k=5, seed=0).data.class_counts().values())
    assert max(counts) - min(counts) == 0


def test_same_seed_is_bit_identical_and_other_seeds_keep_counts():
    data = _dataset({A: 10, B: 4})
    first = smote(data, k=3, seed=42).data
    second = smote(data, k=3, seed=42).data
    other = smote(data, k=3, seed=43).data
    assert (first.vectors != second.vectors).nnz == 0
    assert np.array_equal(first.labels, second.labels)
    assert other.class_counts() == first.class_counts()


def test_original_rows_are_preserved_verbatim():
    data = _dataset({A: 8, B: 3})
    out = smote(data, k=2, seed=5).data
    assert (out.originals().vectors != data.vectors).nnz == 0
    assert np.array_equal(out.originals().labels, data.labels)
    assert not out.synthetic_mask[:len(data)].any()


def test_synthetic_rows_follow_originals_grouped_by_class():
    data = _dataset({B: 10, A: 4, RootCause.CONFIGURATION.index: 2})
    out = smote(data, k=2, seed=5).data
    tail = out.labels[len(data):]
    assert list(tail) == [RootCause.CONFIGURATION.index] * 8 + [A] * 6


def test_k_is_clamped_for_small_classes():
    data = _dataset({A: 10, B: 3})
    result = smote(data, k=5, seed=0)
    assert result.data.class_counts()[RootCause.SECURITY] == 10
    assert any("clamped from 5 to 2" in w for w in result.warnings)


def test_singleton_minority_cannot_be_interpolated():
    data = _dataset({A: 5, B: 1})
    with pytest.raises(BalanceError):
        smote(data, k=3, seed=0)
    result = balance_training_set(data, k=3, seed=0)
    assert len(result.data) == 6
    assert result.warnings


def test_singleton_class_does_not_stop_other_classes_from_balancing():
    C = RootCause.DATABASE.index
    data = _dataset({A: 10, B: 5, C: 1})
    result = balance_training_set(data, k=3, seed=0)
    counts = result.data.class_counts()
    assert counts[RootCause.GUI] == 10
    assert counts[RootCause.SECURITY] == 10
    assert counts[RootCause.DATABASE] == 1
    assert result.data.synthetic_mask.sum() == 5
    assert any("database-issue" in w for w in result.warnings)


def test_balancing_can_be_switched_off():
    data = _dataset({A: 5, B: 2})
    assert balance_training_set(data, enabled=False).data is data


def test_cosine_metric_and_argument_checks():
    data = _dataset({A: 6, B: 3})
    assert smote(data, k=2, seed=0, metric="cosine").data.class_counts()[RootCause.SECURITY] == 6
    with pytest.raises(BalanceError):
        smote(data, k=0)
    with pytest.raises(BalanceError):
        smote(data, metric="manhattan")


def test_dataset_lengths_must_agree():
    with pytest.raises(ValueError):
        LabeledDataset(sparse.csr_matrix(np.zeros((3, 2))), np.array([A, B]))
