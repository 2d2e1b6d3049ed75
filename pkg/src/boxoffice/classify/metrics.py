"""Revenue-class buckets, class balancing, train/test splitting, and the
bingo / one-class-away evaluation metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyClassError


@dataclass(frozen=True)
class ClassBuckets:
    """Ordered revenue boundaries in cents; K = len(boundaries) + 1 classes."""

    boundaries: tuple[int, ...]

    def __post_init__(self):
        if not all(a < b for a, b in zip(self.boundaries, self.boundaries[1:])):
            raise ValueError("bucket boundaries must be strictly increasing")

    @property
    def n_classes(self) -> int:
        return len(self.boundaries) + 1

    @classmethod
    def from_millions(cls, millions) -> "ClassBuckets":
        return cls(tuple(round(m * 1_000_000 * 100) for m in millions))


DEFAULT_BUCKETS = ClassBuckets.from_millions((1, 10, 20, 40, 65, 100, 150, 225, 350))


def bucketize(revenue: int, buckets: ClassBuckets = DEFAULT_BUCKETS) -> int:
    """Class label = number of boundaries <= revenue (lower bound inclusive)."""
    if revenue < 0:
        raise ValueError(f"revenue must be non-negative, got {revenue}")
    return int(np.searchsorted(buckets.boundaries, revenue, side="right"))


def labels_for(records, buckets: ClassBuckets = DEFAULT_BUCKETS) -> np.ndarray:
    return np.array([bucketize(r.revenue, buckets) for r in records], dtype=int)


def balance(labels, seed: int, n_classes: int | None = None) -> np.ndarray:
    """Indices of a class-balanced subsample.

    Every class is downsampled without replacement to the size of the
    smallest class.  Selection is deterministic per seed; the returned
    indices are grouped by class and ascending within each class.
    """
    labels = np.asarray(labels, dtype=int)
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 0
    by_class = [np.flatnonzero(labels == k) for k in range(n_classes)]
    for k, idx in enumerate(by_class):
        if idx.size == 0:
            raise EmptyClassError(f"class {k} has no movies; cannot balance")
    target = min(idx.size for idx in by_class)
    rng = np.random.default_rng(seed)
    chosen = [np.sort(rng.choice(idx, size=target, replace=False)) for idx in by_class]
    return np.concatenate(chosen)


def split(n: int, test_fraction: float = 0.3, seed: int = 0):
    """Random (train_indices, test_indices) partition with round(f * n) test rows."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_test = int(round(test_fraction * n))
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


@dataclass
class EvalReport:
    bingo: float
    one_away: float
    confusion: np.ndarray  # [true, predicted] counts

    def to_dict(self) -> dict:
        return {
            "bingo": self.bingo,
            "one_away": self.one_away,
            "confusion": self.confusion.tolist(),
        }


def evaluate(model, test_x, test_y, n_classes: int = 10) -> EvalReport:
    """Bingo (exact) and one-class-away accuracy plus the confusion matrix."""
    test_y = np.asarray(test_y, dtype=int)
    if test_y.size == 0:
        raise ValueError("evaluate requires a non-empty test set")
    predicted = np.asarray(model.predict(test_x), dtype=int)
    bingo = float(np.mean(predicted == test_y))
    one_away = float(np.mean(np.abs(predicted - test_y) <= 1))
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(confusion, (test_y, predicted), 1)
    report = EvalReport(bingo=bingo, one_away=one_away, confusion=confusion)
    assert report.one_away >= report.bingo
    assert int(confusion.sum()) == test_y.size
    return report
