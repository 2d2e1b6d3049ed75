"""Ordinal classification over revenue classes 0..K-1.

Two approaches plus a majority-vote ensemble:

* Binary decomposition: K-1 binary classifiers, the k-th trained on
  indicator(label > k).  Class scores come from telescoping probability
  differences, so they always sum to exactly 1; the predicted class is the
  argmax with ties resolved to the smallest label.

* All-threshold ordinal logistic: one weight vector w and ordered
  thresholds t_1 < ... < t_{K-1}.  Every threshold k contributes a logistic
  loss on the margin s_k(y) * (t_k - w.x) with s_k(y) = +1 if y <= k else
  -1, so an instance is penalized by every threshold on the wrong side.
  Thresholds stay ordered by optimizing the first threshold plus the logs
  of the positive gaps.
"""

from __future__ import annotations

import numpy as np

from .learners import (
    KNearestNeighborsBinary,
    LogisticRegressionGD,
    RandomForestBinary,
    binary_classifier_from_dict,
    sigmoid,
)


# ---------------------------------------------------------------------------
# Binary decomposition

class FrankHallModel:
    """K-1 fitted binary classifiers, member k answering P(label > k)."""

    def __init__(self, classifiers, n_classes: int):
        if len(classifiers) != n_classes - 1:
            raise ValueError(f"need {n_classes - 1} classifiers, got {len(classifiers)}")
        self.classifiers = list(classifiers)
        self.n_classes = n_classes

    def probability_matrix(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([c.predict_probability(X) for c in self.classifiers])

    @staticmethod
    def class_scores(probabilities) -> np.ndarray:
        """Telescoping scores: P(y=0) = 1 - P_0, P(y=k) = P_{k-1} - P_k,
        P(y=K-1) = P_{K-2}.  Differences may be negative and are kept as is."""
        p = np.atleast_2d(np.asarray(probabilities, dtype=float))
        scores = np.empty((p.shape[0], p.shape[1] + 1))
        scores[:, 0] = 1.0 - p[:, 0]
        scores[:, 1:-1] = p[:, :-1] - p[:, 1:]
        scores[:, -1] = p[:, -1]
        return scores

    def predict_scores(self, X) -> np.ndarray:
        return self.class_scores(self.probability_matrix(X))

    def predict(self, X) -> np.ndarray:
        # argmax returns the first maximum, i.e. ties go to the smallest class
        return np.argmax(self.predict_scores(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "kind": "frank-hall",
            "n_classes": self.n_classes,
            "classifiers": [c.to_dict() for c in self.classifiers],
        }

    @classmethod
    def from_dict(cls, doc) -> "FrankHallModel":
        return cls([binary_classifier_from_dict(d) for d in doc["classifiers"]],
                   n_classes=doc["n_classes"])


def frank_hall_fit(X, y, classifier_factory, n_classes: int = 10) -> FrankHallModel:
    """Fit the decomposition; ``classifier_factory(k)`` builds member k."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    classifiers = []
    for k in range(n_classes - 1):
        member = classifier_factory(k)
        member.fit(X, (y > k).astype(int))
        classifiers.append(member)
    return FrankHallModel(classifiers, n_classes)


def make_classifier_factory(kind: str, seed: int, **kwargs):
    """Seeded factory for decomposition members; member k gets seed (seed, k)
    collapsed by fixed arithmetic so members never share random streams."""
    cls = {"logistic": LogisticRegressionGD,
           "forest": RandomForestBinary,
           "knn": KNearestNeighborsBinary}[kind]

    def factory(k: int):
        return cls(seed=seed * 1_000 + k, **kwargs)

    return factory


# ---------------------------------------------------------------------------
# All-threshold ordinal logistic

def _unpack(params, n_features, n_classes):
    w = params[:n_features]
    theta0 = params[n_features]
    gaps = np.exp(params[n_features + 1:])
    thresholds = np.empty(n_classes - 1)
    thresholds[0] = theta0
    thresholds[1:] = theta0 + np.cumsum(gaps)
    return w, thresholds, gaps


def all_threshold_loss_and_grad(params, X, y, n_classes, l2):
    """Loss and gradient in the packed parametrization
    [w, t_1, log gap_2, ..., log gap_{K-1}]; the log-gap parametrization
    keeps thresholds strictly increasing throughout training."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    n, d = X.shape
    w, thresholds, gaps = _unpack(params, d, n_classes)
    margins = X @ w
    ks = np.arange(n_classes - 1)
    signs = np.where(y[:, None] <= ks[None, :], 1.0, -1.0)
    z = signs * (thresholds[None, :] - margins[:, None])
    loss = float(np.logaddexp(0.0, -z).sum(axis=1).mean()) + 0.5 * l2 * float(w @ w)

    weighted = sigmoid(-z) * signs / n        # (n, K-1)
    grad_thresholds = -weighted.sum(axis=0)   # d loss / d t_k
    grad_margin = weighted.sum(axis=1)        # d loss / d (w.x_i)
    grad = np.empty_like(params)
    grad[:d] = X.T @ grad_margin + l2 * w
    grad[d] = grad_thresholds.sum()
    # t_k depends on gap_j for every k >= j, and d gap / d log gap = gap
    tail = np.cumsum(grad_thresholds[::-1])[::-1]
    grad[d + 1:] = gaps * tail[1:]
    return loss, grad


class AllThresholdModel:
    """Ordinal logistic with a single score direction and ordered thresholds.

    Prediction is the number of thresholds at or below the score w.x, so the
    decision regions are contiguous intervals of the score.
    """

    def __init__(self, n_classes=10, max_iter=300, learning_rate=0.1,
                 lr_decay=1e-3, l2=1e-4, seed=0):
        self.n_classes = n_classes
        self.max_iter = max_iter
        self.learning_rate = learning_rate
        self.lr_decay = lr_decay
        self.l2 = l2
        self.seed = seed
        self.params = None
        self.n_features = None

    @staticmethod
    def initial_params(n_features, n_classes) -> np.ndarray:
        # thresholds evenly spread over [-1, 1], weights at zero
        params = np.zeros(n_features + n_classes - 1)
        params[n_features] = -1.0
        if n_classes > 2:
            params[n_features + 1:] = np.log(2.0 / (n_classes - 2))
        return params

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        self.n_features = X.shape[1]
        self.params = self.initial_params(self.n_features, self.n_classes)
        for t in range(self.max_iter):
            _, grad = all_threshold_loss_and_grad(self.params, X, y, self.n_classes, self.l2)
            self.params -= self.learning_rate / (1.0 + t * self.lr_decay) * grad
        return self

    @property
    def weights(self) -> np.ndarray:
        return self.params[: self.n_features]

    @property
    def thresholds(self) -> np.ndarray:
        _, thresholds, _ = _unpack(self.params, self.n_features, self.n_classes)
        return thresholds

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        scores = X @ self.weights
        return (scores[:, None] >= self.thresholds[None, :]).sum(axis=1)

    def predict_scores(self, X) -> np.ndarray:
        """Per-class probabilities under the cumulative-logistic reading:
        P(y <= k) = sigmoid(t_k - w.x)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        cumulative = sigmoid(self.thresholds[None, :] - (X @ self.weights)[:, None])
        scores = np.empty((X.shape[0], self.n_classes))
        scores[:, 0] = cumulative[:, 0]
        scores[:, 1:-1] = cumulative[:, 1:] - cumulative[:, :-1]
        scores[:, -1] = 1.0 - cumulative[:, -1]
        return scores

    def to_dict(self) -> dict:
        return {
            "kind": "all-threshold",
            "n_classes": self.n_classes,
            "max_iter": self.max_iter,
            "learning_rate": self.learning_rate,
            "lr_decay": self.lr_decay,
            "l2": self.l2,
            "seed": self.seed,
            "n_features": self.n_features,
            "params": self.params.tolist(),
        }

    @classmethod
    def from_dict(cls, doc) -> "AllThresholdModel":
        model = cls(n_classes=doc["n_classes"], max_iter=doc["max_iter"],
                    learning_rate=doc["learning_rate"], lr_decay=doc["lr_decay"],
                    l2=doc["l2"], seed=doc["seed"])
        model.n_features = doc["n_features"]
        model.params = np.asarray(doc["params"], dtype=float)
        return model


# ---------------------------------------------------------------------------
# Majority-vote ensemble

def ensemble_predict(models, X) -> np.ndarray:
    """Majority vote over member predictions; ties go to the smallest class."""
    if not models:
        raise ValueError("ensemble requires at least one model")
    votes = np.stack([np.asarray(m.predict(X), dtype=int) for m in models])
    n_classes = max(getattr(m, "n_classes", 0) for m in models) or int(votes.max()) + 1
    out = np.empty(votes.shape[1], dtype=int)
    for i in range(votes.shape[1]):
        out[i] = int(np.argmax(np.bincount(votes[:, i], minlength=n_classes)))
    return out


class EnsembleModel:
    def __init__(self, members, member_kinds=None, n_classes: int = 10):
        if not members:
            raise ValueError("ensemble requires at least one model")
        self.members = list(members)
        self.member_kinds = list(member_kinds) if member_kinds else None
        self.n_classes = n_classes

    def predict(self, X) -> np.ndarray:
        return ensemble_predict(self.members, X)

    def vote_scores(self, X) -> np.ndarray:
        votes = np.stack([np.asarray(m.predict(X), dtype=int) for m in self.members])
        scores = np.zeros((votes.shape[1], self.n_classes))
        for i in range(votes.shape[1]):
            scores[i] = np.bincount(votes[:, i], minlength=self.n_classes)
        return scores / len(self.members)
