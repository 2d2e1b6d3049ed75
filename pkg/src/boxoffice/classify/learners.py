"""Binary classifiers trained from scratch.

All three learners share the same behavioral contract: ``fit(X, y)`` with
labels in {0, 1}, ``predict_probability(X) -> P(y = 1)`` in [0, 1], and
bit-reproducible results for a fixed seed.  They are interchangeable inside
the ordinal decomposition.
"""

from __future__ import annotations

import numpy as np


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# ---------------------------------------------------------------------------
# Logistic regression (full-batch gradient descent)

def logistic_loss_and_grad(params, X, y, l2):
    """Mean log-loss with L2 on the weights (not the intercept).

    ``params`` is the packed vector [w_1..w_d, b].  Returns (loss, gradient)
    computed from the same expression so finite-difference checks are exact.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    w, b = params[:-1], params[-1]
    z = X @ w + b
    # log(1 + exp(-s*z)) with s = +-1 mapped from y
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z)) + 0.5 * l2 * float(w @ w)
    p = sigmoid(z)
    residual = (p - y) / y.size
    grad = np.empty_like(params)
    grad[:-1] = X.T @ residual + l2 * w
    grad[-1] = residual.sum()
    return loss, grad


class LogisticRegressionGD:
    """Sigmoid of an affine score, trained by full-batch gradient descent.

    The learning rate decays as lr / (1 + t * lr_decay); training stops at
    the iteration cap (150 by default).
    """

    def __init__(self, max_iter=150, learning_rate=0.1, lr_decay=1e-3, l2=1e-4, seed=0):
        self.max_iter = max_iter
        self.learning_rate = learning_rate
        self.lr_decay = lr_decay
        self.l2 = l2
        self.seed = seed
        self.params = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("features and labels must be finite")
        self.params = np.zeros(X.shape[1] + 1)
        for t in range(self.max_iter):
            _, grad = logistic_loss_and_grad(self.params, X, y, self.l2)
            self.params -= self.learning_rate / (1.0 + t * self.lr_decay) * grad
        return self

    def predict_probability(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return sigmoid(X @ self.params[:-1] + self.params[-1])

    def to_dict(self) -> dict:
        return {
            "type": "logistic",
            "max_iter": self.max_iter,
            "learning_rate": self.learning_rate,
            "lr_decay": self.lr_decay,
            "l2": self.l2,
            "seed": self.seed,
            "params": self.params.tolist(),
        }

    @classmethod
    def from_dict(cls, doc) -> "LogisticRegressionGD":
        model = cls(max_iter=doc["max_iter"], learning_rate=doc["learning_rate"],
                    lr_decay=doc["lr_decay"], l2=doc["l2"], seed=doc["seed"])
        model.params = np.asarray(doc["params"], dtype=float)
        return model


# ---------------------------------------------------------------------------
# Random forest (CART, Gini impurity, bootstrap, sqrt-d feature subsampling)

class _TreeArrays:
    """One fitted tree as parallel arrays; leaves have feature == -1."""

    __slots__ = ("feature", "threshold", "left", "right", "vote")

    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.vote = []

    def _add_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.vote.append(0)
        return len(self.feature) - 1

    def apply(self, X):
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        vote = np.asarray(self.vote)
        node = np.zeros(X.shape[0], dtype=int)
        active = feature[node] >= 0
        while np.any(active):
            idx = np.flatnonzero(active)
            f = feature[node[idx]]
            goes_left = X[idx, f] < threshold[node[idx]]
            node[idx] = np.where(goes_left, left[node[idx]], right[node[idx]])
            active = feature[node] >= 0
        return vote[node]


def _best_split(X, y, sample_idx, feature_idx):
    """Minimum weighted Gini split among candidate features; None if no split."""
    n = sample_idx.size
    best = None  # (impurity, feature, threshold)
    for f in feature_idx:
        xs = X[sample_idx, f]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        ys = y[sample_idx][order]
        distinct = xs[1:] > xs[:-1]
        if not np.any(distinct):
            continue
        pos_left = np.cumsum(ys)[:-1]
        n_left = np.arange(1, n)
        n_right = n - n_left
        pos_right = pos_left[-1] + ys[-1] - pos_left
        p_l = pos_left / n_left
        p_r = pos_right / n_right
        gini = (n_left * 2 * p_l * (1 - p_l) + n_right * 2 * p_r * (1 - p_r)) / n
        gini = np.where(distinct, gini, np.inf)
        i = int(np.argmin(gini))
        if best is None or gini[i] < best[0]:
            best = (float(gini[i]), int(f), float((xs[i] + xs[i + 1]) / 2.0))
    return best


def _grow_tree(X, y, rng, max_features, max_depth, min_samples_split) -> _TreeArrays:
    tree = _TreeArrays()
    root = tree._add_node()
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, sample_idx, depth = stack.pop()
        ys = y[sample_idx]
        pos = int(ys.sum())
        tree.vote[node] = 1 if pos * 2 > sample_idx.size else 0
        if (pos == 0 or pos == sample_idx.size
                or sample_idx.size < min_samples_split
                or (max_depth is not None and depth >= max_depth)):
            continue
        feature_idx = np.sort(rng.choice(X.shape[1], size=max_features, replace=False))
        found = _best_split(X, y, sample_idx, feature_idx)
        if found is None:
            continue
        _, f, threshold = found
        goes_left = X[sample_idx, f] < threshold
        tree.feature[node] = f
        tree.threshold[node] = threshold
        left = tree._add_node()
        right = tree._add_node()
        tree.left[node] = left
        tree.right[node] = right
        # Push right first so the left subtree is grown (and consumes the
        # rng) first, keeping growth order independent of stack internals.
        stack.append((right, sample_idx[~goes_left], depth + 1))
        stack.append((left, sample_idx[goes_left], depth + 1))
    return tree


class RandomForestBinary:
    """Bootstrap ensemble of CART trees; probability = fraction of trees voting 1.

    Each tree draws its own generator seeded by (seed, tree_index), so the
    earlier trees are unchanged when n_trees grows and per-tree training is
    schedule-independent.
    """

    def __init__(self, n_trees=100, max_depth=None, min_samples_split=2, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.seed = seed
        self.trees: list[_TreeArrays] = []

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        n, d = X.shape
        max_features = max(1, int(np.sqrt(d)))
        self.trees = []
        for t in range(self.n_trees):
            rng = np.random.default_rng((self.seed, t))
            boot = rng.integers(0, n, size=n)
            self.trees.append(_grow_tree(X[boot], y[boot], rng, max_features,
                                         self.max_depth, self.min_samples_split))
        return self

    def predict_probability(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += tree.apply(X)
        return votes / len(self.trees)

    def to_dict(self) -> dict:
        return {
            "type": "forest",
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "seed": self.seed,
            "trees": [
                {"feature": t.feature, "threshold": t.threshold,
                 "left": t.left, "right": t.right, "vote": t.vote}
                for t in self.trees
            ],
        }

    @classmethod
    def from_dict(cls, doc) -> "RandomForestBinary":
        model = cls(n_trees=doc["n_trees"], max_depth=doc["max_depth"],
                    min_samples_split=doc["min_samples_split"], seed=doc["seed"])
        for tdoc in doc["trees"]:
            tree = _TreeArrays()
            tree.feature = list(tdoc["feature"])
            tree.threshold = list(tdoc["threshold"])
            tree.left = list(tdoc["left"])
            tree.right = list(tdoc["right"])
            tree.vote = list(tdoc["vote"])
            model.trees.append(tree)
        return model


# ---------------------------------------------------------------------------
# K nearest neighbors

class KNearestNeighborsBinary:
    """Probability = positive fraction among the k nearest training points
    by Euclidean distance; distance ties go to the lower training index."""

    def __init__(self, k=5, seed=0):
        self.k = k
        self.seed = seed
        self.train_x = None
        self.train_y = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        if X.shape[0] < self.k:
            raise ValueError(f"need at least k={self.k} training points, got {X.shape[0]}")
        self.train_x = X
        self.train_y = y
        return self

    def predict_probability(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(X.shape[0])
        for i, q in enumerate(X):
            d2 = ((self.train_x - q) ** 2).sum(axis=1)
            nearest = np.argsort(d2, kind="stable")[: self.k]
            out[i] = self.train_y[nearest].mean()
        return out

    def to_dict(self) -> dict:
        return {
            "type": "knn",
            "k": self.k,
            "seed": self.seed,
            "train_x": self.train_x.tolist(),
            "train_y": self.train_y.tolist(),
        }

    @classmethod
    def from_dict(cls, doc) -> "KNearestNeighborsBinary":
        model = cls(k=doc["k"], seed=doc["seed"])
        model.train_x = np.asarray(doc["train_x"], dtype=float)
        model.train_y = np.asarray(doc["train_y"], dtype=int)
        return model


BINARY_CLASSIFIERS = {
    "logistic": LogisticRegressionGD,
    "forest": RandomForestBinary,
    "knn": KNearestNeighborsBinary,
}


def binary_classifier_from_dict(doc):
    return BINARY_CLASSIFIERS[doc["type"]].from_dict(doc)
