import math

import numpy as np
import pytest

from boxoffice import classify
from boxoffice.classify import (
    AllThresholdModel,
    DEFAULT_BUCKETS,
    EnsembleModel,
    FrankHallModel,
    KNearestNeighborsBinary,
    LogisticRegressionGD,
    RandomForestBinary,
    all_threshold_loss_and_grad,
    logistic_loss_and_grad,
)
from boxoffice.errors import EmptyClassError


def dollars(millions):
    return round(millions * 1e6 * 100)


class TestBucketize:
    def test_below_first_boundary(self):
        assert classify.bucketize(dollars(0.5)) == 0

    def test_lower_bound_inclusive(self):
        assert classify.bucketize(dollars(10)) == 2

    def test_top_bucket(self):
        assert classify.bucketize(dollars(350)) == 9
        assert classify.bucketize(dollars(5000)) == 9

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            classify.bucketize(-1)

    @pytest.mark.parametrize("millions,label", [
        (0, 0), (0.999, 0), (1, 1), (9.99, 1), (20, 3), (39.9, 3),
        (40, 4), (65, 5), (100, 6), (150, 7), (225, 8), (349.99, 8),
    ])
    def test_full_table(self, millions, label):
        assert classify.bucketize(dollars(millions)) == label

    def test_boundaries_must_increase(self):
        with pytest.raises(ValueError):
            classify.ClassBuckets((100, 100))

    def test_default_has_ten_classes(self):
        assert DEFAULT_BUCKETS.n_classes == 10


class TestBalance:
    def test_downsamples_to_minimum_class(self):
        labels = np.array([0] * 8 + [1] * 3 + [2] * 5)
        idx = classify.balance(labels, seed=0)
        assert idx.size == 9
        assert np.bincount(labels[idx]).tolist() == [3, 3, 3]

    def test_already_balanced_keeps_everything(self):
        labels = np.array([0, 0, 1, 1, 2, 2])
        idx = classify.balance(labels, seed=5)
        assert sorted(idx.tolist()) == list(range(6))

    def test_deterministic_per_seed(self):
        labels = np.repeat(np.arange(4), [10, 7, 9, 12])
        a = classify.balance(labels, seed=3)
        b = classify.balance(labels, seed=3)
        assert np.array_equal(a, b)
        c = classify.balance(labels, seed=4)
        assert not np.array_equal(a, c)

    def test_empty_class_named_in_error(self):
        labels = np.array([0, 0, 2, 2])
        with pytest.raises(EmptyClassError, match="class 1"):
            classify.balance(labels, seed=0, n_classes=3)

    def test_selection_without_replacement(self):
        labels = np.array([0] * 100 + [1] * 40)
        idx = classify.balance(labels, seed=9)
        assert len(set(idx.tolist())) == idx.size


class TestSplit:
    def test_published_counts(self):
        train, test = classify.split(4170, test_fraction=0.3, seed=0)
        assert test.size == 1251
        assert train.size == 2919

    def test_deterministic(self):
        a = classify.split(100, seed=7)
        b = classify.split(100, seed=7)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_partition(self):
        train, test = classify.split(57, test_fraction=0.3, seed=1)
        combined = np.concatenate((train, test))
        assert np.array_equal(np.sort(combined), np.arange(57))

    def test_bad_fraction_rejected(self):
        with pytest.raises(ValueError):
            classify.split(10, test_fraction=1.5, seed=0)


class TestLogistic:
    def test_separable_two_points(self):
        X = np.array([[0.0], [1.0]])
        y = np.array([0, 1])
        model = LogisticRegressionGD().fit(X, y)
        p = model.predict_probability(X)
        assert p[1] > 0.5 > p[0]

    def test_constant_labels(self):
        X = np.array([[0.0], [1.0], [2.0]])
        model = LogisticRegressionGD().fit(X, np.ones(3))
        assert np.all(model.predict_probability(np.array([[5.0], [-5.0]])) > 0.5)
        model = LogisticRegressionGD().fit(X, np.zeros(3))
        assert np.all(model.predict_probability(X) < 0.5)

    def test_nonfinite_features_rejected(self):
        with pytest.raises(ValueError):
            LogisticRegressionGD().fit(np.array([[np.inf]]), np.array([1]))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(14)
        X = rng.normal(size=(20, 5))
        y = rng.integers(0, 2, size=20).astype(float)
        for _ in range(20):
            params = rng.normal(scale=0.5, size=6)
            _, grad = logistic_loss_and_grad(params, X, y, l2=1e-4)
            numeric = np.empty_like(grad)
            h = 1e-6
            for j in range(params.size):
                up, down = params.copy(), params.copy()
                up[j] += h
                down[j] -= h
                numeric[j] = (logistic_loss_and_grad(up, X, y, 1e-4)[0]
                              - logistic_loss_and_grad(down, X, y, 1e-4)[0]) / (2 * h)
            rel = np.linalg.norm(numeric - grad) / max(np.linalg.norm(numeric),
                                                       np.linalg.norm(grad))
            assert rel < 1e-5

    def test_serialization_roundtrip(self):
        X = np.array([[0.0], [1.0]])
        model = LogisticRegressionGD().fit(X, np.array([0, 1]))
        again = LogisticRegressionGD.from_dict(model.to_dict())
        assert np.array_equal(again.predict_probability(X), model.predict_probability(X))


class TestRandomForest:
    def test_learns_single_feature_threshold(self):
        rng = np.random.default_rng(15)
        X = rng.uniform(size=(400, 8))
        y = (X[:, 3] > 0.5).astype(int)
        model = RandomForestBinary(n_trees=30, seed=0).fit(X, y)
        predicted = (model.predict_probability(X) > 0.5).astype(int)
        assert (predicted == y).mean() >= 0.95

    def test_pure_labels_vote_unanimously(self):
        rng = np.random.default_rng(16)
        X = rng.normal(size=(30, 4))
        model = RandomForestBinary(n_trees=15, seed=1).fit(X, np.ones(30, dtype=int))
        assert np.all(model.predict_probability(X) == 1.0)
        model = RandomForestBinary(n_trees=15, seed=1).fit(X, np.zeros(30, dtype=int))
        assert np.all(model.predict_probability(X) == 0.0)

    def test_same_seed_same_predictions(self):
        rng = np.random.default_rng(17)
        X = rng.normal(size=(80, 6))
        y = (X[:, 0] + X[:, 1] > 0).astype(int)
        q = rng.normal(size=(20, 6))
        a = RandomForestBinary(n_trees=12, seed=5).fit(X, y).predict_probability(q)
        b = RandomForestBinary(n_trees=12, seed=5).fit(X, y).predict_probability(q)
        assert np.array_equal(a, b)

    def test_tree_count_extension_keeps_early_trees(self):
        rng = np.random.default_rng(18)
        X = rng.normal(size=(50, 4))
        y = (X[:, 0] > 0).astype(int)
        small = RandomForestBinary(n_trees=4, seed=2).fit(X, y)
        large = RandomForestBinary(n_trees=8, seed=2).fit(X, y)
        for a, b in zip(small.trees, large.trees[:4]):
            assert a.feature == b.feature
            assert a.threshold == b.threshold
            assert a.vote == b.vote

    def test_serialization_roundtrip(self):
        rng = np.random.default_rng(19)
        X = rng.normal(size=(40, 3))
        y = (X[:, 2] > 0).astype(int)
        model = RandomForestBinary(n_trees=6, seed=3).fit(X, y)
        again = RandomForestBinary.from_dict(model.to_dict())
        q = rng.normal(size=(10, 3))
        assert np.array_equal(again.predict_probability(q), model.predict_probability(q))


class TestKnn:
    def test_five_identical_positives(self):
        X = np.zeros((5, 2))
        model = KNearestNeighborsBinary().fit(X, np.ones(5, dtype=int))
        assert model.predict_probability(np.zeros(2)).item() == 1.0

    def test_three_of_five_positive(self):
        X = np.array([[0.0], [0.1], [0.2], [0.3], [0.4], [9.0]])
        y = np.array([1, 1, 1, 0, 0, 1])
        model = KNearestNeighborsBinary().fit(X, y)
        assert model.predict_probability(np.array([0.0])).item() == pytest.approx(0.6)

    def test_distance_tie_broken_by_lower_index(self):
        # six training points all at distance exactly 1 from the query;
        # the five lowest indices win: labels [1,1,1,1,0] -> 0.8
        X = np.array([[1.0, 0], [-1.0, 0], [0, 1.0], [0, -1.0],
                      [math.sqrt(0.5), math.sqrt(0.5)], [-math.sqrt(0.5), math.sqrt(0.5)]])
        X = np.array([[1.0, 0], [-1.0, 0], [0, 1.0], [0, -1.0], [1.0, 0], [1.0, 0]])
        y = np.array([1, 1, 1, 1, 0, 1])
        model = KNearestNeighborsBinary().fit(X, y)
        assert model.predict_probability(np.zeros(2)).item() == pytest.approx(0.8)

    def test_training_set_smaller_than_k_rejected(self):
        with pytest.raises(ValueError):
            KNearestNeighborsBinary().fit(np.zeros((3, 1)), np.zeros(3, dtype=int))


class _FixedProbability:
    """Stub binary classifier returning one constant probability."""

    def __init__(self, p):
        self.p = p

    def predict_probability(self, X):
        return np.full(np.atleast_2d(X).shape[0], self.p)


class _OracleBinary:
    """Reads the true label out of feature 0 and thresholds it at k."""

    def __init__(self, k):
        self.k = k

    def predict_probability(self, X):
        return (np.atleast_2d(X)[:, 0] > self.k).astype(float)


class _FixedPrediction:
    def __init__(self, label, n_classes=10):
        self.label = label
        self.n_classes = n_classes

    def predict(self, X):
        return np.full(np.atleast_2d(X).shape[0], self.label, dtype=int)


class TestFrankHall:
    def test_frozen_score_example(self):
        model = FrankHallModel([_FixedProbability(p) for p in (0.9, 0.6, 0.2)],
                               n_classes=4)
        scores = model.predict_scores(np.zeros((1, 1)))[0]
        assert scores == pytest.approx([0.1, 0.3, 0.4, 0.2])
        assert model.predict(np.zeros((1, 1)))[0] == 2

    def test_tie_goes_to_smallest_class(self):
        # scores (0.5, 0.0, 0.0, 0.5): argmax must pick class 0
        model = FrankHallModel([_FixedProbability(p) for p in (0.5, 0.5, 0.5)],
                               n_classes=4)
        assert model.predict(np.zeros((1, 1)))[0] == 0

    def test_oracle_binaries_recover_labels_exactly(self):
        rng = np.random.default_rng(20)
        model = FrankHallModel([_OracleBinary(k) for k in range(9)], n_classes=10)
        for _ in range(20):
            y = rng.integers(0, 10, size=50)
            X = np.column_stack((y.astype(float), rng.normal(size=50)))
            assert np.array_equal(model.predict(X), y)

    def test_scores_sum_to_one_exactly_on_dyadic_grid(self):
        # probabilities on the 2^-26 grid keep every difference and partial
        # sum exact in float64, so the telescoping identity holds exactly
        rng = np.random.default_rng(21)
        p = rng.integers(0, 2 ** 26 + 1, size=(2000, 9)) / 2.0 ** 26
        scores = FrankHallModel.class_scores(p)
        assert np.all(scores.sum(axis=1) == 1.0)

    def test_fit_on_separable_labels(self):
        rng = np.random.default_rng(22)
        y = rng.integers(0, 4, size=200)
        X = y[:, None] + rng.normal(scale=0.01, size=(200, 1))
        model = classify.frank_hall_fit(
            X, y, classify.make_classifier_factory("logistic", seed=0), n_classes=4)
        assert (model.predict(X) == y).mean() > 0.9

    def test_negative_differences_kept(self):
        # non-monotone probabilities produce a negative class-1 score
        model = FrankHallModel([_FixedProbability(p) for p in (0.2, 0.6, 0.1)],
                               n_classes=4)
        scores = model.predict_scores(np.zeros((1, 1)))[0]
        assert scores[1] == pytest.approx(-0.4)
        assert scores.sum() == pytest.approx(1.0)

    def test_serialization_roundtrip(self):
        rng = np.random.default_rng(23)
        y = rng.integers(0, 3, size=60)
        X = rng.normal(size=(60, 2)) + y[:, None]
        model = classify.frank_hall_fit(
            X, y, classify.make_classifier_factory("logistic", seed=1), n_classes=3)
        again = FrankHallModel.from_dict(model.to_dict())
        assert np.array_equal(again.predict(X), model.predict(X))


class TestAllThreshold:
    def test_monotone_in_one_dimension(self):
        X = np.linspace(0, 1, 120)[:, None]
        y = (X[:, 0] * 4).astype(int).clip(0, 3)
        model = AllThresholdModel(n_classes=4).fit(X, y)
        predicted = model.predict(X)
        assert np.all(np.diff(predicted) >= 0)

    def test_zero_weights_positive_thresholds_predict_class_zero(self):
        model = AllThresholdModel(n_classes=5)
        model.n_features = 3
        model.params = np.concatenate((np.zeros(3), [0.5], np.log(np.ones(3))))
        assert np.all(model.predict(np.random.default_rng(0).normal(size=(8, 3))) == 0)

    def test_thresholds_strictly_increasing_after_fit(self):
        rng = np.random.default_rng(24)
        X = rng.normal(size=(150, 4))
        y = rng.integers(0, 10, size=150)
        model = AllThresholdModel().fit(X, y)
        assert np.all(np.diff(model.thresholds) > 0)

    def test_decision_regions_contiguous_in_score(self):
        rng = np.random.default_rng(25)
        X = rng.normal(size=(100, 3))
        y = rng.integers(0, 6, size=100)
        model = AllThresholdModel(n_classes=6).fit(X, y)
        scores = X @ model.weights
        order = np.argsort(scores)
        assert np.all(np.diff(model.predict(X)[order]) >= 0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(26)
        X = rng.normal(size=(15, 4))
        y = rng.integers(0, 6, size=15)
        for _ in range(20):
            params = rng.normal(scale=0.5, size=4 + 5)
            _, grad = all_threshold_loss_and_grad(params, X, y, 6, 1e-4)
            numeric = np.empty_like(grad)
            h = 1e-6
            for j in range(params.size):
                up, down = params.copy(), params.copy()
                up[j] += h
                down[j] -= h
                numeric[j] = (all_threshold_loss_and_grad(up, X, y, 6, 1e-4)[0]
                              - all_threshold_loss_and_grad(down, X, y, 6, 1e-4)[0]) / (2 * h)
            rel = np.linalg.norm(numeric - grad) / max(np.linalg.norm(numeric),
                                                       np.linalg.norm(grad))
            assert rel < 1e-5

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            AllThresholdModel().fit(np.array([[np.nan]]), np.array([0]))

    def test_score_breakdown_sums_to_one(self):
        rng = np.random.default_rng(27)
        X = rng.normal(size=(40, 3))
        y = rng.integers(0, 10, size=40)
        model = AllThresholdModel().fit(X, y)
        scores = model.predict_scores(X)
        assert np.allclose(scores.sum(axis=1), 1.0)
        assert np.all(scores >= 0)

    def test_serialization_roundtrip(self):
        rng = np.random.default_rng(28)
        X = rng.normal(size=(50, 2))
        y = rng.integers(0, 4, size=50)
        model = AllThresholdModel(n_classes=4).fit(X, y)
        again = AllThresholdModel.from_dict(model.to_dict())
        assert np.array_equal(again.predict(X), model.predict(X))


class TestEnsemble:
    def test_majority_vote(self):
        members = [_FixedPrediction(3), _FixedPrediction(3), _FixedPrediction(5)]
        assert classify.ensemble_predict(members, np.zeros((4, 2))).tolist() == [3] * 4

    def test_tie_takes_smallest_class(self):
        members = [_FixedPrediction(2), _FixedPrediction(7)]
        assert classify.ensemble_predict(members, np.zeros((1, 2)))[0] == 2

    def test_single_model_identity(self):
        member = _FixedPrediction(8)
        assert classify.ensemble_predict([member], np.zeros((3, 1))).tolist() == [8, 8, 8]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            classify.ensemble_predict([], np.zeros((1, 1)))
        with pytest.raises(ValueError):
            EnsembleModel([])


class TestEvaluate:
    def test_one_away_hit(self):
        report = classify.evaluate(_FixedPrediction(4), np.zeros((1, 1)), [5])
        assert report.bingo == 0.0
        assert report.one_away == 1.0

    def test_perfect_predictor(self):
        model = _OracleBinaryWrapper()
        y = np.array([0, 3, 9, 5])
        X = y[:, None].astype(float)
        report = classify.evaluate(model, X, y)
        assert report.bingo == 1.0 and report.one_away == 1.0

    def test_off_by_two_everywhere(self):
        y = np.array([0, 1, 2, 3])
        model = _ShiftPredictor(2)
        report = classify.evaluate(model, y[:, None].astype(float), y)
        assert report.bingo == 0.0 and report.one_away == 0.0

    def test_confusion_sums_to_test_size(self):
        y = np.array([1, 2, 3, 4, 5])
        report = classify.evaluate(_FixedPrediction(3), y[:, None].astype(float), y)
        assert report.confusion.sum() == 5
        assert report.confusion[3, 3] == 1

    def test_empty_test_rejected(self):
        with pytest.raises(ValueError):
            classify.evaluate(_FixedPrediction(0), np.zeros((0, 1)), [])


class _OracleBinaryWrapper:
    def predict(self, X):
        return np.atleast_2d(X)[:, 0].astype(int)


class _ShiftPredictor:
    def __init__(self, shift):
        self.shift = shift

    def predict(self, X):
        return np.atleast_2d(X)[:, 0].astype(int) + self.shift
