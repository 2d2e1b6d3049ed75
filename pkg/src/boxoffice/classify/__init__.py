"""Ordinal revenue-class prediction: buckets, balancing, splitting, binary
base learners, two ordinal approaches, the ensemble, and evaluation."""

from .learners import (
    BINARY_CLASSIFIERS,
    KNearestNeighborsBinary,
    LogisticRegressionGD,
    RandomForestBinary,
    binary_classifier_from_dict,
    logistic_loss_and_grad,
    sigmoid,
)
from .metrics import (
    DEFAULT_BUCKETS,
    ClassBuckets,
    EvalReport,
    balance,
    bucketize,
    evaluate,
    labels_for,
    split,
)
from .ordinal import (
    AllThresholdModel,
    EnsembleModel,
    FrankHallModel,
    all_threshold_loss_and_grad,
    ensemble_predict,
    frank_hall_fit,
    make_classifier_factory,
)

__all__ = [
    "BINARY_CLASSIFIERS",
    "KNearestNeighborsBinary",
    "LogisticRegressionGD",
    "RandomForestBinary",
    "binary_classifier_from_dict",
    "logistic_loss_and_grad",
    "sigmoid",
    "DEFAULT_BUCKETS",
    "ClassBuckets",
    "EvalReport",
    "balance",
    "bucketize",
    "evaluate",
    "labels_for",
    "split",
    "AllThresholdModel",
    "EnsembleModel",
    "FrankHallModel",
    "all_threshold_loss_and_grad",
    "ensemble_predict",
    "frank_hall_fit",
    "make_classifier_factory",
]
