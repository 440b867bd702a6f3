"""Shared probabilistic-classifier contract and default hyperparameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from defectpred.errors import EmptyTrainingSet, SingleClassTrainingSet


class ProbabilisticModel:
    """A fitted binary classifier.

    ``predict_proba`` returns an ``(n, 2)`` array whose rows lie on the
    probability simplex; ``predict`` takes the argmax with ties going to class 0.
    """

    model_kind: str = ""
    feature_count: int = 0

    def predict_proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        p = self.predict_proba(X)
        return (p[:, 1] > p[:, 0]).astype(int)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.feature_count:
            raise ValueError(f"expected {self.feature_count} features, got {X.shape[1]}")
        return X


@dataclass
class CartParams:
    min_split: int = 2
    max_depth: int | None = None


@dataclass
class KnnParams:
    k: int = 5


@dataclass
class RfParams:
    trees: int = 100
    features_per_split: int | None = None   # None: ceil(sqrt(d))
    bootstrap: bool = True

    def resolve_features(self, d: int) -> int:
        if self.features_per_split is None:
            return max(1, math.ceil(math.sqrt(d)))
        return max(1, min(d, self.features_per_split))


@dataclass
class LogregParams:
    lam: float = 1e-4
    max_iter: int = 1000
    tol: float = 1e-6


@dataclass
class GnbParams:
    var_floor: float = 1e-9   # fraction of the largest feature variance


@dataclass
class LdaParams:
    ridge: float = 1e-9


@dataclass
class SvmParams:
    lam: float = 1e-4
    epochs: int = 200
    platt_max_iter: int = 100


@dataclass
class HyperParams:
    cart: CartParams = field(default_factory=CartParams)
    knn: KnnParams = field(default_factory=KnnParams)
    rf: RfParams = field(default_factory=RfParams)
    logreg: LogregParams = field(default_factory=LogregParams)
    gnb: GnbParams = field(default_factory=GnbParams)
    lda: LdaParams = field(default_factory=LdaParams)
    svm: SvmParams = field(default_factory=SvmParams)


def check_training_data(X, y, both_classes: bool = False) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyTrainingSet("training set is empty")
    if len(y) != X.shape[0]:
        raise ValueError("X and y lengths differ")
    if both_classes and len(np.unique(y)) < 2:
        raise SingleClassTrainingSet("both classes must be present in the training set")
    return X, y


def log_normalize(log_joint: np.ndarray) -> np.ndarray:
    """Turn per-class log scores into probabilities without overflow."""
    top = log_joint.max(axis=1, keepdims=True)
    e = np.exp(log_joint - top)
    return e / e.sum(axis=1, keepdims=True)
