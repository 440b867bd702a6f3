"""Gaussian naive Bayes, evaluated in log space."""

from __future__ import annotations

import numpy as np

from defectpred.learners.base import GnbParams, ProbabilisticModel, check_training_data, log_normalize


class GaussianNaiveBayes(ProbabilisticModel):
    model_kind = "gnb"

    def __init__(self, means, variances, priors):
        self.means = means
        self.variances = variances
        self.priors = priors
        self.feature_count = means.shape[1]

    def log_joint(self, X) -> np.ndarray:
        X = self._check(X)
        out = np.empty((len(X), 2))
        for c in range(2):
            var = self.variances[c]
            ll = -0.5 * (np.log(2.0 * np.pi * var) + (X - self.means[c]) ** 2 / var)
            out[:, c] = ll.sum(axis=1) + np.log(self.priors[c])
        return out

    def predict_proba(self, X) -> np.ndarray:
        return log_normalize(self.log_joint(X))


def fit_gnb(X, y, params: GnbParams | None = None) -> GaussianNaiveBayes:
    X, y = check_training_data(X, y, both_classes=True)
    params = params or GnbParams()
    floor = params.var_floor * X.var(axis=0).max()
    if floor <= 0:
        floor = params.var_floor
    means = np.vstack([X[y == c].mean(axis=0) for c in (0, 1)])
    variances = np.vstack([np.maximum(X[y == c].var(axis=0), floor) for c in (0, 1)])
    priors = np.array([np.mean(y == 0), np.mean(y == 1)])
    return GaussianNaiveBayes(means, variances, priors)
