"""Linear discriminant analysis with a shared, ridge-regularized covariance."""

from __future__ import annotations

import numpy as np

from defectpred.learners.base import LdaParams, ProbabilisticModel, check_training_data, log_normalize


class LinearDiscriminant(ProbabilisticModel):
    model_kind = "lda"

    def __init__(self, means, covariance, priors):
        self.means = means
        self.covariance = covariance
        self.priors = priors
        self.feature_count = means.shape[1]
        self._precision = np.linalg.inv(covariance)

    def log_joint(self, X) -> np.ndarray:
        """log p(x | class) + log prior, up to a class-independent constant."""
        X = self._check(X)
        out = np.empty((len(X), 2))
        for c in range(2):
            diff = X - self.means[c]
            maha = np.einsum("ij,jk,ik->i", diff, self._precision, diff)
            out[:, c] = -0.5 * maha + np.log(self.priors[c])
        return out

    def predict_proba(self, X) -> np.ndarray:
        return log_normalize(self.log_joint(X))


def fit_lda(X, y, params: LdaParams | None = None) -> LinearDiscriminant:
    X, y = check_training_data(X, y, both_classes=True)
    params = params or LdaParams()
    n, d = X.shape
    means = np.vstack([X[y == c].mean(axis=0) for c in (0, 1)])
    centered = X - means[y]
    cov = centered.T @ centered / n + params.ridge * np.eye(d)
    priors = np.array([np.mean(y == 0), np.mean(y == 1)])
    return LinearDiscriminant(means, cov, priors)
