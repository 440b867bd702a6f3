"""k-nearest-neighbour vote fractions."""

from __future__ import annotations

import numpy as np

from defectpred.errors import KTooLarge
from defectpred.learners.base import KnnParams, ProbabilisticModel, check_training_data


class KNearestNeighbors(ProbabilisticModel):
    model_kind = "knn"

    def __init__(self, X: np.ndarray, y: np.ndarray, k: int):
        self.X = X
        self.y = y
        self.k = k
        self.feature_count = X.shape[1]

    def neighbors(self, Q) -> np.ndarray:
        """Indices of the k nearest training rows per query; equal distances favour the lower index."""
        Q = self._check(Q)
        out = np.empty((len(Q), self.k), dtype=int)
        chunk = max(1, 4_000_000 // max(1, len(self.X) * self.feature_count))
        for s in range(0, len(Q), chunk):
            block = Q[s:s + chunk]
            d2 = ((block[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
            out[s:s + chunk] = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return out

    def predict_proba(self, X) -> np.ndarray:
        votes = self.y[self.neighbors(X)]
        p1 = votes.sum(axis=1) / self.k
        return np.column_stack([1.0 - p1, p1])


def fit_knn(X, y, params: KnnParams | None = None) -> KNearestNeighbors:
    X, y = check_training_data(X, y)
    params = params or KnnParams()
    if params.k > len(y):
        raise KTooLarge(f"k={params.k} exceeds training size {len(y)}")
    return KNearestNeighbors(X.copy(), y.copy(), params.k)
