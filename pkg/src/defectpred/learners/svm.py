"""Linear SVM (Pegasos subgradient descent) with Platt-scaled probabilities."""

from __future__ import annotations

import numpy as np
from numba import njit

from defectpred.preprocess import apply_scaler, fit_scaler
from defectpred.learners.base import ProbabilisticModel, SvmParams, check_training_data


@njit(cache=True)
def _pegasos(Xa, s, lam, epochs):
    # Returns the mean of the iterates over the second half of training; the last
    # iterate alone swings with the fixed visiting order.
    n, d = Xa.shape
    w = np.zeros(d)
    avg = np.zeros(d)
    total = epochs * n
    t = 0
    counted = 0
    for _ in range(epochs):
        for i in range(n):
            t += 1
            eta = 1.0 / (lam * t)
            margin = 0.0
            for j in range(d):
                margin += w[j] * Xa[i, j]
            margin *= s[i]
            shrink = 1.0 - eta * lam
            for j in range(d):
                w[j] *= shrink
            if margin < 1.0:
                for j in range(d):
                    w[j] += eta * s[i] * Xa[i, j]
            if 2 * t > total:
                counted += 1
                for j in range(d):
                    avg[j] += (w[j] - avg[j]) / counted
    return avg


def _platt_objective(f, t, A, B):
    z = f * A + B
    return float(np.sum(np.logaddexp(0.0, z) - (1.0 - t) * z))


def fit_platt(decision, y, max_iter: int = 100) -> tuple[float, float]:
    """Fit ``P(y=1 | f) = 1 / (1 + exp(A f + B))`` by regularized maximum likelihood.

    Newton's method with backtracking on Platt's smoothed targets
    (N+ + 1)/(N+ + 2) and 1/(N- + 2).
    """
    f = np.asarray(decision, dtype=float)
    y = np.asarray(y, dtype=int)
    n_pos = float(np.sum(y == 1))
    n_neg = float(np.sum(y == 0))
    t = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))
    A, B = 0.0, float(np.log((n_neg + 1.0) / (n_pos + 1.0)))
    fval = _platt_objective(f, t, A, B)
    sigma, eps, min_step = 1e-12, 1e-5, 1e-10
    for _ in range(max_iter):
        z = f * A + B
        p = np.exp(-np.logaddexp(0.0, z))
        q = np.exp(-np.logaddexp(0.0, -z))
        d2 = p * q
        h11 = sigma + np.sum(f * f * d2)
        h22 = sigma + np.sum(d2)
        h21 = np.sum(f * d2)
        d1 = t - p
        g1 = np.sum(f * d1)
        g2 = np.sum(d1)
        if abs(g1) < eps and abs(g2) < eps:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= min_step:
            newA, newB = A + step * dA, B + step * dB
            newf = _platt_objective(f, t, newA, newB)
            if newf < fval + 1e-4 * step * gd:
                A, B, fval = newA, newB, newf
                break
            step /= 2.0
        if step < min_step:
            break
    return float(A), float(B)


class LinearSVM(ProbabilisticModel):
    model_kind = "svm"

    def __init__(self, weights: np.ndarray, platt_a: float, platt_b: float):
        self.weights = weights
        self.platt_a = platt_a
        self.platt_b = platt_b
        self.feature_count = len(weights) - 1

    def decision_function(self, X) -> np.ndarray:
        X = self._check(X)
        return X @ self.weights[:-1] + self.weights[-1]

    def predict_proba(self, X) -> np.ndarray:
        z = self.platt_a * self.decision_function(X) + self.platt_b
        p1 = np.exp(-np.logaddexp(0.0, z))
        return np.column_stack([1.0 - p1, p1])


def fit_svm(X, y, params: SvmParams | None = None) -> LinearSVM:
    """Hinge loss + L2 penalty; samples visited in index order every epoch,
    returning the suffix-averaged Pegasos iterate.

    Features are standardized internally (the transform is folded back into the
    weights), so a positive rescaling of the inputs does not change the solution.
    The intercept is carried as a constant feature and is regularized with the rest.
    """
    X, y = check_training_data(X, y, both_classes=True)
    params = params or SvmParams()
    scaler = fit_scaler(X)
    Z = apply_scaler(scaler, X)
    Za = np.hstack([Z, np.ones((len(Z), 1))])
    s = np.where(y == 1, 1.0, -1.0)
    wz = _pegasos(np.ascontiguousarray(Za), s, float(params.lam), int(params.epochs))
    coef = wz[:-1] / scaler.std
    w = np.append(coef, wz[-1] - coef @ scaler.mean)
    decision = Za @ wz
    A, B = fit_platt(decision, y, params.platt_max_iter)
    return LinearSVM(w, A, B)
