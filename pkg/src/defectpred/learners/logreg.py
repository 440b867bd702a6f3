"""L2-regularized logistic regression by full-batch gradient descent."""

from __future__ import annotations

import numpy as np

from defectpred.learners.base import LogregParams, ProbabilisticModel, check_training_data


def _log_sigmoid(z):
    return -np.logaddexp(0.0, -z)


def loss_and_grad(w: np.ndarray, X: np.ndarray, y: np.ndarray, lam: float) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood plus ``lam/2 * |w|^2`` (intercept excluded).

    ``w[0]`` is the intercept, ``w[1:]`` the feature weights.
    """
    z = w[0] + X @ w[1:]
    loss = -np.mean(y * _log_sigmoid(z) + (1 - y) * _log_sigmoid(-z)) + 0.5 * lam * w[1:] @ w[1:]
    r = np.exp(_log_sigmoid(z)) - y
    grad = np.empty_like(w)
    grad[0] = r.mean()
    grad[1:] = X.T @ r / len(y) + lam * w[1:]
    return float(loss), grad


class LogisticRegression(ProbabilisticModel):
    model_kind = "logreg"

    def __init__(self, weights: np.ndarray, converged: bool, n_iter: int):
        self.weights = weights
        self.converged = converged
        self.n_iter = n_iter
        self.feature_count = len(weights) - 1

    def decision_function(self, X) -> np.ndarray:
        X = self._check(X)
        return self.weights[0] + X @ self.weights[1:]

    def predict_proba(self, X) -> np.ndarray:
        z = self.decision_function(X)
        p1 = np.exp(_log_sigmoid(z))
        return np.column_stack([1.0 - p1, p1])


def fit_logreg(X, y, params: LogregParams | None = None) -> LogisticRegression:
    """Gradient descent with Armijo backtracking; stops when max |grad| < tol."""
    X, y = check_training_data(X, y)
    params = params or LogregParams()
    w = np.zeros(X.shape[1] + 1)
    loss, grad = loss_and_grad(w, X, y, params.lam)
    step = 1.0
    converged = False
    it = 0
    for it in range(1, params.max_iter + 1):
        if np.max(np.abs(grad)) < params.tol:
            converged = True
            break
        g2 = grad @ grad
        while True:
            cand = w - step * grad
            cand_loss, cand_grad = loss_and_grad(cand, X, y, params.lam)
            if cand_loss <= loss - 0.5 * step * g2 or step < 1e-12:
                break
            step *= 0.5
        w, loss, grad = cand, cand_loss, cand_grad
        step = min(step * 2.0, 1e3)
    else:
        converged = np.max(np.abs(grad)) < params.tol
    return LogisticRegression(w, bool(converged), it)
