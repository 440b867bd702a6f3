"""Fold planning, standardization and SMOTE oversampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from defectpred.errors import DegenerateMinority, EmptyTrainingSet, TooFewSamples


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: np.ndarray
    seed: int

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)

    def validation_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def splits(self):
        for f in range(self.k):
            yield f, self.train_indices(f), self.validation_indices(f)


def stratified_folds(labels, k: int = 10, seed: int = 42) -> FoldPlan:
    """Shuffle each class and deal it round-robin over the folds.

    The dealing position carries over from one class to the next so that
    total fold sizes also differ by at most one.
    """
    y = np.asarray(getattr(labels, "y", labels), dtype=int)
    if k < 2:
        raise ValueError("k must be at least 2")
    rng = np.random.default_rng(seed)
    assignment = np.full(len(y), -1, dtype=int)
    offset = 0
    for cls in (1, 0):
        idx = np.flatnonzero(y == cls)
        if len(idx) < k:
            raise TooFewSamples(cls, len(idx), k)
        idx = idx[rng.permutation(len(idx))]
        assignment[idx] = (offset + np.arange(len(idx))) % k
        offset = (offset + len(idx)) % k
    if (assignment < 0).any():
        raise ValueError("labels must be binary 0/1")
    return FoldPlan(k=k, assignment=assignment, seed=seed)


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, rows) -> np.ndarray:
        return (np.asarray(rows, dtype=float) - self.mean) / self.std


def fit_scaler(train_rows) -> Scaler:
    X = np.asarray(train_rows, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyTrainingSet("cannot fit a scaler on zero rows")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return Scaler(mean=mean, std=std)


def apply_scaler(scaler: Scaler, rows) -> np.ndarray:
    return scaler.transform(rows)


def _nearest_neighbors(points: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest other points (Euclidean), ties to the lower index."""
    m = len(points)
    nn = np.empty((m, k), dtype=int)
    chunk = max(1, 2_000_000 // max(m, 1))
    for start in range(0, m, chunk):
        block = points[start:start + chunk]
        d2 = ((block[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        d2[np.arange(len(block)), np.arange(start, start + len(block))] = np.inf
        nn[start:start + chunk] = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return nn


def smote_oversample(X, y, k_neighbors: int = 5, seed: int = 42) -> tuple[np.ndarray, np.ndarray]:
    """Append synthetic minority rows until both classes have equal counts.

    Each synthetic row is ``x + u * (x_nn - x)`` with ``x`` a random minority row,
    ``x_nn`` one of its ``k_neighbors`` nearest minority rows and ``u ~ U[0, 1)``.
    Original rows come first, unchanged.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    counts = np.bincount(y, minlength=2)
    if counts[0] == counts[1]:
        return X.copy(), y.copy()
    minority = int(np.argmin(counts))
    minority_rows = X[y == minority]
    m = len(minority_rows)
    if m < 2:
        raise DegenerateMinority(f"minority class {minority} has {m} sample(s); SMOTE needs 2")
    k = min(k_neighbors, m - 1)
    n_new = int(counts.max() - counts.min())

    rng = np.random.default_rng(seed)
    nn = _nearest_neighbors(minority_rows, k)
    base = rng.integers(0, m, size=n_new)
    pick = rng.integers(0, k, size=n_new)
    u = rng.random(n_new)[:, None]
    x = minority_rows[base]
    x_nn = minority_rows[nn[base, pick]]
    synthetic = x + u * (x_nn - x)
    return (np.vstack([X, synthetic]),
            np.concatenate([y, np.full(n_new, minority, dtype=int)]))
