"""CART with Gini impurity, and a bagged random forest built from it."""

from __future__ import annotations

import numpy as np
from numba import njit

from defectpred.learners.base import CartParams, ProbabilisticModel, RfParams, check_training_data


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - (p ** 2).sum())


@njit(cache=True)
def _grow(X, y, min_split, max_depth, n_candidates, perms):
    """Grow a tree over an in-place partitioned index buffer.

    ``max_depth < 0`` means unlimited. ``perms`` holds one feature permutation
    per potential node; pass an empty array to scan features in index order.
    Thresholds are midpoints between consecutive distinct sorted values.
    """
    n, d = X.shape
    cap = 2 * n - 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros((cap, 2))
    idx = np.arange(n)
    use_perm = perms.shape[0] > 0

    pos = 0.0
    for i in range(n):
        pos += y[i]
    value[0, 0] = n - pos
    value[0, 1] = pos
    n_nodes = 1
    stack = [(0, 0, n, 0)]
    while len(stack) > 0:
        node, start, end, depth = stack.pop()
        size = end - start
        npos = value[node, 1]
        if npos == 0 or npos == size or size < min_split:
            continue
        if max_depth >= 0 and depth >= max_depth:
            continue

        best_imp = np.inf
        best_f = -1
        best_thr = 0.0
        found = 0
        xs = np.empty(size)
        ys = np.empty(size)
        for j in range(d):
            f = perms[node, j] if use_perm else j
            if found >= n_candidates:
                break
            for i in range(size):
                xs[i] = X[idx[start + i], f]
            order = np.argsort(xs, kind="mergesort")
            for i in range(size):
                ys[i] = y[idx[start + order[i]]]
            f_imp = np.inf
            f_thr = 0.0
            pos_left = 0.0
            for i in range(size - 1):
                pos_left += ys[i]
                lo = xs[order[i]]
                hi = xs[order[i + 1]]
                if not hi > lo:
                    continue
                n_left = i + 1.0
                n_right = size - n_left
                p_l = pos_left / n_left
                p_r = (npos - pos_left) / n_right
                imp = (n_left * 2.0 * p_l * (1.0 - p_l) + n_right * 2.0 * p_r * (1.0 - p_r)) / size
                if imp < f_imp:
                    f_imp = imp
                    f_thr = (lo + hi) / 2.0
            if f_imp == np.inf:
                continue
            found += 1
            if f_imp < best_imp or (f_imp == best_imp and f < best_f):
                best_imp = f_imp
                best_f = f
                best_thr = f_thr
        if best_f < 0:
            continue

        # stable partition: rows with x <= threshold first
        buf = idx[start:end].copy()
        li = start
        for i in range(size):
            if X[buf[i], best_f] <= best_thr:
                idx[li] = buf[i]
                li += 1
        ri = li
        for i in range(size):
            if not X[buf[i], best_f] <= best_thr:
                idx[ri] = buf[i]
                ri += 1
        ln = n_nodes
        rn = n_nodes + 1
        n_nodes += 2
        for i in range(start, li):
            value[ln, 1] += y[idx[i]]
        value[ln, 0] = (li - start) - value[ln, 1]
        for i in range(li, end):
            value[rn, 1] += y[idx[i]]
        value[rn, 0] = (end - li) - value[rn, 1]
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = ln
        right[node] = rn
        stack.append((rn, li, end, depth + 1))
        stack.append((ln, start, li, depth + 1))

    value = value[:n_nodes].copy()
    for i in range(n_nodes):
        t = value[i, 0] + value[i, 1]
        value[i, 0] /= t
        value[i, 1] /= t
    return feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(), right[:n_nodes].copy(), value


class DecisionTree(ProbabilisticModel):
    model_kind = "cart"

    def __init__(self, feature, threshold, left, right, value, feature_count):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value
        self.feature_count = feature_count

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X = self._check(X)
        node = np.zeros(len(X), dtype=int)
        active = self.feature[node] >= 0
        while active.any():
            cur = node[active]
            f = self.feature[cur]
            goes_left = X[active, f] <= self.threshold[cur]
            node[active] = np.where(goes_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return node

    def predict_proba(self, X) -> np.ndarray:
        return self.value[self.apply(X)]


def fit_cart(X, y, params: CartParams | None = None, *, n_candidates: int | None = None,
             rng: np.random.Generator | None = None) -> DecisionTree:
    """Grow an unpruned binary tree by exhaustive threshold search on weighted Gini.

    Split ties go to the lowest feature index, then the lowest threshold.
    ``n_candidates``/``rng`` restrict each node to a random feature subset
    (used by the forest); the search keeps drawing past constant features.
    """
    X, y = check_training_data(X, y)
    params = params or CartParams()
    n, d = X.shape
    if rng is None:
        perms = np.empty((0, d), dtype=np.int64)
    else:
        perms = np.argsort(rng.random((2 * n - 1, d)), axis=1).astype(np.int64)
    max_depth = -1 if params.max_depth is None else params.max_depth
    parts = _grow(np.ascontiguousarray(X), y.astype(np.float64), params.min_split, max_depth,
                  n_candidates or d, perms)
    return DecisionTree(*parts, feature_count=d)


class RandomForest(ProbabilisticModel):
    model_kind = "rf"

    def __init__(self, trees: list[DecisionTree], feature_count: int):
        self.trees = trees
        self.feature_count = feature_count

    def predict_proba(self, X) -> np.ndarray:
        X = self._check(X)
        total = np.zeros((len(X), 2))
        for t in self.trees:
            total += t.predict_proba(X)
        return total / len(self.trees)


def fit_rf(X, y, params: RfParams | None = None, seed: int = 42,
           cart_params: CartParams | None = None) -> RandomForest:
    X, y = check_training_data(X, y)
    params = params or RfParams()
    n, d = X.shape
    m = params.resolve_features(d)
    streams = np.random.SeedSequence(seed).spawn(params.trees)
    trees = []
    for ss in streams:
        rng = np.random.default_rng(ss)
        if params.bootstrap:
            rows = rng.integers(0, n, size=n)
            Xb, yb = X[rows], y[rows]
        else:
            Xb, yb = X, y
        trees.append(fit_cart(Xb, yb, cart_params, n_candidates=m, rng=rng))
    return RandomForest(trees, d)
