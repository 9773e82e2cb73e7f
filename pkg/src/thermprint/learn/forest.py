"""Random forest of Gini-split decision trees."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .base import check_features, check_training_data, vote


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat binary tree. Leaves have ``feature == -1`` and carry class counts."""

    feature: np.ndarray  # int, -1 at leaves
    threshold: np.ndarray  # go left iff x[feature] <= threshold
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, n_classes)

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of ``X``."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                return node
            r, n = rows[active], node[active]
            go_left = X[r, f[active]] <= self.threshold[n]
            node[active] = np.where(go_left, self.left[n], self.right[n])

    def predict_index(self, X: np.ndarray) -> np.ndarray:
        # argmax returns the first maximum -> lexicographically smallest class
        return np.argmax(self.counts[self.apply(X)], axis=1)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[i] + 1
                depth[self.right[i]] = depth[i] + 1
        return int(depth.max())


@dataclass(frozen=True, eq=False)
class ForestModel:
    classes: tuple
    n_features: int
    trees: tuple

    def predict_index(self, X) -> np.ndarray:
        X = check_features(X, self.n_features)
        votes = np.stack([t.predict_index(X) for t in self.trees])
        return vote(votes, len(self.classes))

    def predict(self, X) -> list:
        return [self.classes[i] for i in self.predict_index(X)]


def best_split(X: np.ndarray, Y1: np.ndarray, features: np.ndarray, min_leaf: int):
    """Lowest weighted Gini split of the node over ``features``.

    ``Y1`` is the one-hot label matrix of the node's samples. Returns
    ``(score, feature, threshold)`` or None when no split honours
    ``min_leaf``. The score is ``sum(n_side * gini_side)``; ties go to the
    earliest feature in ``features`` and then the lowest threshold.
    """
    n = X.shape[0]
    if n < 2 * min_leaf:
        return None
    vals = X[:, features]
    order = np.argsort(vals, axis=0, kind="mergesort")
    sv = np.take_along_axis(vals, order, axis=0)
    left = np.cumsum(Y1[order], axis=0)[:-1]  # (n-1, m, k): first i+1 samples go left
    total = Y1.sum(axis=0)
    right = total - left
    n_left = np.arange(1, n)[:, None]
    n_right = n - n_left
    score = n - (left**2).sum(-1) / n_left - (right**2).sum(-1) / n_right  # (n-1, m)
    valid = (sv[1:] > sv[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    score = np.where(valid, score, np.inf)
    # feature-major scan so ties resolve to the earliest feature, then position
    flat = np.argmin(score.T.ravel())
    j, i = divmod(int(flat), n - 1)
    lo, hi = sv[i, j], sv[i + 1, j]
    thr = (lo + hi) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return float(score[i, j]), int(features[j]), float(thr)


def build_tree(X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator,
               max_depth: Optional[int], min_leaf: int, features_per_split: int) -> Tree:
    d = X.shape[1]
    Y1 = np.eye(n_classes)[y]
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(Y1[idx].sum(axis=0))
        return len(feature) - 1

    stack = [(new_node(np.arange(X.shape[0])), np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        c = counts[node]
        if np.count_nonzero(c) <= 1 or (max_depth is not None and depth >= max_depth):
            continue
        perm = rng.permutation(d)
        found = best_split(X[idx], Y1[idx], perm[:features_per_split], min_leaf)
        if found is None and features_per_split < d:
            found = best_split(X[idx], Y1[idx], perm[features_per_split:], min_leaf)
        if found is None:
            continue
        _, f, thr = found
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=float),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(counts, dtype=float).reshape(len(feature), n_classes))


def train_forest(X, y, n_trees: int = 50, max_depth: Optional[int] = None, min_leaf: int = 1,
                 features_per_split: Optional[int] = None, seed: int = 0,
                 bootstrap: bool = True) -> ForestModel:
    """Bagged Gini trees over random feature subsets; tree ``i`` draws from stream ``(seed, i)``."""
    X, yi, classes = check_training_data(X, y)
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    d = X.shape[1]
    m = features_per_split or max(1, math.ceil(math.sqrt(d)))
    m = min(m, d)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        if bootstrap:
            rows = rng.integers(0, X.shape[0], size=X.shape[0])
        else:
            rows = np.arange(X.shape[0])
        trees.append(build_tree(X[rows], yi[rows], len(classes), rng, max_depth, min_leaf, m))
    return ForestModel(classes, d, tuple(trees))
