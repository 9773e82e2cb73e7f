"""Shared checks for the classifiers."""
from __future__ import annotations

import numpy as np

from ..core import DomainError


class DegenerateModelError(DomainError):
    pass


def check_training_data(X, y):
    """Validate a training set; returns ``(X, class_indices, classes)``.

    Classes are sorted so index order equals lexicographic label order.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise DomainError("X must be a non-empty 2-D array")
    y = [str(v) for v in y]
    if len(y) != X.shape[0]:
        raise DomainError(f"{X.shape[0]} rows but {len(y)} labels")
    if not np.all(np.isfinite(X)):
        raise DomainError("X contains non-finite values")
    classes = tuple(sorted(set(y)))
    if len(classes) < 2:
        raise DegenerateModelError("training data must contain at least 2 classes")
    lookup = {c: i for i, c in enumerate(classes)}
    yi = np.array([lookup[v] for v in y], dtype=np.int64)
    small = [c for c, n in zip(classes, np.bincount(yi, minlength=len(classes))) if n < 2]
    if small:
        raise DegenerateModelError(f"classes with fewer than 2 samples: {small}")
    return X, yi, classes


def check_features(X, n_features: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_features:
        raise DomainError(
            f"feature dimension mismatch: model expects {n_features}, got {X.shape[-1]}"
        )
    return X


def vote(votes: np.ndarray, n_classes: int) -> np.ndarray:
    """Column-wise majority of class indices; ties pick the smallest index."""
    tallies = np.zeros((votes.shape[1], n_classes), dtype=np.int64)
    for row in votes:
        tallies[np.arange(votes.shape[1]), row] += 1
    return np.argmax(tallies, axis=1)


def standardizer(X: np.ndarray):
    """Per-feature mean and scale; constant features get scale 1."""
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale
