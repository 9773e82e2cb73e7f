"""Prediction, scoring and cross-validation."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..core import DomainError


def predict(model, features):
    """Label for one feature vector, or a list of labels for a 2-D batch."""
    X = np.asarray(features, dtype=float)
    labels = model.predict(X)
    return labels[0] if X.ndim == 1 else labels


@dataclass(frozen=True, eq=False)
class EvalReport:
    classes: tuple
    accuracy: float
    confusion: np.ndarray  # rows: true class, columns: predicted class
    hamming_loss: Optional[float] = None

    def format(self) -> str:
        width = max(len(c) for c in self.classes)
        lines = [f"accuracy {self.accuracy:.4f}"]
        if self.hamming_loss is not None:
            lines.append(f"hamming_loss {self.hamming_loss:.4f}")
        lines.append(" " * (width + 1) + " ".join(c.rjust(width) for c in self.classes))
        for c, row in zip(self.classes, self.confusion):
            lines.append(c.ljust(width) + " " + " ".join(str(int(v)).rjust(width) for v in row))
        return "\n".join(lines)


def confusion_matrix(true: Sequence[str], pred: Sequence[str], classes: Sequence[str]) -> np.ndarray:
    lookup = {c: i for i, c in enumerate(classes)}
    out = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(true, pred):
        out[lookup[t], lookup[p]] += 1
    return out


def evaluate(model, X, y) -> EvalReport:
    y = [str(v) for v in y]
    if not y:
        raise DomainError("cannot evaluate on an empty test set")
    pred = model.predict(np.asarray(X, dtype=float))
    classes = tuple(sorted(set(model.classes) | set(y)))
    correct = sum(p == t for p, t in zip(pred, y))
    return EvalReport(classes, correct / len(y), confusion_matrix(y, pred, classes))


def hamming_loss(predicted: Iterable[Iterable[str]], truth: Iterable[Iterable[str]],
                 universe: Optional[Iterable[str]] = None) -> float:
    """Mean over scenes of ``|P sym-diff T| / |universe|``.

    Scenes are label multisets. Without an explicit ``universe`` each
    scene's universe is the multiset union of its predicted and true labels,
    so disjoint scenes score 1 and identical scenes 0.
    """
    predicted, truth = list(predicted), list(truth)
    if len(predicted) != len(truth):
        raise DomainError("predicted and true scene lists differ in length")
    if not truth:
        raise DomainError("hamming loss of an empty scene list")
    fixed = Counter(universe) if universe is not None else None
    total = 0.0
    for p, t in zip(predicted, truth):
        pc, tc = Counter(p), Counter(t)
        diff = sum(((pc - tc) + (tc - pc)).values())
        size = sum((fixed if fixed is not None else (pc | tc)).values())
        total += diff / size if size else 0.0
    return total / len(truth)


def kfold_split(y: Sequence[str], k: int, seed: int = 0) -> list:
    """Stratified folds as ``[(train_idx, test_idx), ...]``.

    Each class is shuffled with the seed and dealt round-robin over the
    folds, continuing where the previous class stopped.
    """
    y = [str(v) for v in y]
    if k < 2:
        raise DomainError("k must be >= 2")
    counts = Counter(y)
    small = sorted(c for c, n in counts.items() if n < k)
    if small:
        raise DomainError(f"classes with fewer than k={k} samples: {small}")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=np.int64)
    pos = 0
    for c in sorted(counts):
        idx = np.array([i for i, v in enumerate(y) if v == c])
        idx = idx[rng.permutation(idx.size)]
        fold_of[idx] = (pos + np.arange(idx.size)) % k
        pos += idx.size
    everything = np.arange(len(y))
    return [(everything[fold_of != f], everything[fold_of == f]) for f in range(k)]


def cross_validate(train: Callable, X, y, k: int = 5, seed: int = 0) -> EvalReport:
    """Pooled out-of-fold report for ``train(X_train, y_train) -> model``."""
    X = np.asarray(X, dtype=float)
    y = [str(v) for v in y]
    pred = [None] * len(y)
    for tr, te in kfold_split(y, k, seed):
        model = train(X[tr], [y[i] for i in tr])
        for i, p in zip(te, model.predict(X[te])):
            pred[i] = p
    classes = tuple(sorted(set(y)))
    correct = sum(p == t for p, t in zip(pred, y))
    return EvalReport(classes, correct / len(y), confusion_matrix(y, pred, classes))
