"""One-vs-rest linear SVM trained by stochastic subgradient descent."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import check_features, check_training_data, standardizer


@dataclass(frozen=True, eq=False)
class SvmModel:
    classes: tuple
    mean: np.ndarray
    scale: np.ndarray
    weights: np.ndarray  # (n_classes, n_features) in standardized space
    biases: np.ndarray
    objective_history: tuple = field(default=())

    @property
    def n_features(self) -> int:
        return int(self.mean.size)

    def decision_function(self, X) -> np.ndarray:
        X = check_features(X, self.n_features)
        Z = (X - self.mean) / self.scale
        return Z @ self.weights.T + self.biases

    def predict_index(self, X) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1)

    def predict(self, X) -> list:
        return [self.classes[i] for i in self.predict_index(X)]


def head_objectives(W, b, Z, Ysign, l2) -> np.ndarray:
    """Regularized mean hinge loss of every one-vs-rest head.

    ``Ysign`` is (n_samples, n_classes) with +1 for the head's class and -1
    otherwise.
    """
    margins = Ysign * (Z @ W.T + b)
    hinge = np.maximum(0.0, 1.0 - margins).mean(axis=0)
    return 0.5 * l2 * (W**2).sum(axis=1) + hinge


def svm_objective(model: SvmModel, X, y, l2: float) -> float:
    """Total training objective (sum over heads) of ``model`` on raw data."""
    Z = (check_features(X, model.n_features) - model.mean) / model.scale
    lookup = {c: i for i, c in enumerate(model.classes)}
    yi = np.array([lookup[str(v)] for v in y])
    Ysign = np.where(np.arange(len(model.classes))[None, :] == yi[:, None], 1.0, -1.0)
    return float(head_objectives(model.weights, model.biases, Z, Ysign, l2).sum())


def train_svm(X, y, epochs: int = 60, learning_rate: float = 0.05, l2: float = 1e-3,
              seed: int = 0) -> SvmModel:
    """Pegasos-style SGD on the L2-regularized hinge loss, one head per class.

    Features are standardized with training statistics. Epoch ``e`` visits
    samples in the order drawn from stream ``(seed, e)``. After every epoch
    each head keeps its new weights only if its full objective did not rise;
    otherwise it reverts to its best weights and halves its step size, so
    the recorded objective is non-increasing.
    """
    X, yi, classes = check_training_data(X, y)
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if learning_rate <= 0 or l2 < 0:
        raise ValueError("learning_rate must be > 0 and l2 >= 0")
    mean, scale = standardizer(X)
    Z = (X - mean) / scale
    n, d = Z.shape
    k = len(classes)
    Ysign = np.where(np.arange(k)[None, :] == yi[:, None], 1.0, -1.0)

    W = np.zeros((k, d))
    b = np.zeros(k)
    best = head_objectives(W, b, Z, Ysign, l2)
    rates = np.full(k, float(learning_rate))
    history = [float(best.sum())]
    for epoch in range(epochs):
        Wn, bn = W.copy(), b.copy()
        order = np.random.default_rng([seed, epoch]).permutation(n)
        for step, i in enumerate(order):
            eta = rates / (1.0 + step / n)
            z, ys = Z[i], Ysign[i]
            active = ys * (Wn @ z + bn) < 1.0
            Wn *= (1.0 - eta * l2)[:, None]
            Wn[active] += (eta[active] * ys[active])[:, None] * z[None, :]
            bn[active] += eta[active] * ys[active]
        obj = head_objectives(Wn, bn, Z, Ysign, l2)
        improved = obj <= best
        W[improved], b[improved], best[improved] = Wn[improved], bn[improved], obj[improved]
        rates[~improved] *= 0.5
        history.append(float(best.sum()))
    return SvmModel(classes, mean, scale, W, b, tuple(history))
