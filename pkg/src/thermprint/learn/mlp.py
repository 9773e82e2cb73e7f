"""Single-hidden-layer perceptron (logistic hidden units, softmax output)."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .base import check_features, check_training_data, standardizer

PARAM_NAMES = ("w1", "b1", "w2", "b2")


@dataclass(frozen=True, eq=False)
class MlpModel:
    classes: tuple
    mean: np.ndarray
    scale: np.ndarray
    w1: np.ndarray  # (n_features, hidden)
    b1: np.ndarray
    w2: np.ndarray  # (hidden, n_classes)
    b2: np.ndarray

    @property
    def n_features(self) -> int:
        return int(self.mean.size)

    @property
    def hidden_units(self) -> int:
        return int(self.b1.size)

    def params(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def with_params(self, params: dict) -> "MlpModel":
        return replace(self, **params)

    def predict_proba(self, X) -> np.ndarray:
        Z = (check_features(X, self.n_features) - self.mean) / self.scale
        return forward(self.params(), Z)[1]

    def predict_index(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def predict(self, X) -> list:
        return [self.classes[i] for i in self.predict_index(X)]


def sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward(params: dict, Z: np.ndarray):
    hidden = sigmoid(Z @ params["w1"] + params["b1"])
    return hidden, softmax(hidden @ params["w2"] + params["b2"])


def loss_and_gradients(params: dict, Z: np.ndarray, yi: np.ndarray, l2: float = 0.0):
    """Mean cross-entropy (plus L2 on weights) and its gradients by backprop."""
    n = Z.shape[0]
    hidden, probs = forward(params, Z)
    k = probs.shape[1]
    onehot = np.eye(k)[yi]
    loss = -np.log(np.clip(probs[np.arange(n), yi], 1e-300, None)).mean()
    loss += 0.5 * l2 * ((params["w1"] ** 2).sum() + (params["w2"] ** 2).sum())

    d_logits = (probs - onehot) / n
    grads = {
        "w2": hidden.T @ d_logits + l2 * params["w2"],
        "b2": d_logits.sum(axis=0),
    }
    d_hidden = (d_logits @ params["w2"].T) * hidden * (1.0 - hidden)
    grads["w1"] = Z.T @ d_hidden + l2 * params["w1"]
    grads["b1"] = d_hidden.sum(axis=0)
    return float(loss), grads


def init_params(n_features: int, hidden_units: int, n_classes: int, rng) -> dict:
    a1 = np.sqrt(6.0 / (n_features + hidden_units))
    a2 = np.sqrt(6.0 / (hidden_units + n_classes))
    return {
        "w1": rng.uniform(-a1, a1, size=(n_features, hidden_units)),
        "b1": np.zeros(hidden_units),
        "w2": rng.uniform(-a2, a2, size=(hidden_units, n_classes)),
        "b2": np.zeros(n_classes),
    }


def train_mlp(X, y, hidden_units: int = 16, epochs: int = 300, learning_rate: float = 0.1,
              seed: int = 0, batch_size: Optional[int] = None, momentum: float = 0.9,
              l2: float = 1e-4) -> MlpModel:
    """Mini-batch SGD with momentum on softmax cross-entropy.

    Initial weights come from stream ``(seed, 0)``; epoch ``e`` shuffles
    with stream ``(seed, 1, e)``. ``epochs=0`` returns the initial network.
    """
    X, yi, classes = check_training_data(X, y)
    if hidden_units < 1 or epochs < 0 or learning_rate <= 0:
        raise ValueError("hidden_units >= 1, epochs >= 0 and learning_rate > 0 required")
    mean, scale = standardizer(X)
    Z = (X - mean) / scale
    n = Z.shape[0]
    bs = batch_size or min(32, n)
    params = init_params(Z.shape[1], hidden_units, len(classes), np.random.default_rng([seed, 0]))
    velocity = {k: np.zeros_like(v) for k, v in params.items()}
    for epoch in range(epochs):
        order = np.random.default_rng([seed, 1, epoch]).permutation(n)
        for start in range(0, n, bs):
            batch = order[start:start + bs]
            _, grads = loss_and_gradients(params, Z[batch], yi[batch], l2)
            for name in PARAM_NAMES:
                velocity[name] = momentum * velocity[name] - learning_rate * grads[name]
                params[name] = params[name] + velocity[name]
    return MlpModel(classes, mean, scale, **params)


def mlp_loss(model: MlpModel, X, y, l2: float = 0.0) -> float:
    Z = (check_features(X, model.n_features) - model.mean) / model.scale
    lookup = {c: i for i, c in enumerate(model.classes)}
    yi = np.array([lookup[str(v)] for v in y])
    return loss_and_gradients(model.params(), Z, yi, l2)[0]
