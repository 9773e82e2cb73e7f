"""Versioned text serialization for trained models.

Layout (one record per line, whitespace separated)::

    MDM1 <forest|svm|mlp> <n_features> <n_classes>
    classes <label> ...
    forest:  trees <n>, then per tree "tree <n_nodes>" followed by one line
             per node: "<feature> <threshold> <left> <right> <count> ..."
    svm:     mean ..., scale ..., then "head <label> <bias> <w> ..." per class
    mlp:     hidden <h>, mean ..., scale ..., b1 ..., b2 ...,
             then "w1 <row> ..." per feature and "w2 <row> ..." per hidden unit

Floats are written with ``repr`` so a load reproduces the model exactly.
"""
from __future__ import annotations

import numpy as np

from ..core import FormatError
from .forest import ForestModel, Tree
from .mlp import MlpModel
from .svm import SvmModel

MAGIC = "MDM1"


def _f(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def dumps(model) -> str:
    lines = []
    if isinstance(model, ForestModel):
        lines.append(f"{MAGIC} forest {model.n_features} {len(model.classes)}")
        lines.append("classes " + " ".join(model.classes))
        lines.append(f"trees {len(model.trees)}")
        for t in model.trees:
            lines.append(f"tree {t.n_nodes}")
            for i in range(t.n_nodes):
                lines.append(f"{int(t.feature[i])} {float(t.threshold[i])!r} "
                             f"{int(t.left[i])} {int(t.right[i])} {_f(t.counts[i])}")
    elif isinstance(model, SvmModel):
        lines.append(f"{MAGIC} svm {model.n_features} {len(model.classes)}")
        lines.append("classes " + " ".join(model.classes))
        lines.append("mean " + _f(model.mean))
        lines.append("scale " + _f(model.scale))
        for c, b, w in zip(model.classes, model.biases, model.weights):
            lines.append(f"head {c} {float(b)!r} {_f(w)}")
    elif isinstance(model, MlpModel):
        lines.append(f"{MAGIC} mlp {model.n_features} {len(model.classes)}")
        lines.append("classes " + " ".join(model.classes))
        lines.append(f"hidden {model.hidden_units}")
        lines.append("mean " + _f(model.mean))
        lines.append("scale " + _f(model.scale))
        lines.append("b1 " + _f(model.b1))
        lines.append("b2 " + _f(model.b2))
        lines.extend("w1 " + _f(row) for row in model.w1)
        lines.extend("w2 " + _f(row) for row in model.w2)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return "\n".join(lines) + "\n"


class _Lines:
    def __init__(self, text):
        self.lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        self.pos = 0

    def next(self, tag=None):
        if self.pos >= len(self.lines):
            raise FormatError("model file ended early")
        parts = self.lines[self.pos]
        self.pos += 1
        if tag is not None:
            if parts[0] != tag:
                raise FormatError(f"expected '{tag}' record, got '{parts[0]}'")
            return parts[1:]
        return parts

    def floats(self, tag, n):
        vals = np.array([float(v) for v in self.next(tag)])
        if vals.size != n:
            raise FormatError(f"'{tag}' record has {vals.size} values, expected {n}")
        return vals


def loads(text: str):
    try:
        return _loads(text)
    except (ValueError, IndexError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed model file: {exc}") from exc


def _loads(text):
    rd = _Lines(text)
    head = rd.next()
    if len(head) != 4 or head[0] != MAGIC:
        raise FormatError(f"not an {MAGIC} model file")
    kind, d, k = head[1], int(head[2]), int(head[3])
    classes = tuple(rd.next("classes"))
    if len(classes) != k:
        raise FormatError("class count does not match header")
    if kind == "forest":
        n_trees = int(rd.next("trees")[0])
        trees = []
        for _ in range(n_trees):
            n_nodes = int(rd.next("tree")[0])
            rows = [rd.next() for _ in range(n_nodes)]
            if any(len(r) != 4 + k for r in rows):
                raise FormatError("tree node record has wrong length")
            trees.append(Tree(
                np.array([int(r[0]) for r in rows], dtype=np.int64),
                np.array([float(r[1]) for r in rows]),
                np.array([int(r[2]) for r in rows], dtype=np.int64),
                np.array([int(r[3]) for r in rows], dtype=np.int64),
                np.array([[float(v) for v in r[4:]] for r in rows]).reshape(n_nodes, k),
            ))
        return ForestModel(classes, d, tuple(trees))
    if kind == "svm":
        mean, scale = rd.floats("mean", d), rd.floats("scale", d)
        W, b = np.zeros((k, d)), np.zeros(k)
        for i, c in enumerate(classes):
            parts = rd.next("head")
            if parts[0] != c or len(parts) != d + 2:
                raise FormatError(f"bad head record for class {c}")
            b[i] = float(parts[1])
            W[i] = [float(v) for v in parts[2:]]
        return SvmModel(classes, mean, scale, W, b)
    if kind == "mlp":
        h = int(rd.next("hidden")[0])
        mean, scale = rd.floats("mean", d), rd.floats("scale", d)
        b1, b2 = rd.floats("b1", h), rd.floats("b2", k)
        w1 = np.stack([rd.floats("w1", h) for _ in range(d)])
        w2 = np.stack([rd.floats("w2", k) for _ in range(h)])
        return MlpModel(classes, mean, scale, w1, b1, w2, b2)
    raise FormatError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(model))


def load_model(path):
    with open(path) as fh:
        return loads(fh.read())
