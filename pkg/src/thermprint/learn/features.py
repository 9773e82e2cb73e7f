"""Labeled samples and their feature encoding."""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..core import DissipationVector, DomainError, FormatError, load_vector

CONTEXTS = ("fixed", "natural", "quick")
GENDERS = ("female", "male")


class EncodingError(DomainError):
    pass


@dataclass(frozen=True)
class LabeledSample:
    vector: DissipationVector
    label: str
    context: Optional[str] = None
    gender_meta: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.vector, DissipationVector):
            raise DomainError("sample vector must be a DissipationVector")
        if not self.label or any(c.isspace() for c in self.label):
            raise DomainError(f"label must be a non-empty token, got {self.label!r}")
        if self.context is not None and self.context not in CONTEXTS:
            raise DomainError(f"context must be one of {CONTEXTS}, got {self.context!r}")
        if self.gender_meta is not None and self.gender_meta not in GENDERS:
            raise DomainError(f"gender must be one of {GENDERS}, got {self.gender_meta!r}")


def _one_hot(value, choices, what):
    if value is None:
        raise EncodingError(f"sample has no {what} but {what} encoding was requested")
    out = np.zeros(len(choices))
    out[choices.index(value)] = 1.0
    return out


def encode_features(sample: LabeledSample, include_context: bool = False,
                    include_gender: bool = False) -> np.ndarray:
    """Vector values followed by the requested one-hot blocks (context: 3, gender: 2)."""
    parts = [np.asarray(sample.vector.values, dtype=float)]
    if include_context:
        parts.append(_one_hot(sample.context, CONTEXTS, "context"))
    if include_gender:
        parts.append(_one_hot(sample.gender_meta, GENDERS, "gender"))
    return np.concatenate(parts)


def encode_dataset(samples: Sequence[LabeledSample], include_context: bool = False,
                   include_gender: bool = False):
    """Stack encoded features; returns ``(X, labels)``."""
    if not samples:
        raise DomainError("empty dataset")
    lengths = {s.vector.length_l for s in samples}
    if len(lengths) != 1:
        raise DomainError(f"samples have differing vector lengths {sorted(lengths)}")
    X = np.stack([encode_features(s, include_context, include_gender) for s in samples])
    return X, [s.label for s in samples]


def parse_manifest(text: str, base_dir: str = ".") -> list:
    """Read ``path label [context] [gender]`` lines; ``-`` marks a missing field."""
    samples = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if not 2 <= len(parts) <= 4:
            raise FormatError(f"manifest line {lineno}: expected 2-4 fields, got {len(parts)}")
        path, label = parts[0], parts[1]
        context = parts[2] if len(parts) > 2 and parts[2] != "-" else None
        gender = parts[3] if len(parts) > 3 and parts[3] != "-" else None
        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        try:
            samples.append(LabeledSample(load_vector(full), label, context, gender))
        except DomainError as exc:
            raise FormatError(f"manifest line {lineno}: {exc}") from exc
    return samples


def load_manifest(path) -> list:
    with open(path) as fh:
        return parse_manifest(fh.read(), os.path.dirname(os.path.abspath(path)))


def format_manifest_line(path: str, sample: LabeledSample) -> str:
    fields = [path, sample.label, sample.context or "-", sample.gender_meta or "-"]
    while fields[-1] == "-":
        fields.pop()
    return " ".join(fields)
