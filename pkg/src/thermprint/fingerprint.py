"""Dissipation vectors: hot-area trajectories of a fading thermal fingerprint."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kvdoc
from .core import (
    ConfigError,
    DissipationVector,
    DomainError,
    GrayFrame,
    NoFingerprintError,
    stack_frames,
)
from .preprocess import DEFAULT_HOT_THRESHOLD


@dataclass(frozen=True)
class FingerprintConfig:
    intensity_threshold: int = DEFAULT_HOT_THRESHOLD
    vector_len: int = 480  # 60 s at 8 Hz
    dissipated_epsilon: float = 0.02

    def __post_init__(self):
        if not 1 <= self.intensity_threshold <= 255:
            raise ConfigError("intensity_threshold must be in [1, 255]")
        if self.vector_len < 2:
            raise ConfigError("vector_len must be >= 2")
        if not 0.0 < self.dissipated_epsilon < 1.0:
            raise ConfigError("dissipated_epsilon must be in (0, 1)")

    @classmethod
    def from_text(cls, text: str) -> "FingerprintConfig":
        top, _ = kvdoc.parse_document(text)
        return cls(
            kvdoc.take(top, "intensity_threshold", int, DEFAULT_HOT_THRESHOLD),
            kvdoc.take(top, "vector_len", int, 480),
            kvdoc.take(top, "dissipated_epsilon", float, 0.02),
        )


def hot_area(frame: GrayFrame, threshold: int) -> int:
    """Number of pixels with intensity >= ``threshold``."""
    if not 1 <= threshold <= 255:
        raise ConfigError("threshold must be in [1, 255]")
    return int(np.count_nonzero(frame.pixels >= threshold))


def reduction_area(a_i: int, a_t: int) -> float:
    """Fractional shrinkage of the hot area, ``(A_i - A_t) / A_i``.

    ``a_t`` larger than ``a_i`` (noise) is clamped to ``a_i``.
    """
    if a_i <= 0:
        raise NoFingerprintError("initial hot area is zero; fingerprint undefined")
    if a_t < 0:
        raise DomainError(f"area must be >= 0, got {a_t}")
    a_t = min(a_t, a_i)
    return (a_i - a_t) / a_i


def vector_from_areas(areas, length: int, fps_millihz: int) -> DissipationVector:
    """Assemble a vector from per-frame hot areas (``areas[0]`` is A_i).

    Elements after the first empty frame, and beyond the available frames,
    are zero.
    """
    areas = np.asarray(areas, dtype=np.int64)
    if areas.size == 0 or areas[0] <= 0:
        raise NoFingerprintError("first frame has no hot pixels")
    a_i = int(areas[0])
    n = min(areas.size, length)
    a_t = np.minimum(areas[:n], a_i)
    values = np.zeros(length)
    # 1 - RA, with RA computed exactly as reduction_area does
    values[:n] = 1.0 - (a_i - a_t) / a_i
    zeros = np.flatnonzero(a_t[:n] == 0)
    if zeros.size:
        values[zeros[0]:] = 0.0
    return DissipationVector(values, fps_millihz)


def hot_areas(frames: Sequence[GrayFrame], threshold: int) -> np.ndarray:
    if not 1 <= threshold <= 255:
        raise ConfigError("threshold must be in [1, 255]")
    return np.count_nonzero(stack_frames(frames) >= threshold, axis=(1, 2))


def extract_vector(frames: Sequence[GrayFrame], cfg: FingerprintConfig = FingerprintConfig(),
                   fps_millihz: int = 8000) -> DissipationVector:
    """Remaining-area trajectory of the whole-frame fingerprint.

    Only the first ``cfg.vector_len`` frames are used.
    """
    if not frames:
        raise NoFingerprintError("empty frame sequence")
    use = frames[:cfg.vector_len]
    return vector_from_areas(hot_areas(use, cfg.intensity_threshold), cfg.vector_len, fps_millihz)


class DissipationTime(NamedTuple):
    seconds: float
    still_dissipating: bool
    index: int  # first element below epsilon, or the vector length


def dissipation_time(v: DissipationVector, epsilon: float = 0.02) -> DissipationTime:
    """Time of the first element below ``epsilon``.

    If the fingerprint never drops below ``epsilon`` the covered duration is
    returned with ``still_dissipating`` set.
    """
    if not 0.0 < epsilon < 1.0:
        raise ConfigError("epsilon must be in (0, 1)")
    below = np.flatnonzero(v.values < epsilon)
    period = 1000.0 / v.fps_millihz
    if below.size == 0:
        return DissipationTime(v.length_l * period, True, v.length_l)
    idx = int(below[0])
    return DissipationTime(idx * period, False, idx)


def average_ranks(x) -> np.ndarray:
    """1-based ranks, ties receive the mean of the ranks they span."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    sx = x[order]
    ranks = np.empty(x.size)
    # boundaries of runs of equal values
    starts = np.flatnonzero(np.r_[True, sx[1:] != sx[:-1]])
    ends = np.r_[starts[1:], x.size]
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = (s + e + 1) / 2.0
    return ranks


def spearman(xs, ys) -> float:
    """Spearman rank correlation with average-rank tie handling."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise DomainError("spearman needs two 1-D sequences of equal length")
    if xs.size < 3:
        raise DomainError("spearman needs at least 3 pairs")
    rx = average_ranks(xs) - (xs.size + 1) / 2.0
    ry = average_ranks(ys) - (ys.size + 1) / 2.0
    denom = np.sqrt(np.dot(rx, rx) * np.dot(ry, ry))
    if denom == 0:
        raise DomainError("spearman is undefined when one input is constant")
    return float(np.clip(np.dot(rx, ry) / denom, -1.0, 1.0))
