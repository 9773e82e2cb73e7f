"""Raw thermal frames -> clean 8-bit grayscale frames."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import ndimage

from . import kvdoc
from .core import ConfigError, DomainError, FrameSequence, GrayFrame, RawFrame, stack_frames

DEFAULT_SPAN_CK = 2000  # ceil = ambient + 20 degC
DEFAULT_HOT_THRESHOLD = 26  # first intensity at or above a +2 degC excess with the default span


@dataclass(frozen=True)
class PreprocessConfig:
    """Preprocessing parameters.

    ``norm_floor_centikelvin`` / ``norm_ceil_centikelvin`` default to the
    sequence ambient and ambient + 20 degC when left as None.
    """

    dissimilarity_threshold: float = 0.2
    denoise_window: int = 3
    norm_floor_centikelvin: Optional[int] = None
    norm_ceil_centikelvin: Optional[int] = None
    hot_threshold: int = DEFAULT_HOT_THRESHOLD

    def __post_init__(self):
        if not 0.0 <= self.dissimilarity_threshold <= 1.0:
            raise ConfigError("dissimilarity_threshold must be in [0, 1]")
        if self.denoise_window < 1 or self.denoise_window % 2 == 0:
            raise ConfigError(f"denoise_window must be odd and >= 1, got {self.denoise_window}")
        if not 1 <= self.hot_threshold <= 255:
            raise ConfigError("hot_threshold must be in [1, 255]")
        lo, hi = self.norm_floor_centikelvin, self.norm_ceil_centikelvin
        if lo is not None and hi is not None and lo >= hi:
            raise ConfigError("normalization floor must be below ceil")

    def bounds_for(self, seq: FrameSequence) -> tuple[int, int]:
        lo = self.norm_floor_centikelvin
        hi = self.norm_ceil_centikelvin
        if lo is None:
            lo = seq.ambient_centikelvin
        if hi is None:
            hi = lo + DEFAULT_SPAN_CK
        if lo >= hi:
            raise ConfigError(f"normalization floor {lo} must be below ceil {hi}")
        return lo, hi

    @classmethod
    def from_text(cls, text: str) -> "PreprocessConfig":
        top, _ = kvdoc.parse_document(text)
        return cls(
            kvdoc.take(top, "dissimilarity_threshold", float, 0.2),
            kvdoc.take(top, "denoise_window", int, 3),
            kvdoc.take(top, "norm_floor_centikelvin", int),
            kvdoc.take(top, "norm_ceil_centikelvin", int),
            kvdoc.take(top, "hot_threshold", int, DEFAULT_HOT_THRESHOLD),
        )


def normalize_array(raw, floor: int, ceil: int) -> np.ndarray:
    """``round(255 * clamp((T - floor) / (ceil - floor), 0, 1))`` with half-up rounding.

    Pure integer arithmetic, so the result is exact.
    """
    if floor >= ceil:
        raise ConfigError(f"normalization floor {floor} must be below ceil {ceil}")
    span = int(ceil) - int(floor)
    d = np.clip(np.asarray(raw, dtype=np.int64) - int(floor), 0, span)
    return ((510 * d + span) // (2 * span)).astype(np.uint8)


def normalize(frame: RawFrame, floor: int, ceil: int) -> GrayFrame:
    return GrayFrame(frame.width, frame.height, normalize_array(frame.pixels, floor, ceil),
                     frame.index)


def threshold_excess_c(intensity_threshold: int, floor: int, ceil: int) -> float:
    """Smallest excess over ``floor`` (in degC) that normalizes to a hot pixel.

    Accounts for both quantization steps: a continuous temperature is
    rounded half-up to centikelvin, then to an 8-bit intensity. A pixel
    whose true excess is ``x`` is hot iff ``x >= threshold_excess_c(...)``.
    """
    if not 1 <= intensity_threshold <= 255:
        raise ConfigError("intensity threshold must be in [1, 255]")
    span = int(ceil) - int(floor)
    # smallest integer d with (510 d + span) // (2 span) >= thr
    num = (2 * intensity_threshold - 1) * span
    d_min = -(-num // 510)
    return (d_min - 0.5) / 100.0


class FilterResult(NamedTuple):
    kept: list
    rejected: list


def _dissimilarity(ref: np.ndarray, cur: np.ndarray, hot: int) -> float:
    diff = np.abs(cur.astype(np.int16) - ref.astype(np.int16))
    bg = ref < hot
    if bg.any():
        return float(diff[bg].mean())
    return float(diff.mean())


def background_filter(frames: Sequence[GrayFrame], threshold: float,
                      hot_threshold: int = DEFAULT_HOT_THRESHOLD) -> FilterResult:
    """Drop frames whose background jumps relative to the last kept frame.

    The background is the set of pixels below ``hot_threshold`` in the
    reference frame (all pixels if there are none). A fading fingerprint
    only turns pixels from hot to cold, so on a clean sequence these pixels
    are also cold in the current frame; corruption that heats the
    background is measured in full. A frame is rejected when the mean
    absolute difference over the background exceeds ``threshold * 255``.
    Frame 0 is always kept.
    """
    if len(frames) < 2:
        raise DomainError("background_filter needs at least 2 frames")
    limit = threshold * 255.0
    stack = stack_frames(frames).astype(np.int16)
    prev, cur = stack[:-1], stack[1:]
    diff = np.abs(cur - prev)
    bg = prev < hot_threshold
    n_bg = bg.sum(axis=(1, 2))
    with np.errstate(invalid="ignore", divide="ignore"):
        consecutive = np.where(n_bg > 0, (diff * bg).sum(axis=(1, 2)) / n_bg,
                               diff.mean(axis=(1, 2)))
    over = np.flatnonzero(consecutive > limit)
    if over.size == 0:
        return FilterResult(list(frames), [])
    # everything before the first jump is kept; from there the reference
    # is the last kept frame, so scan sequentially
    first = int(over[0]) + 1
    kept = list(frames[:first])
    rejected = []
    ref = frames[first - 1].pixels
    for i in range(first, len(frames)):
        cur = frames[i].pixels
        if _dissimilarity(ref, cur, hot_threshold) > limit:
            rejected.append(i)
        else:
            kept.append(frames[i])
            ref = cur
    return FilterResult(kept, rejected)


def check_window(window: int, width: int, height: int):
    if window < 1 or window % 2 == 0:
        raise ConfigError(f"denoise window must be odd and >= 1, got {window}")
    if window > min(width, height):
        raise ConfigError(f"denoise window {window} larger than frame {width}x{height}")


def denoise_array(arr: np.ndarray, window: int) -> np.ndarray:
    """Median filter with border replication; a 3-D input is filtered per frame."""
    if window == 1:
        return np.array(arr, copy=True)
    size = (1, window, window) if arr.ndim == 3 else (window, window)
    return ndimage.median_filter(arr, size=size, mode="nearest")


def denoise(frame: GrayFrame, window: int) -> GrayFrame:
    check_window(window, frame.width, frame.height)
    return GrayFrame(frame.width, frame.height, denoise_array(frame.pixels, window), frame.index)


class Preprocessed(NamedTuple):
    frames: list  # GrayFrame, re-indexed 0..n-1
    rejected: list  # indices into the input sequence
    floor: int
    ceil: int


def normalize_and_filter(seq: FrameSequence, cfg: PreprocessConfig = PreprocessConfig()) -> Preprocessed:
    """Normalize a raw sequence and drop frames with a jumping background.

    Frames are not denoised; see :func:`preprocess_sequence`.
    """
    lo, hi = cfg.bounds_for(seq)
    gray = normalize_array(seq.stack(), lo, hi)
    gray.setflags(write=False)
    frames = [GrayFrame._trusted(g, i) for i, g in enumerate(gray)]
    if len(frames) < 2:
        return Preprocessed(frames, [], lo, hi)
    kept, rejected = background_filter(frames, cfg.dissimilarity_threshold, cfg.hot_threshold)
    if rejected:
        kept = [GrayFrame._trusted(f.pixels, i) for i, f in enumerate(kept)]
    return Preprocessed(kept, rejected, lo, hi)


def preprocess_sequence(seq: FrameSequence, cfg: PreprocessConfig = PreprocessConfig()) -> Preprocessed:
    """Normalize, background-filter and denoise a raw sequence."""
    check_window(cfg.denoise_window, seq.width, seq.height)
    pre = normalize_and_filter(seq, cfg)
    if cfg.denoise_window == 1:
        return pre
    clean = denoise_array(stack_frames(pre.frames), cfg.denoise_window)
    clean.setflags(write=False)
    frames = [GrayFrame._trusted(g, i) for i, g in enumerate(clean)]
    return Preprocessed(frames, pre.rejected, pre.floor, pre.ceil)


def gray_stack(frames: Sequence[GrayFrame]) -> np.ndarray:
    return stack_frames(frames)
