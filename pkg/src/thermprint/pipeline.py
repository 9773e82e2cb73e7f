"""End-to-end glue: raw sequence -> vectors -> material labels."""
from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from .core import DissipationVector, FrameSequence
from .fingerprint import DissipationTime, FingerprintConfig, dissipation_time, extract_vector
from .preprocess import PreprocessConfig, normalize_and_filter, preprocess_sequence, threshold_excess_c
from .segment import DEFAULT_PROMINENCE, Roi, extract_multi_local


def aligned_configs(pre_cfg: PreprocessConfig, fp_cfg: FingerprintConfig) -> PreprocessConfig:
    """Background filtering must use the fingerprint's hot threshold."""
    if pre_cfg.hot_threshold == fp_cfg.intensity_threshold:
        return pre_cfg
    return PreprocessConfig(pre_cfg.dissimilarity_threshold, pre_cfg.denoise_window,
                            pre_cfg.norm_floor_centikelvin, pre_cfg.norm_ceil_centikelvin,
                            fp_cfg.intensity_threshold)


def sequence_vector(seq: FrameSequence, pre_cfg: PreprocessConfig = PreprocessConfig(),
                    fp_cfg: FingerprintConfig = FingerprintConfig()) -> DissipationVector:
    frames = preprocess_sequence(seq, aligned_configs(pre_cfg, fp_cfg)).frames
    return extract_vector(frames, fp_cfg, seq.fps_millihz)


def measure_dissipation_time(seq: FrameSequence, pre_cfg: PreprocessConfig = PreprocessConfig(),
                             fp_cfg: FingerprintConfig = FingerprintConfig()) -> DissipationTime:
    return dissipation_time(sequence_vector(seq, pre_cfg, fp_cfg), fp_cfg.dissipated_epsilon)


def effective_threshold_c(seq: FrameSequence, pre_cfg: PreprocessConfig = PreprocessConfig(),
                          fp_cfg: FingerprintConfig = FingerprintConfig()) -> float:
    """Excess above the normalization floor (degC) at which a pixel turns hot."""
    lo, hi = pre_cfg.bounds_for(seq)
    return threshold_excess_c(fp_cfg.intensity_threshold, lo, hi)


class ObjectResult(NamedTuple):
    roi: Roi
    vector: DissipationVector
    label: Optional[str]


def analyze_scene(seq: FrameSequence, model=None, pre_cfg: PreprocessConfig = PreprocessConfig(),
                  fp_cfg: FingerprintConfig = FingerprintConfig(),
                  prominence: int = DEFAULT_PROMINENCE,
                  feature_len: Optional[int] = None) -> list:
    """Segment frame 0, track each ROI and classify its vector.

    Denoising is restricted to the ROIs (see ``extract_multi_local``); the
    vectors equal those of ``extract_multi`` on fully preprocessed frames.

    ``feature_len`` resizes vectors to the model's input length when the
    tracking vectors are longer (or shorter) than what the model saw.
    """
    pre_cfg = aligned_configs(pre_cfg, fp_cfg)
    frames = normalize_and_filter(seq, pre_cfg).frames
    pairs = extract_multi_local(frames, pre_cfg.denoise_window, fp_cfg, seq.fps_millihz,
                                prominence)
    labels = [None] * len(pairs)
    if model is not None and pairs:
        n = feature_len or pairs[0][1].length_l
        X = np.stack([v.resized(n).values for _, v in pairs])
        labels = model.predict(X)
    return [ObjectResult(r, v, lab) for (r, v), lab in zip(pairs, labels)]
