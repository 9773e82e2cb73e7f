"""Thermal dissipation fingerprints for material sensing.

Raw thermal frames are normalized, segmented into hot regions, reduced to
remaining-area trajectories and classified by material. A Newton-cooling
scene simulator provides closed-form ground truth for every stage.
"""
from .core import (
    ConfigError,
    DissipationVector,
    DomainError,
    FormatError,
    FrameSequence,
    GrayFrame,
    NoFingerprintError,
    RawFrame,
    ThermprintError,
    load_sequence,
    load_vector,
    read_sequence,
    read_vector,
    save_sequence,
    save_vector,
    write_sequence,
    write_vector,
)
from .fingerprint import (
    FingerprintConfig,
    dissipation_time,
    extract_vector,
    hot_area,
    reduction_area,
    spearman,
)
from .preprocess import PreprocessConfig, background_filter, denoise, normalize, preprocess_sequence
from .segment import Roi, arrangement, extract_multi, find_rois, split_agglomerated
from .simulate import (
    MaterialProfile,
    SceneObject,
    SceneSpec,
    analytic_dissipation_time,
    attenuated_excess,
    fit_cooling,
    render_scene,
    resample_camera,
)

__version__ = "0.1.0"
