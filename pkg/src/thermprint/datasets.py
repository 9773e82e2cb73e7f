"""Labeled simulator datasets and multi-object scene layouts."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .core import DomainError
from .fingerprint import FingerprintConfig
from .learn.features import CONTEXTS, GENDERS, LabeledSample
from .pipeline import sequence_vector
from .preprocess import PreprocessConfig
from .simulate import MaterialProfile, SceneObject, SceneSpec, render_scene, single_object_scene

# Initial excess over ambient (degC) left by each hold style.
HOLD_EXCESS_C = {"fixed": (13.0, 15.0), "natural": (11.0, 13.0), "quick": (9.0, 11.0)}
GENDER_OFFSET_C = {"female": -0.25, "male": 0.25}


def draw_touch(rng: np.random.Generator):
    """Random (context, gender, initial excess) for one simulated touch."""
    context = CONTEXTS[int(rng.integers(len(CONTEXTS)))]
    gender = GENDERS[int(rng.integers(len(GENDERS)))]
    lo, hi = HOLD_EXCESS_C[context]
    return context, gender, float(rng.uniform(lo, hi)) + GENDER_OFFSET_C[gender]


def material_dataset(materials: Sequence[MaterialProfile], per_class: int, *, seed: int = 0,
                     noise_sigma_c: float = 0.3, size: int = 17, fps_millihz: int = 8000,
                     pre_cfg: Optional[PreprocessConfig] = None,
                     fp_cfg: FingerprintConfig = FingerprintConfig(),
                     ambient_c: float = 23.0) -> list:
    """``per_class`` single-object samples per material, rendered and extracted.

    Sample ``i`` of material ``m`` draws everything from stream ``(seed, m, i)``.
    """
    if pre_cfg is None:
        pre_cfg = PreprocessConfig(denoise_window=3 if noise_sigma_c > 0 else 1)
    duration = fp_cfg.vector_len * 1000.0 / fps_millihz
    samples = []
    for m, prof in enumerate(materials):
        for i in range(per_class):
            rng = np.random.default_rng([seed, m, i])
            context, gender, excess = draw_touch(rng)
            spec = single_object_scene(prof, excess, size=size, fps_millihz=fps_millihz,
                                       duration_s=duration, ambient_c=ambient_c,
                                       noise_sigma_c=noise_sigma_c,
                                       rng_seed=int(rng.integers(2**63)))
            vec = sequence_vector(render_scene(spec), pre_cfg, fp_cfg)
            samples.append(LabeledSample(vec, prof.name, context, gender))
    return samples


def grid_centers(n: int, width: int, height: int, spacing: float, rng=None,
                 jitter: int = 0) -> list:
    """Up to four integer centers on a 2x2 lattice around the frame center."""
    if not 1 <= n <= 4:
        raise DomainError("layouts support 1-4 objects")
    cx, cy = (width - 1) // 2, (height - 1) // 2
    half = spacing / 2.0
    offsets = [(-half, -half), (half, -half), (-half, half), (half, half)]
    if n == 1:
        offsets = [(0.0, 0.0)]
    elif n == 2:
        offsets = [(-half, 0.0), (half, 0.0)]
    elif n == 3:
        offsets = offsets[:3]
    out = []
    for dx, dy in offsets[:n]:
        jx = jy = 0
        if rng is not None and jitter:
            jx, jy = (int(v) for v in rng.integers(-jitter, jitter + 1, size=2))
        x = int(np.clip(round(cx + dx) + jx, 0, width - 1))
        y = int(np.clip(round(cy + dy) + jy, 0, height - 1))
        out.append((x, y))
    return out


def multi_object_scene(materials: Sequence[MaterialProfile], mode: str, *, seed: int = 0,
                       size: int = 40, fps_millihz: int = 8000, duration_s: float = 60.0,
                       ambient_c: float = 23.0, noise_sigma_c: float = 0.0,
                       dispersed_spacing: float = 18.0, agglomerated_spacing: float = 4.0):
    """Scene with one spot per material; returns ``(SceneSpec, labels)``.

    Dispersed spots sit far apart on a jittered lattice; agglomerated spots
    are packed close enough that their hot regions merge.
    """
    rng = np.random.default_rng([seed, 7])
    if mode == "dispersed":
        centers = grid_centers(len(materials), size, size, dispersed_spacing, rng, jitter=2)
    elif mode == "agglomerated":
        centers = grid_centers(len(materials), size, size, agglomerated_spacing)
    else:
        raise DomainError(f"unknown arrangement mode {mode!r}")
    objects = []
    for prof, c in zip(materials, centers):
        _, _, excess = draw_touch(rng)
        objects.append(SceneObject(prof, c, excess))
    spec = SceneSpec(size, size, fps_millihz, duration_s, ambient_c, tuple(objects),
                     noise_sigma_c, int(rng.integers(2**63)))
    return spec, [m.name for m in materials]
