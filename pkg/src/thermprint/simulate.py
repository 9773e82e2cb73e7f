"""Synthetic thermal scenes with closed-form ground truth.

Each touched object leaves an isotropic Gaussian hot spot that cools by
Newton's law with a single time constant::

    T(x, y, t) = T_amb + sum_o dT_o * exp(-t / tau_o) * exp(-d_o^2 / (2 sigma_o^2)) + noise

where ``dT_o`` is the initial excess attenuated by any cover layer,
``dT_o = excess_o * exp(-k_o * thickness_o)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from . import kvdoc
from .core import (
    DomainError,
    FrameSequence,
    celsius_to_centikelvin,
)

_CHUNK_FRAMES = 256


@dataclass(frozen=True)
class MaterialProfile:
    name: str
    tau_s: float
    emissivity: float = 0.95
    spot_sigma_px: float = 1.5
    resistance_k_per_mm: float = 0.5

    def __post_init__(self):
        if not self.name or any(c.isspace() for c in self.name):
            raise DomainError(f"material name must be a non-empty token, got {self.name!r}")
        if not self.tau_s > 0:
            raise DomainError(f"tau_s must be > 0, got {self.tau_s}")
        if not 0 < self.emissivity <= 1:
            raise DomainError(f"emissivity must be in (0, 1], got {self.emissivity}")
        if not self.spot_sigma_px > 0:
            raise DomainError(f"spot_sigma_px must be > 0, got {self.spot_sigma_px}")
        if not self.resistance_k_per_mm >= 0:
            raise DomainError("resistance_k_per_mm must be >= 0")


@dataclass(frozen=True)
class SceneObject:
    profile: MaterialProfile
    center: tuple  # (x, y) in pixels
    initial_excess_c: float
    cover_thickness_mm: float = 0.0

    def __post_init__(self):
        if not self.initial_excess_c > 0:
            raise DomainError(f"initial_excess_c must be > 0, got {self.initial_excess_c}")
        if not self.cover_thickness_mm >= 0:
            raise DomainError("cover_thickness_mm must be >= 0")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def effective_excess_c(self) -> float:
        return attenuated_excess(self.initial_excess_c, self.profile, self.cover_thickness_mm)

    def peak_excess_c(self, t_s):
        """Noise-free excess at the spot center at time ``t_s``."""
        return self.effective_excess_c * np.exp(-np.asarray(t_s, dtype=float) / self.profile.tau_s)


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    fps_millihz: int
    duration_s: float
    ambient_c: float
    objects: tuple
    noise_sigma_c: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if self.width < 1 or self.height < 1:
            raise DomainError("scene width and height must be >= 1")
        if self.fps_millihz <= 0:
            raise DomainError("fps_millihz must be > 0")
        if not self.duration_s > 0:
            raise DomainError("duration_s must be > 0")
        if not self.noise_sigma_c >= 0:
            raise DomainError("noise_sigma_c must be >= 0")
        if not 0 <= self.rng_seed < 2**64:
            raise DomainError("rng_seed must be a 64-bit unsigned integer")
        if not self.objects:
            raise DomainError("scene must contain ≥ 1 object")
        for i, obj in enumerate(self.objects):
            x, y = obj.center
            if not (0 <= x <= self.width - 1 and 0 <= y <= self.height - 1):
                raise DomainError(f"object {i} center {obj.center} outside the frame")

    @property
    def n_frames(self) -> int:
        return max(1, int(round(self.duration_s * self.fps_millihz / 1000.0)))

    @property
    def frame_period_s(self) -> float:
        return 1000.0 / self.fps_millihz

    @property
    def ambient_centikelvin(self) -> int:
        return celsius_to_centikelvin(self.ambient_c)

    def frame_times(self) -> np.ndarray:
        return np.arange(self.n_frames) * 1000.0 / self.fps_millihz


def attenuated_excess(initial_excess_c: float, profile: MaterialProfile, thickness_mm: float) -> float:
    """Excess temperature seen through ``thickness_mm`` of cover."""
    if thickness_mm < 0:
        raise DomainError(f"thickness must be >= 0, got {thickness_mm}")
    return initial_excess_c * math.exp(-profile.resistance_k_per_mm * thickness_mm)


def analytic_dissipation_time(profile: MaterialProfile, initial_excess_c: float,
                              threshold_excess_c: float) -> float:
    """Time for the noise-free spot peak to cool down to the threshold excess."""
    if not (initial_excess_c > 0 and threshold_excess_c > 0):
        raise DomainError("initial and threshold excess must both be > 0")
    if initial_excess_c <= threshold_excess_c:
        return 0.0
    return profile.tau_s * math.log(initial_excess_c / threshold_excess_c)


def spot_area_px(profile: MaterialProfile, peak_excess_c: float, threshold_excess_c: float) -> float:
    """Continuous area of the disc where a Gaussian spot exceeds the threshold.

    ``r^2 = 2 sigma^2 ln(peak / threshold)``, so the area is ``pi r^2``.
    """
    if peak_excess_c <= threshold_excess_c:
        return 0.0
    return 2.0 * math.pi * profile.spot_sigma_px**2 * math.log(peak_excess_c / threshold_excess_c)


def spot_radius_px(profile: MaterialProfile, peak_excess_c: float, threshold_excess_c: float) -> float:
    if peak_excess_c <= threshold_excess_c:
        return 0.0
    return math.sqrt(2.0 * profile.spot_sigma_px**2 * math.log(peak_excess_c / threshold_excess_c))


def render_excess(spec: SceneSpec, times_s) -> np.ndarray:
    """Noise-free excess field in degrees, shape (len(times_s), height, width)."""
    times_s = np.atleast_1d(np.asarray(times_s, dtype=float))
    ys, xs = np.mgrid[0:spec.height, 0:spec.width].astype(float)
    out = np.zeros((times_s.size, spec.height, spec.width))
    for obj in spec.objects:
        cx, cy = obj.center
        sig = obj.profile.spot_sigma_px
        shape = np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * sig * sig))
        out += obj.peak_excess_c(times_s)[:, None, None] * shape[None]
    return out


def frame_noise(seed: int, frame_index: int, sigma_c: float, shape) -> np.ndarray:
    """Per-frame sensor noise in degrees; the stream depends only on (seed, frame)."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(frame_index)]))
    return rng.normal(0.0, sigma_c, size=shape)


def render_scene(spec: SceneSpec, label: Optional[str] = None) -> FrameSequence:
    """Render every frame of the scene as centikelvin integers.

    Deterministic for a fixed spec: noise for frame ``n`` is drawn from a
    stream seeded by ``(rng_seed, n)``.
    """
    amb = spec.ambient_centikelvin
    times = spec.frame_times()
    out = np.empty((times.size, spec.height, spec.width), dtype=np.uint16)
    for start in range(0, times.size, _CHUNK_FRAMES):
        stop = min(times.size, start + _CHUNK_FRAMES)
        excess = render_excess(spec, times[start:stop])
        if spec.noise_sigma_c > 0:
            for j in range(stop - start):
                excess[j] += frame_noise(spec.rng_seed, start + j, spec.noise_sigma_c,
                                         excess.shape[1:])
        ck = np.floor(amb + 100.0 * excess + 0.5)
        out[start:stop] = np.clip(ck, 0, 65535).astype(np.uint16)
    if label is None and len({o.profile.name for o in spec.objects}) == 1:
        label = spec.objects[0].profile.name
    return FrameSequence.from_array(out, spec.fps_millihz, amb, label)


def resample_camera(seq: FrameSequence, out_width: int, out_height: int) -> FrameSequence:
    """Block-average downsampling, rounding each block mean half-up to centikelvin.

    Block ``i`` along an axis of length ``n`` covers input pixels
    ``[floor(i*n/out), floor((i+1)*n/out))``.
    """
    if out_width < 1 or out_height < 1:
        raise DomainError("output dimensions must be >= 1")
    if out_width > seq.width or out_height > seq.height:
        raise DomainError(
            f"cannot upsample {seq.width}x{seq.height} to {out_width}x{out_height}"
        )
    stack = seq.stack().astype(np.int64)
    ye = (np.arange(out_height + 1) * seq.height) // out_height
    xe = (np.arange(out_width + 1) * seq.width) // out_width
    # integral image for exact block sums
    integ = np.zeros((stack.shape[0], seq.height + 1, seq.width + 1), dtype=np.int64)
    integ[:, 1:, 1:] = stack.cumsum(1).cumsum(2)
    sums = (integ[:, ye[1:]][:, :, xe[1:]] - integ[:, ye[:-1]][:, :, xe[1:]]
            - integ[:, ye[1:]][:, :, xe[:-1]] + integ[:, ye[:-1]][:, :, xe[:-1]])
    counts = np.outer(np.diff(ye), np.diff(xe))[None]
    means = (2 * sums + counts) // (2 * counts)
    return FrameSequence.from_array(means.astype(np.uint16), seq.fps_millihz,
                                    seq.ambient_centikelvin, seq.label)


# --- calibration -------------------------------------------------------------


@dataclass(frozen=True)
class CoolingFit:
    tau_s: float
    threshold_c: float
    predicted_s: tuple
    residuals_s: tuple

    @property
    def max_abs_residual_s(self) -> float:
        return max(abs(r) for r in self.residuals_s)


def predicted_times(tau_s: float, threshold_c: float, excesses_c) -> np.ndarray:
    e = np.asarray(excesses_c, dtype=float)
    return tau_s * np.log(np.maximum(e / threshold_c, 1.0))


def fit_cooling(times_s: Sequence[float], excesses_c: Sequence[float],
                grid_size: int = 200) -> CoolingFit:
    """Least-squares fit of (tau, threshold) to measured dissipation times.

    A coarse log-spaced grid locates the basin, Nelder-Mead in log-space
    refines it.
    """
    t = np.asarray(times_s, dtype=float)
    e = np.asarray(excesses_c, dtype=float)
    if t.shape != e.shape or t.size < 2:
        raise DomainError("need at least two (time, excess) pairs of equal length")
    if np.any(t < 0) or np.any(e <= 0):
        raise DomainError("times must be >= 0 and excesses > 0")

    def sse(tau, theta):
        return float(np.sum((predicted_times(tau, theta, e) - t) ** 2))

    taus = np.geomspace(max(t.max(), 1.0) / 100.0, max(t.max(), 1.0) * 100.0, grid_size)
    thetas = np.geomspace(e.min() * 1e-3, e.max(), grid_size)
    tt, th = np.meshgrid(taus, thetas, indexing="ij")
    ratio = np.log(np.maximum(e[None, None, :] / th[..., None], 1.0))
    err = np.sum((tt[..., None] * ratio - t) ** 2, axis=-1)
    i, j = np.unravel_index(np.argmin(err), err.shape)

    res = optimize.minimize(
        lambda p: sse(math.exp(p[0]), math.exp(p[1])),
        x0=[math.log(taus[i]), math.log(thetas[j])],
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-10, "maxiter": 20000, "maxfev": 40000},
    )
    tau, theta = math.exp(res.x[0]), math.exp(res.x[1])
    if sse(tau, theta) > err[i, j]:
        tau, theta = float(taus[i]), float(thetas[j])
    pred = predicted_times(tau, theta, e)
    return CoolingFit(tau, theta, tuple(pred.tolist()), tuple((pred - t).tolist()))


# --- material catalogues -----------------------------------------------------


def tau_from_emissivity(emissivity: float, tau_at_090: float = 4.0,
                        slope_s: float = 450.0) -> float:
    """Affine emissivity -> cooling time constant map used for the demo sets."""
    tau = tau_at_090 + slope_s * (emissivity - 0.90)
    if tau <= 0:
        raise DomainError(f"emissivity {emissivity} maps to non-positive tau")
    return tau


def _plastic(name, eps):
    return MaterialProfile(name, tau_from_emissivity(eps), eps, 2.0, 0.5)


# Illustrative emissivities inside the 0.90-0.97 band of common resins, spaced
# so that consecutive time constants differ by > 1.6x: wider than the spread
# of dissipation times caused by hold-dependent initial excess.
PLASTICS = (
    _plastic("LDPE", 0.900),
    _plastic("PP", 0.907),
    _plastic("HDPE", 0.918),
    _plastic("PS", 0.935),
    _plastic("PVC", 0.967),
)

HOUSEHOLD = (
    MaterialProfile("cigarette_butt", 8.0, 0.95, 1.5, 0.8),
    MaterialProfile("coffee_cup", 30.0, 0.93, 1.5, 0.6),
    MaterialProfile("plastic_bottle", 70.0, 0.94, 1.5, 0.5),
    MaterialProfile("face_mask", 160.0, 0.96, 1.5, 0.3),
)


def emissivity_sweep(n: int, lo: float = 0.90, hi: float = 0.97,
                     spot_sigma_px: float = 1.5) -> tuple:
    """``n`` materials with evenly spaced emissivity and affine-mapped tau."""
    if n < 2:
        raise DomainError("sweep needs at least two materials")
    return tuple(
        MaterialProfile(f"m{i:02d}", tau_from_emissivity(eps), float(eps), spot_sigma_px, 0.5)
        for i, eps in enumerate(np.linspace(lo, hi, n))
    )


def material_by_name(name: str) -> MaterialProfile:
    for m in PLASTICS + HOUSEHOLD:
        if m.name == name:
            return m
    raise DomainError(f"unknown material {name!r}")


def single_object_scene(profile: MaterialProfile, initial_excess_c: float, *,
                        size: int = 17, fps_millihz: int = 8000, duration_s: float = 60.0,
                        ambient_c: float = 23.0, noise_sigma_c: float = 0.0,
                        thickness_mm: float = 0.0, rng_seed: int = 0) -> SceneSpec:
    c = (size - 1) / 2.0
    c = float(int(c))
    return SceneSpec(size, size, fps_millihz, duration_s, ambient_c,
                     (SceneObject(profile, (c, c), initial_excess_c, thickness_mm),),
                     noise_sigma_c, rng_seed)


# --- text format -------------------------------------------------------------


def parse_scene(text: str) -> SceneSpec:
    """Parse a scene document (see :mod:`thermprint.kvdoc` for the grammar).

    Top-level keys: ``width height fps_millihz duration_s ambient_c
    noise_sigma_c rng_seed``. Each ``[object]`` block takes ``name tau_s
    emissivity spot_sigma_px resistance_k_per_mm center_x center_y
    initial_excess_c cover_thickness_mm``; ``name`` alone may refer to a
    built-in material.
    """
    top, blocks = kvdoc.parse_document(text)
    objects = []
    for b in blocks:
        name = kvdoc.take(b, "name", str, required=True)
        base = None
        if "tau_s" not in b:
            base = material_by_name(name)
        profile = MaterialProfile(
            name,
            kvdoc.take(b, "tau_s", float, base.tau_s if base else None),
            kvdoc.take(b, "emissivity", float, base.emissivity if base else 0.95),
            kvdoc.take(b, "spot_sigma_px", float, base.spot_sigma_px if base else 1.5),
            kvdoc.take(b, "resistance_k_per_mm", float,
                       base.resistance_k_per_mm if base else 0.5),
        )
        objects.append(SceneObject(
            profile,
            (kvdoc.take(b, "center_x", float, required=True),
             kvdoc.take(b, "center_y", float, required=True)),
            kvdoc.take(b, "initial_excess_c", float, required=True),
            kvdoc.take(b, "cover_thickness_mm", float, 0.0),
        ))
    return SceneSpec(
        kvdoc.take(top, "width", int, required=True),
        kvdoc.take(top, "height", int, required=True),
        kvdoc.take(top, "fps_millihz", int, 8000),
        kvdoc.take(top, "duration_s", float, required=True),
        kvdoc.take(top, "ambient_c", float, 23.0),
        tuple(objects),
        kvdoc.take(top, "noise_sigma_c", float, 0.0),
        kvdoc.take(top, "rng_seed", int, 0),
    )


def format_scene(spec: SceneSpec) -> str:
    top = {
        "width": spec.width, "height": spec.height, "fps_millihz": spec.fps_millihz,
        "duration_s": repr(float(spec.duration_s)), "ambient_c": repr(float(spec.ambient_c)),
        "noise_sigma_c": repr(float(spec.noise_sigma_c)), "rng_seed": spec.rng_seed,
    }
    blocks = []
    for o in spec.objects:
        p = o.profile
        blocks.append({
            "name": p.name, "tau_s": repr(p.tau_s), "emissivity": repr(p.emissivity),
            "spot_sigma_px": repr(p.spot_sigma_px),
            "resistance_k_per_mm": repr(p.resistance_k_per_mm),
            "center_x": repr(o.center[0]), "center_y": repr(o.center[1]),
            "initial_excess_c": repr(o.initial_excess_c),
            "cover_thickness_mm": repr(o.cover_thickness_mm),
        })
    return kvdoc.format_document(top, blocks)


def with_seed(spec: SceneSpec, seed: int) -> SceneSpec:
    return replace(spec, rng_seed=seed)
