"""Response-time harness for the multi-object pipeline."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import ConfigError, ThermprintError
from .datasets import material_dataset, multi_object_scene
from .fingerprint import FingerprintConfig
from .learn import encode_dataset, train_forest
from .pipeline import analyze_scene
from .preprocess import PreprocessConfig
from .simulate import HOUSEHOLD, material_by_name, render_scene

# Each grouping adds one object to the previous one.
ARRANGEMENTS = {
    "A": ("coffee_cup",),
    "B": ("coffee_cup", "plastic_bottle"),
    "C": ("coffee_cup", "plastic_bottle", "cigarette_butt"),
    "D": ("coffee_cup", "plastic_bottle", "cigarette_butt", "face_mask"),
}
MODES = ("dispersed", "agglomerated")
TSV_HEADER = "\t".join(
    ["length_s", "arrangement", "mode", "frames", "median_ms", "p10_ms", "p90_ms", "roi_count"]
)
MODEL_VECTOR_LEN = 480


class BenchError(ThermprintError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    video_lengths_s: tuple = (30.0, 60.0, 90.0, 120.0)
    fps_millihz: int = 30000
    arrangements: tuple = ("A", "B", "C", "D")
    modes: tuple = MODES
    repetitions: int = 3
    rng_seed: int = 0
    frame_size: int = 40
    noise_sigma_c: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "video_lengths_s", tuple(float(x) for x in self.video_lengths_s))
        object.__setattr__(self, "arrangements", tuple(self.arrangements))
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.video_lengths_s or any(not x > 0 for x in self.video_lengths_s):
            raise ConfigError("video lengths must be > 0")
        if self.fps_millihz <= 0:
            raise ConfigError("fps_millihz must be > 0")
        if self.repetitions < 3:
            raise ConfigError(f"repetitions must be >= 3, got {self.repetitions}")
        bad = [a for a in self.arrangements if a not in ARRANGEMENTS]
        if bad or not self.arrangements:
            raise ConfigError(f"unknown arrangement(s) {bad}; choose from A, B, C, D")
        bad = [m for m in self.modes if m not in MODES]
        if bad or not self.modes:
            raise ConfigError(f"unknown mode(s) {bad}; choose from {', '.join(MODES)}")


class BenchRow(NamedTuple):
    length_s: float
    arrangement: str
    mode: str
    frames: int
    median_ms: float
    p10_ms: float
    p90_ms: float
    roi_count: int

    def format(self) -> str:
        return "\t".join([
            f"{self.length_s:g}", self.arrangement, self.mode, str(self.frames),
            f"{self.median_ms:.3f}", f"{self.p10_ms:.3f}", f"{self.p90_ms:.3f}",
            str(self.roi_count),
        ])


def format_table(rows) -> str:
    return "\n".join([TSV_HEADER] + [r.format() for r in rows]) + "\n"


def parse_table(text: str) -> list:
    lines = text.splitlines()
    if not lines or lines[0] != TSV_HEADER:
        raise BenchError("timing table header mismatch")
    rows = []
    for line in lines[1:]:
        f = line.split("\t")
        if len(f) != 8:
            raise BenchError(f"bad timing row: {line!r}")
        rows.append(BenchRow(float(f[0]), f[1], f[2], int(f[3]), float(f[4]), float(f[5]),
                             float(f[6]), int(f[7])))
    return rows


def bench_model(fps_millihz: int, seed: int = 0):
    """Small forest over the household materials, used as the prediction stage."""
    fp = FingerprintConfig(vector_len=MODEL_VECTOR_LEN)
    samples = material_dataset(HOUSEHOLD, 4, seed=seed, noise_sigma_c=0.0,
                               fps_millihz=fps_millihz, fp_cfg=fp)
    X, y = encode_dataset(samples)
    return train_forest(X, y, n_trees=20, seed=seed)


def time_pipeline(seq, model, pre_cfg: PreprocessConfig, fp_cfg: FingerprintConfig):
    """Wall-clock seconds of one preprocess/segment/fingerprint/predict pass."""
    t0 = time.perf_counter()
    results = analyze_scene(seq, model, pre_cfg, fp_cfg, feature_len=MODEL_VECTOR_LEN)
    return time.perf_counter() - t0, len(results)


def run_bench(cfg: BenchConfig = BenchConfig(), model=None) -> list:
    """Time every (length, arrangement, mode) cell; cells run sequentially.

    One warmup pass per cell is discarded before ``cfg.repetitions`` timed
    passes. Scene rendering is not timed.
    """
    if model is None:
        model = bench_model(cfg.fps_millihz, cfg.rng_seed)
    pre = PreprocessConfig()
    rows = []
    for li, length in enumerate(cfg.video_lengths_s):
        for arr in cfg.arrangements:
            mats = [material_by_name(n) for n in ARRANGEMENTS[arr]]
            for mode in cfg.modes:
                cell = (length, arr, mode)
                try:
                    spec, _ = multi_object_scene(
                        mats, mode, seed=cfg.rng_seed * 1000 + li, size=cfg.frame_size,
                        fps_millihz=cfg.fps_millihz, duration_s=length,
                        noise_sigma_c=cfg.noise_sigma_c)
                    seq = render_scene(spec)
                    fp = FingerprintConfig(vector_len=max(2, len(seq)))
                    time_pipeline(seq, model, pre, fp)
                    runs = [time_pipeline(seq, model, pre, fp) for _ in range(cfg.repetitions)]
                except ThermprintError as exc:
                    raise BenchError(f"cell {cell}: {exc}") from exc
                ms = np.array([r[0] for r in runs]) * 1000.0
                rows.append(BenchRow(length, arr, mode, len(seq), float(np.median(ms)),
                                     float(np.percentile(ms, 10)), float(np.percentile(ms, 90)),
                                     runs[0][1]))
    return rows


def cost_slope(rows) -> Optional[float]:
    """Least-squares slope of median time (ms) against frame count."""
    frames = np.array([r.frames for r in rows], dtype=float)
    if np.unique(frames).size < 2:
        return None
    ms = np.array([r.median_ms for r in rows])
    return float(np.polyfit(frames, ms, 1)[0])
