"""Multi-object ROI extraction and per-object dissipation vectors."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .core import ConfigError, DissipationVector, DomainError, GrayFrame, NoFingerprintError, stack_frames
from .fingerprint import FingerprintConfig, vector_from_areas
from .preprocess import check_window, denoise_array

EIGHT = np.ones((3, 3), dtype=bool)
DEFAULT_PROMINENCE = 10

DISPERSED = "dispersed"
AGGLOMERATED = "agglomerated"


@dataclass(frozen=True, eq=False)
class Roi:
    """A connected hot region. ``mask`` is a full-frame boolean array."""

    id: int
    bbox: tuple  # (min_x, min_y, max_x, max_y), inclusive
    centroid: tuple  # (x, y)
    mask: np.ndarray
    peak_intensity: int

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        if not m.any():
            raise DomainError("ROI mask must be non-empty")
        ys, xs = np.nonzero(m)
        x0, y0, x1, y1 = self.bbox
        if xs.min() < x0 or xs.max() > x1 or ys.min() < y0 or ys.max() > y1:
            raise DomainError("ROI bbox does not contain its mask")
        cx, cy = self.centroid
        if not (x0 <= cx <= x1 and y0 <= cy <= y1):
            raise DomainError("ROI centroid outside its bbox")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @property
    def area(self) -> int:
        return int(self.mask.sum())

    def pixels(self) -> set:
        ys, xs = np.nonzero(self.mask)
        return set(zip(xs.tolist(), ys.tolist()))

    def with_id(self, new_id: int) -> "Roi":
        return Roi(new_id, self.bbox, self.centroid, self.mask, self.peak_intensity)


def roi_from_mask(roi_id: int, mask: np.ndarray, frame_pixels: np.ndarray) -> Roi:
    ys, xs = np.nonzero(mask)
    bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
    centroid = (float(xs.mean()), float(ys.mean()))
    peak = int(frame_pixels[mask].max())
    return Roi(roi_id, bbox, centroid, mask, peak)


def _sort_key(roi: Roi):
    ys, xs = np.nonzero(roi.mask)
    first = int(np.argmin(ys * roi.mask.shape[1] + xs))
    return (roi.bbox[1], roi.bbox[0], int(ys[first]), int(xs[first]))


def renumber(rois: Sequence[Roi]) -> list:
    """Assign ids 0..n-1 ordered by (min_y, min_x) of each bbox."""
    return [r.with_id(i) for i, r in enumerate(sorted(rois, key=_sort_key))]


def find_rois(frame: GrayFrame, threshold: int) -> list:
    """8-connected components of pixels with intensity >= ``threshold``."""
    if not 1 <= threshold <= 255:
        raise ConfigError("threshold must be in [1, 255]")
    px = frame.pixels
    labels, n = ndimage.label(px >= threshold, structure=EIGHT)
    rois = [roi_from_mask(0, labels == k, px) for k in range(1, n + 1)]
    return renumber(rois)


class RoiList(list):
    """List of ROIs with diagnostic warnings attached."""

    def __init__(self, items=(), warnings=()):
        super().__init__(items)
        self.warnings = list(warnings)


def local_maxima(pixels: np.ndarray, mask: np.ndarray) -> list:
    """Plateau-merged 8-neighbourhood maxima inside ``mask`` with their prominence.

    Returns ``[(flat_index, prominence), ...]`` where ``flat_index`` is the
    raster-first pixel of each peak. Prominence is the drop from the peak to
    the highest saddle that joins it to a higher (or equally high, earlier)
    peak; the dominant peak gets ``peak - min(mask)``.
    """
    h, w = pixels.shape
    flat = pixels.ravel().astype(np.int64)
    idx = np.flatnonzero(mask.ravel())
    # descending value, raster order among equals
    order = idx[np.lexsort((idx, -flat[idx]))]
    parent = np.full(h * w, -1, dtype=np.int64)
    peak_of = {}

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    prominence = {}
    for p in order.tolist():
        v = flat[p]
        y, x = divmod(p, w)
        roots = set()
        for dy in (-1, 0, 1):
            yy = y + dy
            if yy < 0 or yy >= h:
                continue
            for dx in (-1, 0, 1):
                xx = x + dx
                if (dy or dx) and 0 <= xx < w:
                    q = yy * w + xx
                    if parent[q] >= 0:
                        roots.add(find(q))
        parent[p] = p
        if not roots:
            peak_of[p] = p
            continue
        ranked = sorted(roots, key=lambda r: (-flat[peak_of[r]], peak_of[r]))
        keep = ranked[0]
        for r in ranked[1:]:
            prominence[peak_of[r]] = int(flat[peak_of[r]] - v)
            parent[r] = keep
        parent[p] = keep
    lowest = int(flat[idx].min())
    for r in {find(int(i)) for i in idx}:
        prominence[peak_of[r]] = int(flat[peak_of[r]]) - lowest
    dominant = min(prominence, key=lambda k: (-flat[k], k))
    return sorted((pk, pr) for pk, pr in prominence.items() if pr > 0 or pk == dominant)


def _plateau_centroid(pixels, mask, peak_flat):
    h, w = pixels.shape
    y, x = divmod(peak_flat, w)
    lab, _ = ndimage.label((pixels == pixels[y, x]) & mask, structure=EIGHT)
    ys, xs = np.nonzero(lab == lab[y, x])
    return float(xs.mean()), float(ys.mean())


def split_agglomerated(frame: GrayFrame, roi: Roi, expected_k: Optional[int] = None,
                       prominence: int = DEFAULT_PROMINENCE) -> RoiList:
    """Split a merged ROI around its hottest local maxima.

    Maxima with prominence >= ``prominence`` are kept (the dominant peak
    always is). With ``expected_k`` only the ``k`` most prominent survive.
    Each mask pixel goes to the nearest maximum; ties go to the maximum
    that comes first in raster order.
    """
    if prominence < 1:
        raise ConfigError("prominence must be >= 1")
    if expected_k is not None and expected_k < 1:
        raise ConfigError("expected_k must be >= 1")
    px = frame.pixels
    peaks = local_maxima(px, roi.mask)
    dominant = min(pk for pk, _ in peaks if px.flat[pk] == px[roi.mask].max())
    found = [t for t in peaks if t[1] >= prominence or t[0] == dominant]
    warnings = []
    if expected_k is not None:
        if expected_k > len(found):
            warnings.append(
                f"under-segmentation: expected {expected_k} maxima in ROI {roi.id}, found {len(found)}"
            )
        found = sorted(found, key=lambda t: (-t[1], t[0]))[:expected_k]
    found.sort(key=lambda t: t[0])
    if len(found) <= 1:
        return RoiList([roi], warnings)

    centers = np.array([_plateau_centroid(px, roi.mask, pk) for pk, _ in found])
    ys, xs = np.nonzero(roi.mask)
    d2 = (xs[:, None] - centers[None, :, 0]) ** 2 + (ys[:, None] - centers[None, :, 1]) ** 2
    owner = np.argmin(d2, axis=1)
    out = []
    for k in range(len(found)):
        m = np.zeros_like(roi.mask)
        m[ys[owner == k], xs[owner == k]] = True
        if m.any():
            out.append(roi_from_mask(k, m, px))
    return RoiList(out, warnings)


def arrangement(rois: Sequence[Roi]) -> str:
    """``agglomerated`` iff two ROI masks touch under 8-connectivity."""
    for i, a in enumerate(rois):
        grown = ndimage.binary_dilation(a.mask, structure=EIGHT)
        for b in rois[i + 1:]:
            if np.any(grown & b.mask):
                return AGGLOMERATED
    return DISPERSED


def segment_frame(frame: GrayFrame, threshold: int, prominence: int = DEFAULT_PROMINENCE,
                  split: bool = True) -> RoiList:
    """Components of ``frame`` with agglomerated ones split, renumbered."""
    rois = find_rois(frame, threshold)
    warnings = []
    if split:
        parts = []
        for r in rois:
            res = split_agglomerated(frame, r, None, prominence)
            parts.extend(res)
            warnings.extend(res.warnings)
        rois = parts
    return RoiList(renumber(rois), warnings)


def tracking_regions(rois: Sequence[Roi]) -> list:
    """Frame-0 masks grown by one pixel, excluding pixels owned by other ROIs."""
    if not rois:
        return []
    owned = np.zeros_like(rois[0].mask)
    for r in rois:
        owned |= r.mask
    regions = []
    for r in rois:
        grown = ndimage.binary_dilation(r.mask, structure=EIGHT)
        regions.append(grown & ~(owned & ~r.mask))
    return regions


def extract_multi(frames: Sequence[GrayFrame], cfg: FingerprintConfig = FingerprintConfig(),
                  fps_millihz: int = 8000, prominence: int = DEFAULT_PROMINENCE,
                  split: bool = True) -> list:
    """One ``(Roi, DissipationVector)`` per object found in frame 0.

    ROIs are frozen at frame 0; the area of ROI ``r`` at frame ``t`` is the
    number of hot pixels inside its tracking region.
    """
    if not frames:
        raise NoFingerprintError("empty frame sequence")
    rois = segment_frame(frames[0], cfg.intensity_threshold, prominence, split)
    if not rois:
        raise NoFingerprintError("no hot region in frame 0")
    hot = stack_frames(frames[:cfg.vector_len]) >= cfg.intensity_threshold
    out = []
    for roi, region in zip(rois, tracking_regions(rois)):
        ys, xs = np.nonzero(region)
        y0, y1, x0, x1 = ys.min(), ys.max() + 1, xs.min(), xs.max() + 1
        crop = hot[:, y0:y1, x0:x1] & region[y0:y1, x0:x1]
        areas = crop.sum(axis=(1, 2))
        out.append((roi, vector_from_areas(areas, cfg.vector_len, fps_millihz)))
    return out


def extract_multi_local(frames: Sequence[GrayFrame], denoise_window: int,
                        cfg: FingerprintConfig = FingerprintConfig(), fps_millihz: int = 8000,
                        prominence: int = DEFAULT_PROMINENCE, split: bool = True) -> list:
    """:func:`extract_multi` on frames that still need median denoising.

    Only frame 0 is denoised in full (for segmentation). Every other frame
    is denoised inside each tracking region's bounding box, padded by half
    the window so that the medians inside the region equal the full-frame
    ones. Cost therefore grows with the number and size of ROIs rather than
    the frame size.
    """
    if not frames:
        raise NoFingerprintError("empty frame sequence")
    check_window(denoise_window, frames[0].width, frames[0].height)
    raw = stack_frames(frames[:cfg.vector_len])
    first = GrayFrame._trusted(denoise_array(raw[0], denoise_window), 0)
    rois = segment_frame(first, cfg.intensity_threshold, prominence, split)
    if not rois:
        raise NoFingerprintError("no hot region in frame 0")
    half = denoise_window // 2
    h, w = raw.shape[1:]
    out = []
    for roi, region in zip(rois, tracking_regions(rois)):
        ys, xs = np.nonzero(region)
        y0, y1, x0, x1 = ys.min(), ys.max() + 1, xs.min(), xs.max() + 1
        py0, py1 = max(0, y0 - half), min(h, y1 + half)
        px0, px1 = max(0, x0 - half), min(w, x1 + half)
        clean = denoise_array(raw[:, py0:py1, px0:px1], denoise_window)
        clean = clean[:, y0 - py0:y1 - py0, x0 - px0:x1 - px0]
        crop = (clean >= cfg.intensity_threshold) & region[y0:y1, x0:x1]
        out.append((roi, vector_from_areas(crop.sum(axis=(1, 2)), cfg.vector_len, fps_millihz)))
    return out


def format_roi_line(roi: Roi) -> str:
    x0, y0, x1, y1 = roi.bbox
    cx, cy = roi.centroid
    return f"roi {roi.id} bbox {x0} {y0} {x1} {y1} centroid {cx:.3f} {cy:.3f}"
