"""Per-frame cloud screening and clear-frame selection.

A pixel counts as cloudy when four spectral conditions hold at once: bright
blue (B2 > 0.2), bright NIR (B8 > 0.3), bright SWIR (B12 > 0.2), and not
water (NDWI < 0.9). NDWI is the McFeeters water index
(B3 - B8) / (B3 + B8 + eps). Frames are then scored by

    score = -10 * cloud_ratio + brightness + sharpness

and the clear set keeps frames with cloud ratio below 0.8, falling back to
the least-cloudy frame when everything is contaminated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .cube import SitsCube, frame_grayscale
from .validation import check_band_map

B2_MIN = 0.2
B8_MIN = 0.3
B12_MIN = 0.2
NDWI_MAX = 0.9
NDWI_EPS = 1e-8

CLEAR_RATIO_MAX = 0.8
CLOUD_SCORE_WEIGHT = -10.0

LAPLACIAN = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])


@dataclass(frozen=True)
class FrameQuality:
    """Per-frame screening results over one cube."""

    cloud_ratio: np.ndarray  # [T] in [0, 1]
    brightness: np.ndarray   # [T]
    sharpness: np.ndarray    # [T], min-max normalized to [0, 1]
    score: np.ndarray        # [T]
    clear_set: tuple[int, ...]
    best_frame: int


def cloud_mask(frame: np.ndarray, band_map, *, ndwi_bands=("B3", "B8")) -> np.ndarray:
    """Binary cloud mask for one [C, H, W] frame.

    Flags a pixel iff B2 > 0.2, B8 > 0.3, B12 > 0.2 and NDWI < 0.9 all hold.
    """
    frame = np.asarray(frame)
    green_name, nir_name = ndwi_bands
    check_band_map(band_map, {"B2", "B8", "B12", green_name, nir_name}, frame.shape[0])
    b2 = frame[band_map["B2"]]
    b8 = frame[band_map["B8"]]
    b12 = frame[band_map["B12"]]
    green = frame[band_map[green_name]]
    nir = frame[band_map[nir_name]]
    ndwi = (green - nir) / (green + nir + NDWI_EPS)
    return (b2 > B2_MIN) & (b8 > B8_MIN) & (b12 > B12_MIN) & (ndwi < NDWI_MAX)


def cloud_masks(cube: SitsCube) -> np.ndarray:
    """Cloud masks for every frame, shape [T, H, W] bool."""
    return np.stack([cloud_mask(cube.values[t], cube.band_map) for t in range(cube.num_frames)])


def _laplacian_variance(gray: np.ndarray) -> float:
    # Replicate-padded 3x3 Laplacian response, population variance.
    response = ndimage.convolve(gray.astype(np.float64), LAPLACIAN, mode="nearest")
    return float(np.var(response))


def frame_quality(cube: SitsCube) -> FrameQuality:
    """Screen every frame of a cube and pick the best clear frame.

    Brightness is the mean of the [0, 1]-clipped true-color composite.
    Sharpness is the variance of a replicate-padded 3x3 Laplacian of the
    grayscale, min-max normalized across frames (all zeros when frames tie).
    Ties in the best-frame argmax go to the lowest index.
    """
    T = cube.num_frames
    ratio = np.empty(T, dtype=np.float32)
    brightness = np.empty(T, dtype=np.float32)
    raw_sharp = np.empty(T, dtype=np.float64)
    for t in range(T):
        ratio[t] = cloud_mask(cube.values[t], cube.band_map).mean()
        gray = frame_grayscale(cube, t)
        brightness[t] = gray.mean()
        raw_sharp[t] = _laplacian_variance(gray)

    span = raw_sharp.max() - raw_sharp.min()
    if span > 0:
        sharpness = ((raw_sharp - raw_sharp.min()) / span).astype(np.float32)
    else:
        sharpness = np.zeros(T, dtype=np.float32)

    score = (CLOUD_SCORE_WEIGHT * ratio + brightness + sharpness).astype(np.float32)
    clear = tuple(int(t) for t in np.flatnonzero(ratio < CLEAR_RATIO_MAX))
    if not clear:
        clear = (int(np.argmin(ratio)),)
    best = clear[int(np.argmax(score[list(clear)]))]
    return FrameQuality(ratio, brightness, sharpness, score, clear, best)


def select_clear_frames(fq: FrameQuality) -> list[int]:
    """Clear frames in ascending order (never empty for T >= 1)."""
    return sorted(fq.clear_set)
