"""Cloud-free composites and sharpness-weighted RGB fusion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clouds import FrameQuality
from .cube import SitsCube, true_color
from .errors import ValidationError
from .validation import check_frames

WEIGHT_FLOOR = 1e-6
STRETCH_MODES = ("percentile", "minmax", "off")
DEFAULT_PERCENTILES = (2.0, 98.0)


@dataclass(frozen=True)
class FusedRgb:
    """Weighted blend of clear-frame RGB, values in [0, 1], shape [3, H, W]."""

    values: np.ndarray
    source_frames: tuple[int, ...]
    weights: np.ndarray  # nonnegative, sums to 1 over source_frames


def composite_mean(cube: SitsCube, frames) -> np.ndarray:
    """Pixel-wise mean over the given frames, all bands, shape [C, H, W].

    Accumulates in float64 so a list of identical frames reproduces the
    frame exactly.
    """
    frames = check_frames(frames, cube.num_frames)
    return cube.values[frames].astype(np.float64).mean(axis=0).astype(np.float32)


def composite_median(cube: SitsCube, frames) -> np.ndarray:
    """Pixel-wise median over the given frames; even counts average the middle two."""
    frames = check_frames(frames, cube.num_frames)
    return np.median(cube.values[frames], axis=0)


def stretch_to_unit(channel: np.ndarray, mode: str = "percentile",
                    percentiles=DEFAULT_PERCENTILES) -> np.ndarray:
    """Map one channel into [0, 1]; a degenerate range maps to all zeros."""
    if mode not in STRETCH_MODES:
        raise ValidationError(f"unknown stretch mode {mode!r}; expected one of {STRETCH_MODES}")
    channel = np.asarray(channel, dtype=np.float32)
    if mode == "off":
        return np.clip(channel, 0.0, 1.0)
    if mode == "percentile":
        lo, hi = np.percentile(channel, percentiles)
    else:
        lo, hi = channel.min(), channel.max()
    if hi <= lo:
        return np.zeros_like(channel)
    return np.clip((channel - lo) / (hi - lo), 0.0, 1.0).astype(np.float32)


def fuse_rgb(cube: SitsCube, fq: FrameQuality, *, stretch: str = "percentile",
             percentiles=DEFAULT_PERCENTILES) -> FusedRgb:
    """Blend the clear frames' stretched RGB with sharpness weights.

    Each clear frame's true-color planes are stretched to [0, 1] per channel,
    then combined as sum_t w_t * rgb_t with w_t proportional to
    max(sharpness[t], 1e-6) and normalized to sum 1.
    """
    frames = sorted(fq.clear_set)
    stretched = np.stack([
        np.stack([stretch_to_unit(ch, stretch, percentiles) for ch in true_color(cube, t)])
        for t in frames
    ])
    raw_w = np.maximum(fq.sharpness[frames].astype(np.float64), WEIGHT_FLOOR)
    weights = raw_w / raw_w.sum()
    fused = np.einsum("t,tchw->chw", weights, stretched.astype(np.float64))
    values = np.clip(fused, 0.0, 1.0).astype(np.float32)
    return FusedRgb(values, tuple(frames), weights.astype(np.float32))


def to_uint8(rgb) -> np.ndarray:
    """Scale [0, 1] RGB to bytes, rounding half away from zero, clipping to [0, 255]."""
    values = rgb.values if isinstance(rgb, FusedRgb) else np.asarray(rgb)
    scaled = values.astype(np.float64) * 255.0
    rounded = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    return np.clip(rounded, 0.0, 255.0).astype(np.uint8)
