"""Few-shot data machinery: label splits, augmentations, normalization,
and a synthetic time-series generator for end-to-end testing.

All randomness is drawn from the documented SplitMix64 streams so every
operation is a pure function of its explicit seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .clouds import cloud_mask
from .cube import DEFAULT_BAND_MAP, SitsCube
from .errors import ValidationError
from .regions import RegionMap, build_region_map
from .rng import SplitMix64
from .validation import check_array

STD_FLOOR = 1e-6


@dataclass(frozen=True)
class SplitSpec:
    """A deterministic subset of training items."""

    ratio: float
    seed: int
    population: int
    selected: tuple[int, ...]  # sorted ascending


@dataclass(frozen=True)
class AugmentSpec:
    crop: int = 64
    temporal_drop_range: tuple[float, float] = (0.1, 0.3)
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.temporal_drop_range
        if not 0.0 <= lo <= hi < 1.0:
            raise ValidationError(f"drop range must satisfy 0 <= lo <= hi < 1, got {lo}, {hi}")


def _split_size(ratio: float, population: int) -> int:
    # round-half-up so the count is implementation independent
    return max(1, int(np.floor(ratio * population + 0.5)))


def sample_split(ratio: float, seed: int, population: int) -> SplitSpec:
    """Sample round(ratio * population) indices without replacement.

    Partial Fisher-Yates over 0..population-1 driven by SplitMix64(seed):
    at step i swap position i with i + (draw mod (population - i)); the
    first n positions are the selection, returned sorted.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValidationError(f"ratio must be in (0, 1], got {ratio}")
    if population < 1:
        raise ValidationError("population must be >= 1")
    n = _split_size(ratio, population)
    rng = SplitMix64(seed)
    pool = np.arange(population, dtype=np.int64)
    for i in range(n):
        j = i + rng.randrange(population - i)
        pool[i], pool[j] = pool[j], pool[i]
    return SplitSpec(ratio, seed, population, tuple(sorted(int(v) for v in pool[:n])))


def sample_split_stratified(ratio: float, seed: int, classes) -> SplitSpec:
    """Per-class variant: samples round(ratio * n_c) of each class (min 1).

    Classes are visited in ascending value order, each with its own derived
    Fisher-Yates stream, so the result is deterministic in (ratio, seed).
    """
    if not 0.0 < ratio <= 1.0:
        raise ValidationError(f"ratio must be in (0, 1], got {ratio}")
    classes = np.asarray(classes).ravel()
    if classes.size < 1:
        raise ValidationError("population must be >= 1")
    rng = SplitMix64(seed)
    chosen: list[int] = []
    for value in np.unique(classes):
        members = np.flatnonzero(classes == value)
        n = _split_size(ratio, len(members))
        pool = members.copy()
        for i in range(n):
            j = i + rng.randrange(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        chosen.extend(int(v) for v in pool[:n])
    return SplitSpec(ratio, seed, int(classes.size), tuple(sorted(chosen)))


def spatial_crop(cube: SitsCube, labels: np.ndarray, spec: AugmentSpec,
                 rng: SplitMix64):
    """Crop the same window from every frame, channel, and the label image."""
    labels = check_array(labels, "labels", ndim=2)
    h, w = cube.height, cube.width
    if spec.crop > min(h, w):
        raise ValidationError(f"crop {spec.crop} exceeds image extent {h}x{w}")
    oy = rng.randrange(h - spec.crop + 1)
    ox = rng.randrange(w - spec.crop + 1)
    window = np.s_[oy:oy + spec.crop, ox:ox + spec.crop]
    return (cube.with_values(cube.values[:, :, window[0], window[1]]),
            labels[window], (oy, ox))


def temporal_dropout(cube: SitsCube, spec: AugmentSpec, rng: SplitMix64,
                     quality=None):
    """Drop each frame independently with a rate drawn from the spec's range.

    Retained frames keep their order. If every frame is dropped, the frame
    with the lowest cloud ratio (frame 0 when no quality is given) is kept.
    """
    lo, hi = spec.temporal_drop_range
    rate = rng.uniform(lo, hi)
    draws = rng.uniform01_array(cube.num_frames)
    kept = [t for t in range(cube.num_frames) if draws[t] >= rate]
    if not kept:
        kept = [int(np.argmin(quality.cloud_ratio))] if quality is not None else [0]
    return cube.with_values(cube.values[kept]), tuple(kept)


class ChannelNormalizer(TransformerMixin, BaseEstimator):
    """Channel-wise standardization fitted on training cubes.

    Mean and standard deviation (population, floored at 1e-6) are computed
    per channel over all frames and pixels of the cubes passed to fit.
    """

    def fit(self, X, y=None):
        cubes = X if isinstance(X, (list, tuple)) else [X]
        if not cubes:
            raise ValidationError("need at least one cube to fit normalization")
        flats = [self._channel_view(c) for c in cubes]
        stacked = np.concatenate(flats, axis=1)
        self.mean_ = stacked.mean(axis=1).astype(np.float32)
        self.std_ = np.maximum(stacked.std(axis=1), STD_FLOOR).astype(np.float32)
        return self

    @staticmethod
    def _channel_view(cube) -> np.ndarray:
        values = cube.values if isinstance(cube, SitsCube) else check_array(cube, "cube", ndim=4)
        return values.astype(np.float64).transpose(1, 0, 2, 3).reshape(values.shape[1], -1)

    def _check_fitted(self):
        if not hasattr(self, "mean_"):
            raise NotFittedError("ChannelNormalizer is not fitted yet")

    def transform(self, X):
        self._check_fitted()
        values = X.values if isinstance(X, SitsCube) else np.asarray(X)
        out = (values - self.mean_[None, :, None, None]) / self.std_[None, :, None, None]
        out = out.astype(np.float32)
        return X.with_values(out) if isinstance(X, SitsCube) else out

    def inverse_transform(self, X):
        self._check_fitted()
        values = X.values if isinstance(X, SitsCube) else np.asarray(X)
        out = values * self.std_[None, :, None, None] + self.mean_[None, :, None, None]
        out = out.astype(np.float32)
        return X.with_values(out) if isinstance(X, SitsCube) else out


@dataclass(frozen=True)
class SynthSample:
    """Synthetic scene: cube, per-pixel classes, and the ideal region prior."""

    cube: SitsCube
    labels: np.ndarray       # int32 [H, W]
    regions: RegionMap       # connected components of the label image
    cloud_frames: tuple[int, ...]


def synth_sits(seed: int, t: int, c: int, h: int, w: int, k: int, *,
               noise: float = 0.05, cloud_rate: float = 0.25) -> SynthSample:
    """Generate a synthetic labeled time series with optional cloud blobs.

    The label image is a Voronoi partition of 3k random sites (site i gets
    class i mod k, so every class appears). Each (class, channel) pair has a
    sinusoidal temporal signal; the blue band stays below the cloud
    threshold so only injected cloud blobs (bright additive disks) trip the
    spectral cloud test. Gaussian noise with the given sigma is added last.
    """
    if k < 2:
        raise ValidationError("need at least 2 classes")
    if c < len(DEFAULT_BAND_MAP):
        raise ValidationError(f"need at least {len(DEFAULT_BAND_MAP)} channels for the band map")
    rng = SplitMix64(seed)

    sites_y = np.array([rng.randrange(h) for _ in range(3 * k)])
    sites_x = np.array([rng.randrange(w) for _ in range(3 * k)])
    site_class = np.arange(3 * k) % k
    yy, xx = np.mgrid[0:h, 0:w]
    d2 = (yy[None] - sites_y[:, None, None]) ** 2 + (xx[None] - sites_x[:, None, None]) ** 2
    labels = site_class[np.argmin(d2, axis=0)].astype(np.int32)

    # Per-(class, channel) sinusoid: base + amp * sin(2*pi*t/T + phase).
    blue = DEFAULT_BAND_MAP["B2"]
    base = np.empty((k, c))
    amp = np.empty((k, c))
    phase = np.empty((k, c))
    for cls in range(k):
        for ch in range(c):
            if ch == blue:
                base[cls, ch] = rng.uniform(0.03, 0.12)
                amp[cls, ch] = base[cls, ch] * rng.uniform(0.05, 0.2)
            else:
                base[cls, ch] = rng.uniform(0.05, 0.45)
                amp[cls, ch] = base[cls, ch] * rng.uniform(0.1, 0.5)
            phase[cls, ch] = rng.uniform(0.0, 2.0 * np.pi)

    steps = np.arange(t)[:, None, None]  # [T, 1(class), 1(channel)]
    signal = base[None] + amp[None] * np.sin(2.0 * np.pi * steps / t + phase[None])
    values = signal[:, labels, :].transpose(0, 3, 1, 2).copy()  # [T, C, H, W]

    cloudy: list[int] = []
    for frame in range(t):
        if rng.uniform01() < cloud_rate:
            cy, cx = rng.randrange(h), rng.randrange(w)
            radius = rng.uniform(min(h, w) / 6.0, min(h, w) / 3.0)
            lift = rng.uniform(0.5, 0.8)
            disk = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2
            values[frame, :, disk] += lift
            cloudy.append(frame)

    if noise > 0:
        values += rng.normal_array(values.size, noise).reshape(values.shape)
    values = np.maximum(values, 0.0).astype(np.float32)

    cube = SitsCube(values, dict(DEFAULT_BAND_MAP), 1.0)
    regions = _components_of(labels)
    return SynthSample(cube, labels, regions, tuple(cloudy))


def _components_of(labels: np.ndarray) -> RegionMap:
    """Ideal region prior: 4-connected components of the class image."""
    from scipy import ndimage

    masks = []
    for value in np.unique(labels):
        comp, n = ndimage.label(labels == value)
        for i in range(1, n + 1):
            masks.append(comp == i)
    return build_region_map(masks, labels.shape)
