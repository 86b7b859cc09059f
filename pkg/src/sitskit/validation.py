"""Input validation helpers, sklearn-style check_* functions."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigurationError, ValidationError


def check_array(a, name: str, *, ndim: int | None = None, dtype=None) -> np.ndarray:
    out = np.asarray(a) if dtype is None else np.asarray(a, dtype=dtype)
    if ndim is not None and out.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {out.shape}")
    return out

def check_cube_values(values) -> np.ndarray:
    values = check_array(values, "cube values", ndim=4, dtype=np.float32)
    if values.shape[0] < 1:
        raise ValidationError("cube needs at least one frame")
    if not np.all(np.isfinite(values)):
        raise ValidationError("cube values must be finite")
    return values


def check_band_map(band_map: Mapping[str, int], required: Iterable[str], channels: int) -> None:
    for name in required:
        if name not in band_map:
            raise ConfigurationError(f"band map is missing {name}")
        idx = band_map[name]
        if not 0 <= idx < channels:
            raise ConfigurationError(
                f"band {name} maps to channel {idx}, but the cube has {channels} channels"
            )


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise ValidationError(f"{what}: shapes {a.shape} and {b.shape} differ")


def check_frames(frames: Iterable[int], num_frames: int) -> list[int]:
    frames = list(frames)
    if not frames:
        raise ValidationError("frame list is empty")
    for t in frames:
        if not 0 <= t < num_frames:
            raise ValidationError(f"frame index {t} outside [0, {num_frames})")
    return frames


def check_labels(labels, num_classes: int, ignore_id: int | None = None) -> np.ndarray:
    labels = np.asarray(labels)
    if not np.issubdtype(labels.dtype, np.integer):
        raise ValidationError(f"labels must be integer-typed, got {labels.dtype}")
    ok = (labels >= 0) & (labels < num_classes)
    if ignore_id is not None:
        ok |= labels == ignore_id
    if not np.all(ok):
        bad = labels[~ok].ravel()[0]
        raise ValidationError(f"label value {bad} outside [0, {num_classes}) and not ignored")
    return labels
