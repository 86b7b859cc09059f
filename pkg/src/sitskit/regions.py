"""Region priors: flattening binary masks into one labeled partition.

A region map is an int32 label image where id 0 marks pixels covered by no
mask and ids 1..R are regions in descending area order of their source masks
(id 1 came from the largest mask). Overlaps are resolved by painting masks
largest-first so that smaller masks win, which preserves fine nested
structures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .composite import FusedRgb
from .errors import ValidationError

BACKGROUND_ID = 0
QUANT_LEVELS = 8
MIN_REGION_PIXELS = 2


@dataclass(frozen=True)
class RegionMap:
    """Integer partition of an image into prior regions."""

    labels: np.ndarray  # int32 [H, W]
    region_ids: tuple[int, ...]
    background_id: int = BACKGROUND_ID

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def num_regions(self) -> int:
        return len(self.region_ids)


@dataclass(frozen=True)
class RegionPixels:
    region_id: int
    coords: np.ndarray  # [n, 2] (row, col)
    skippable: bool     # fewer than 2 pixels


def _as_region_map(labels: np.ndarray) -> RegionMap:
    labels = np.asarray(labels, dtype=np.int32)
    ids = tuple(int(v) for v in np.unique(labels))
    return RegionMap(labels, ids)


def build_region_map(masks: Sequence[np.ndarray], shape: tuple[int, int] | None = None) -> RegionMap:
    """Flatten binary masks into one label image.

    Masks are sorted by pixel area descending (ties keep their original
    order) and painted in that order, so smaller masks overwrite larger ones
    where they overlap. Ids are relabeled to be contiguous afterwards; the
    ordering by source-mask area survives relabeling. ``shape`` is required
    when the mask list is empty (everything becomes background).
    """
    if not len(masks):
        if shape is None:
            raise ValidationError("an empty mask list needs an explicit shape")
        return RegionMap(np.zeros(shape, dtype=np.int32), (BACKGROUND_ID,))
    arrs = [np.asarray(m).astype(bool) for m in masks]
    shape = shape or arrs[0].shape
    for i, m in enumerate(arrs):
        if m.shape != tuple(shape):
            raise ValidationError(f"mask {i} has shape {m.shape}, expected {tuple(shape)}")

    areas = [int(m.sum()) for m in arrs]
    order = sorted(range(len(arrs)), key=lambda i: (-areas[i], i))

    painted = np.zeros(shape, dtype=np.int32)
    for rank, i in enumerate(order, start=1):
        painted[arrs[i]] = rank

    # Relabel contiguous, preserving paint order among surviving ids.
    survivors = np.unique(painted)
    survivors = survivors[survivors != BACKGROUND_ID]
    lut = np.zeros(len(arrs) + 1, dtype=np.int32)
    lut[survivors] = np.arange(1, len(survivors) + 1, dtype=np.int32)
    labels = lut[painted]
    ids = (BACKGROUND_ID,) if labels.size and (labels == BACKGROUND_ID).any() else ()
    ids = ids + tuple(range(1, len(survivors) + 1))
    return RegionMap(labels, ids)


def region_map_from_labels(labels: np.ndarray) -> RegionMap:
    """Wrap an existing label image without relabeling."""
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValidationError(f"label image must be 2-dimensional, got {labels.shape}")
    return _as_region_map(labels)


def _nearest_indices(n_out: int, n_in: int) -> np.ndarray:
    # Source index for output cell i is floor((i + 0.5) * n_in / n_out).
    idx = np.floor((np.arange(n_out) + 0.5) * n_in / n_out).astype(np.int64)
    return np.clip(idx, 0, n_in - 1)


def resize_nearest(region_map: RegionMap, height: int, width: int) -> RegionMap:
    """Nearest-neighbor resample of the label image."""
    if height < 1 or width < 1:
        raise ValidationError("target extents must be >= 1")
    rows = _nearest_indices(height, region_map.height)
    cols = _nearest_indices(width, region_map.width)
    labels = region_map.labels[np.ix_(rows, cols)]
    return RegionMap(labels, tuple(int(v) for v in np.unique(labels)),
                     region_map.background_id)


def fallback_regions(rgb, grid: int, levels: int = QUANT_LEVELS) -> RegionMap:
    """Deterministic SAM-free region source: quantized grid superpixels.

    Grayscale is averaged over grid-aligned cells, quantized into ``levels``
    bins over [0, 1], and 4-connected components of equal-bin cells become
    regions. Also serves as the non-semantic control prior for ablations.
    """
    if grid < 1:
        raise ValidationError("grid cell size must be >= 1")
    values = rgb.values if isinstance(rgb, FusedRgb) else np.asarray(rgb)
    gray = np.clip(values, 0.0, 1.0).mean(axis=0) if values.ndim == 3 else np.clip(values, 0.0, 1.0)
    h, w = gray.shape

    ch = (h + grid - 1) // grid
    cw = (w + grid - 1) // grid
    row_cell = np.arange(h) // grid
    col_cell = np.arange(w) // grid
    cell_idx = (row_cell[:, None] * cw + col_cell[None, :]).ravel()
    sums = np.bincount(cell_idx, weights=gray.astype(np.float64).ravel(), minlength=ch * cw)
    counts = np.bincount(cell_idx, minlength=ch * cw)
    cells = (sums / counts).reshape(ch, cw)
    quant = np.minimum((cells * levels).astype(np.int32), levels - 1)

    # 4-connected components per quantization level, in ascending level order.
    masks: list[np.ndarray] = []
    for level in np.unique(quant):
        comp, n = ndimage.label(quant == level)
        for c in range(1, n + 1):
            cell_mask = comp == c
            masks.append(cell_mask[np.ix_(row_cell, col_cell)])
    return build_region_map(masks)


def region_index(region_map: RegionMap) -> list[RegionPixels]:
    """Pixel coordinates per region id, flagging regions below 2 pixels."""
    labels = region_map.labels
    out = []
    for rid in np.unique(labels):
        coords = np.argwhere(labels == rid)
        out.append(RegionPixels(int(rid), coords, len(coords) < MIN_REGION_PIXELS))
    return out
