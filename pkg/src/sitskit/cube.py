"""Multispectral image time series container.

A cube holds scaled reflectance values of shape [T, C, H, W] together with
a band map pointing semantic band names (B2 blue, B3 green, B4 red, B8 NIR,
B12 SWIR) at channel indices. Raw sensor digital numbers are clipped to
[0, 65535] and divided by ``reflectance_scale`` (10000 by default) on ingest.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .validation import check_band_map, check_cube_values

RAW_MAX = 65535.0
DEFAULT_SCALE = 10000.0

# Channel order used by the synthetic generator and assumed by the CLI when
# no band map is given.
DEFAULT_BAND_MAP = {"B2": 0, "B3": 1, "B4": 2, "B8": 3, "B12": 4}

TRUE_COLOR_BANDS = ("B4", "B3", "B2")  # R, G, B


@dataclass(frozen=True)
class SitsCube:
    """Satellite image time series: float32 reflectance [T, C, H, W]."""

    values: np.ndarray
    band_map: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_BAND_MAP))
    reflectance_scale: float = DEFAULT_SCALE

    def __post_init__(self):
        object.__setattr__(self, "values", check_cube_values(self.values))
        check_band_map(self.band_map, self.band_map.keys(), self.num_channels)

    @classmethod
    def from_digital_numbers(
        cls,
        raw: np.ndarray,
        band_map: Mapping[str, int] | None = None,
        scale: float = DEFAULT_SCALE,
    ) -> "SitsCube":
        """Clip raw digital numbers to [0, 65535] and scale to reflectance."""
        raw = np.clip(np.asarray(raw, dtype=np.float32), 0.0, RAW_MAX)
        values = (raw / np.float32(scale)).astype(np.float32)
        return cls(values, dict(band_map or DEFAULT_BAND_MAP), scale)

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]

    @property
    def num_channels(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[2]

    @property
    def width(self) -> int:
        return self.values.shape[3]

    def band(self, name: str) -> np.ndarray:
        """All frames of one semantic band, shape [T, H, W]."""
        check_band_map(self.band_map, [name], self.num_channels)
        return self.values[:, self.band_map[name]]

    def with_values(self, values: np.ndarray) -> "SitsCube":
        return replace(self, values=values)


def true_color(cube: SitsCube, frame: int) -> np.ndarray:
    """R, G, B reflectance planes of one frame, shape [3, H, W]."""
    check_band_map(cube.band_map, TRUE_COLOR_BANDS, cube.num_channels)
    idx = [cube.band_map[b] for b in TRUE_COLOR_BANDS]
    return cube.values[frame, idx]


def frame_grayscale(cube: SitsCube, frame: int) -> np.ndarray:
    """Mean of the [0, 1]-clipped true-color planes, shape [H, W]."""
    return np.clip(true_color(cube, frame), 0.0, 1.0).mean(axis=0)
