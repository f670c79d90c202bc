"""Normalized-difference index maps, the floating-debris index, and
threshold masks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bands import SENTINEL2_BANDS
from .raster_io import LabelMask
from .resample import AlignedCube

# 10 * (lambda_B8 - lambda_B4) / (lambda_B11 - lambda_B4), center wavelengths
# 842 / 665 / 1610 nm.
FDI_WAVELENGTH_FACTOR = 10.0 * (
    (SENTINEL2_BANDS["B8"].wavelength_nm - SENTINEL2_BANDS["B4"].wavelength_nm)
    / (SENTINEL2_BANDS["B11"].wavelength_nm - SENTINEL2_BANDS["B4"].wavelength_nm)
)


@dataclass(frozen=True)
class IndexMap:
    values: np.ndarray  # (rows, cols) float64, finite

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if v.ndim != 2 or v.size == 0:
            raise ValueError("index map must be a non-empty 2-D grid")
        if not np.isfinite(v).all():
            raise ValueError("index map values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def normalized_difference(a, b):
    """(a - b) / (a + b) elementwise; 0 where a + b = 0 so all-dark pixels
    stay neutral instead of going NaN."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValueError("inputs must be finite")
    if (a < 0).any() or (b < 0).any():
        raise ValueError("inputs must be nonnegative")
    s = a + b
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(s == 0, 0.0, (a - b) / np.where(s == 0, 1.0, s))
    if out.ndim == 0:
        return float(out)
    return out


def b8b9_index(cube: AlignedCube) -> IndexMap:
    """(B8 - B9) / (B8 + B9)."""
    return IndexMap(normalized_difference(cube.plane("B8"), cube.plane("B9")))


def ndvi(cube: AlignedCube) -> IndexMap:
    """(B8 - B4) / (B8 + B4): NIR vs red, high over vegetation."""
    return IndexMap(normalized_difference(cube.plane("B8"), cube.plane("B4")))


def fdi(cube: AlignedCube) -> IndexMap:
    """NIR departure from the red-edge -> SWIR baseline:
    B8 - (B6 + (B11 - B6) * FDI_WAVELENGTH_FACTOR)."""
    b6, b8, b11 = cube.plane("B6"), cube.plane("B8"), cube.plane("B11")
    baseline = b6 + (b11 - b6) * FDI_WAVELENGTH_FACTOR
    return IndexMap(b8 - baseline)


def threshold_map(index_map: IndexMap, t: float) -> LabelMask:
    """1 where value >= t."""
    if not np.isfinite(t):
        raise ValueError("threshold must be finite")
    return LabelMask((index_map.values >= t).astype(np.uint8))


def combined_index_mask(cube: AlignedCube, ndvi_max: float, fdi_min: float) -> LabelMask:
    """1 where FDI >= fdi_min and NDVI <= ndvi_max: debris is FDI-bright and
    not vegetation."""
    if not (np.isfinite(ndvi_max) and np.isfinite(fdi_min)):
        raise ValueError("thresholds must be finite")
    hit = (fdi(cube).values >= fdi_min) & (ndvi(cube).values <= ndvi_max)
    return LabelMask(hit.astype(np.uint8))
