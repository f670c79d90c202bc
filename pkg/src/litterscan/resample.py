"""Lanczos3 band alignment onto the finest grid.

Conventions (these make constant images constant and keep the grids
concentric):
  * pixel-center mapping src = (dst + 0.5) / scale - 0.5
  * border handling: source indices clamped to the valid range
  * the six kernel taps of each output sample are divided by their sum
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .raster_io import Band, BandStack, atomic_write_bytes

SUPPORTED_SCALES = (1, 2, 3, 6)


def lanczos3_kernel(x: float) -> float:
    """sinc(x) * sinc(x/3) for |x| < 3, else 0."""
    if not math.isfinite(x):
        raise ValueError("kernel argument must be finite")
    ax = abs(x)
    if ax >= 3.0:
        return 0.0
    if ax == 0.0:
        return 1.0
    px = math.pi * x
    return 3.0 * math.sin(px) * math.sin(px / 3.0) / (px * px)


def _axis_taps(n_src: int, scale: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-output-sample clamped source indices (n_dst, 6) and normalized
    weights (n_dst, 6) for one axis."""
    n_dst = n_src * scale
    dst = np.arange(n_dst, dtype=np.float64)
    src = (dst + 0.5) / scale - 0.5
    base = np.floor(src).astype(np.int64)
    offsets = np.arange(-2, 4, dtype=np.int64)  # 6 taps covering |x| < 3
    idx = base[:, None] + offsets[None, :]
    x = src[:, None] - idx
    w = np.vectorize(lanczos3_kernel)(x)
    w /= w.sum(axis=1, keepdims=True)
    return np.clip(idx, 0, n_src - 1), w


def _resample_axis0(img: np.ndarray, scale: int) -> np.ndarray:
    idx, w = _axis_taps(img.shape[0], scale)
    out = np.zeros((idx.shape[0], img.shape[1]), dtype=np.float64)
    for k in range(idx.shape[1]):
        out += w[:, k:k + 1] * img[idx[:, k], :]
    return out


def resample_band(band: Band | np.ndarray, scale: int) -> np.ndarray:
    """Upscale a grid by an integer factor with separable Lanczos3."""
    if scale not in SUPPORTED_SCALES:
        raise ValueError(f"unsupported scale {scale} (expected one of {SUPPORTED_SCALES})")
    img = band.pixels if isinstance(band, Band) else np.asarray(band)
    img = img.astype(np.float64)
    if scale == 1:
        return img.copy()
    out = _resample_axis0(img, scale)
    return _resample_axis0(out.T, scale).T


@dataclass(frozen=True)
class AlignedCube:
    """All bands on one grid; per-pixel feature vectors in canonical band order."""

    band_ids: tuple[str, ...]
    values: np.ndarray  # (rows, cols, n_bands) float64

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if v.ndim != 3 or v.size == 0:
            raise ValueError("cube values must be (rows, cols, n_bands)")
        if v.shape[2] != len(self.band_ids):
            raise ValueError("band_ids length does not match value planes")
        if not np.isfinite(v).all():
            raise ValueError("cube values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "band_ids", tuple(self.band_ids))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def n_bands(self) -> int:
        return self.values.shape[2]

    def plane(self, band_id: str) -> np.ndarray:
        try:
            return self.values[:, :, self.band_ids.index(band_id)]
        except ValueError:
            raise ValueError(f"cube has no band {band_id!r}") from None


def align_stack(stack: BandStack) -> AlignedCube:
    """Resample every band to the finest grid present in the stack."""
    finest = min(b.spec.native_gsd_m for b in stack.bands)
    planes, ids = [], []
    for b in stack.bands:  # already canonical order
        ratio = b.spec.native_gsd_m / finest
        scale = int(round(ratio))
        if abs(ratio - scale) > 1e-9 or scale not in SUPPORTED_SCALES:
            raise ValueError(f"band {b.spec.id}: grid ratio {ratio} unsupported")
        planes.append(resample_band(b, scale))
        ids.append(b.spec.id)
    return AlignedCube(tuple(ids), np.stack(planes, axis=-1))


# ---------------------------------------------------------------------------
# cube container: f32le payload (row-major, band-interleaved) + JSON manifest

def save_cube(cube: AlignedCube, manifest_path: str | os.PathLike) -> None:
    manifest_path = os.fspath(manifest_path)
    base = os.path.dirname(manifest_path)
    fname = os.path.splitext(os.path.basename(manifest_path))[0] + ".f32"
    atomic_write_bytes(os.path.join(base, fname),
                       cube.values.astype("<f4").tobytes())
    doc = {
        "rows": cube.rows, "cols": cube.cols,
        "bands": list(cube.band_ids), "dtype": "f32le", "file": fname,
    }
    atomic_write_bytes(manifest_path, json.dumps(doc, indent=2).encode())


def load_cube(manifest_path: str | os.PathLike) -> AlignedCube:
    manifest_path = os.fspath(manifest_path)
    with open(manifest_path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    rows, cols = int(doc["rows"]), int(doc["cols"])
    ids = tuple(doc["bands"])
    data = np.fromfile(os.path.join(os.path.dirname(manifest_path), doc["file"]),
                       dtype="<f4")
    n = rows * cols * len(ids)
    if data.size != n:
        raise ValueError(f"cube payload has {data.size} samples, expected {n}")
    return AlignedCube(ids, data.astype(np.float64).reshape(rows, cols, len(ids)))
