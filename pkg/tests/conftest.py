import math

import numpy as np
import pytest

from litterscan.bands import CANONICAL_ORDER, canonical_spec
from litterscan.raster_io import Band
from litterscan.resample import AlignedCube


def make_cube(planes: dict[str, np.ndarray]) -> AlignedCube:
    """Cube from {band id: 2-D grid}, canonical band order."""
    ids = [b for b in CANONICAL_ORDER if b in planes]
    return AlignedCube(tuple(ids), np.stack([planes[b] for b in ids], axis=-1))


def make_band(band_id: str, pixels) -> Band:
    return Band(canonical_spec(band_id), np.asarray(pixels, dtype=np.uint16))


def oracle_lanczos3(x: float) -> float:
    """Scalar kernel, written independently of the package."""
    if abs(x) >= 3.0:
        return 0.0
    if x == 0.0:
        return 1.0
    return (math.sin(math.pi * x) / (math.pi * x)) * (
        math.sin(math.pi * x / 3.0) / (math.pi * x / 3.0)
    )


def oracle_resample(img: np.ndarray, scale: int) -> np.ndarray:
    """Brute-force scalar loops: same pixel-center mapping, clamped borders,
    per-sample normalization."""
    img = np.asarray(img, dtype=np.float64)
    rows, cols = img.shape
    out = np.zeros((rows * scale, cols * scale))
    for i in range(rows * scale):
        sy = (i + 0.5) / scale - 0.5
        by = math.floor(sy)
        for j in range(cols * scale):
            sx = (j + 0.5) / scale - 0.5
            bx = math.floor(sx)
            acc = wsum = 0.0
            for ky in range(by - 2, by + 4):
                wy = oracle_lanczos3(sy - ky)
                for kx in range(bx - 2, bx + 4):
                    w = wy * oracle_lanczos3(sx - kx)
                    acc += w * img[min(max(ky, 0), rows - 1), min(max(kx, 0), cols - 1)]
                    wsum += w
            out[i, j] = acc / wsum
    return out


@pytest.fixture
def full_band_order():
    return CANONICAL_ORDER
