"""Seeded synthetic two-class scene generator, used by tests and the
tutorial because the original imagery is not distributed.

Two spectral classes on 13 bands: per band the class means sit 5 within-
class standard deviations apart (sigma = 60 DN), so a per-pixel classifier
should separate them almost perfectly.
"""

from __future__ import annotations

import numpy as np

from .bands import CANONICAL_ORDER
from .raster_io import LabelMask
from .resample import AlignedCube
from .rng import SplitMix64

SIGMA = 60.0
MEAN_SEPARATION = 5.0 * SIGMA  # >= 4 sigma, per band


def class_means() -> tuple[np.ndarray, np.ndarray]:
    """(background, plastic) per-band mean digital numbers."""
    background = 800.0 + 120.0 * np.arange(13)
    sign = np.where(np.arange(13) % 2 == 0, 1.0, -1.0)
    return background, background + sign * MEAN_SEPARATION


def plastic_mask(rows: int, cols: int, plastic_frac: float) -> LabelMask:
    """Centered rectangular patch covering round(frac * rows * cols) pixels."""
    n = rows * cols
    k = int(round(plastic_frac * n))
    if not 0 < k < n:
        raise ValueError("plastic fraction leaves no pixels for one class")
    h = min(rows, max(1, int(round((k * rows / cols) ** 0.5))))
    w = min(cols, -(-k // h))  # ceil, so h*w >= k when it fits
    while h * w < k:
        h = min(rows, h + 1)
    r0 = (rows - h) // 2
    c0 = (cols - w) // 2
    labels = np.zeros((rows, cols), dtype=np.uint8)
    flat = [(r0 + i // w, c0 + i % w) for i in range(k)]
    rr, cc = zip(*flat)
    labels[list(rr), list(cc)] = 1
    return LabelMask(labels)


def make_scene(rows: int = 100, cols: int = 100, plastic_frac: float = 0.15,
               seed: int = 0) -> tuple[AlignedCube, LabelMask]:
    """Gaussian per-band values around the class mean of each pixel."""
    mask = plastic_mask(rows, cols, plastic_frac)
    mean_bg, mean_pl = class_means()
    rng = SplitMix64(seed)
    values = np.empty((rows, cols, 13), dtype=np.float64)
    lb = mask.labels
    for r in range(rows):
        for c in range(cols):
            mu = mean_pl if lb[r, c] else mean_bg
            for b in range(13):
                values[r, c, b] = mu[b] + SIGMA * rng.normal()
    return AlignedCube(CANONICAL_ORDER, values), mask
