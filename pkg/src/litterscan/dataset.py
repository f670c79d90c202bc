"""Labeled per-pixel samples: extraction, class balancing, 70/15/15 split,
min-max input normalization.

All randomness flows through the SplitMix64 generator so a given seed
reproduces the exact same splits and subsets.

SampleSet container format (binary): one ASCII header line
``LSET1 <count> <n_features> <id,id,...>\\n`` followed by ``count`` records
of 13 little-endian 32-bit floats plus one label byte.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .raster_io import LabelMask, atomic_write_bytes
from .resample import AlignedCube
from .rng import SplitMix64

N_FEATURES = 13
MLP_WEIGHT_COUNT = 151  # 14*10 + 11, fixed by the 13-10-1 network shape
MIN_SAMPLES_PER_WEIGHT = 15


@dataclass(frozen=True)
class SampleSet:
    features: np.ndarray  # (n, 13) float64
    labels: np.ndarray    # (n,) uint8 of {0, 1}
    band_order: tuple[str, ...]

    def __post_init__(self):
        f = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        lb = np.ascontiguousarray(np.asarray(self.labels, dtype=np.uint8))
        if f.ndim != 2 or f.shape[1] != N_FEATURES:
            raise ValueError(f"features must be (n, {N_FEATURES})")
        if lb.shape != (f.shape[0],):
            raise ValueError("labels length must match features")
        if not np.isin(lb, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if not np.isfinite(f).all():
            raise ValueError("features must be finite")
        if len(self.band_order) != N_FEATURES:
            raise ValueError(f"band_order must list {N_FEATURES} bands")
        f.setflags(write=False)
        lb.setflags(write=False)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", lb)
        object.__setattr__(self, "band_order", tuple(self.band_order))

    def __len__(self) -> int:
        return self.features.shape[0]

    def take(self, indices) -> "SampleSet":
        idx = np.asarray(indices, dtype=np.int64)
        return SampleSet(self.features[idx], self.labels[idx], self.band_order)


@dataclass(frozen=True)
class Normalizer:
    """Per-band min/max from the training split; maps values to [-1, 1]."""

    minimum: np.ndarray  # (13,)
    maximum: np.ndarray  # (13,)

    def __post_init__(self):
        lo = np.ascontiguousarray(np.asarray(self.minimum, dtype=np.float64))
        hi = np.ascontiguousarray(np.asarray(self.maximum, dtype=np.float64))
        if lo.shape != (N_FEATURES,) or hi.shape != (N_FEATURES,):
            raise ValueError(f"normalizer needs {N_FEATURES} min/max pairs")
        if not (lo < hi).all():
            bad = [i for i in range(N_FEATURES) if lo[i] >= hi[i]]
            raise ValueError(f"degenerate band(s) at index {bad}: min >= max")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.70
    val_frac: float = 0.15
    test_frac: float = 0.15
    seed: int = 0

    def __post_init__(self):
        for f in (self.train_frac, self.val_frac, self.test_frac):
            if not 0.0 < f < 1.0:
                raise ValueError("split fractions must be in (0, 1)")
        if abs(self.train_frac + self.val_frac + self.test_frac - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")


def extract_samples(cube: AlignedCube, mask: LabelMask) -> SampleSet:
    """One sample per pixel: 13 band values + mask label."""
    if (mask.rows, mask.cols) != (cube.rows, cube.cols):
        raise ValueError(
            f"mask {mask.rows}x{mask.cols} does not match cube {cube.rows}x{cube.cols}"
        )
    if cube.n_bands != N_FEATURES:
        raise ValueError(f"cube has {cube.n_bands} bands, need {N_FEATURES}")
    feats = cube.values.reshape(-1, N_FEATURES)
    return SampleSet(feats, mask.labels.reshape(-1), cube.band_ids)


def balance(samples: SampleSet, seed: int) -> SampleSet:
    """Undersample the majority class to the minority count.

    The majority subset is the first k entries of a seeded Fisher-Yates
    shuffle of the majority indices; the kept indices are then emitted in
    their original order.
    """
    idx0 = np.flatnonzero(samples.labels == 0)
    idx1 = np.flatnonzero(samples.labels == 1)
    if idx0.size == 0 or idx1.size == 0:
        raise ValueError("both classes must be present to balance")
    minority, majority = (idx0, idx1) if idx0.size <= idx1.size else (idx1, idx0)
    rng = SplitMix64(seed)
    chosen = rng.sample_without_replacement(majority.tolist(), minority.size)
    keep = np.sort(np.concatenate([minority, np.asarray(chosen, dtype=np.int64)]))
    return samples.take(keep)


def split(samples: SampleSet, spec: SplitSpec) -> tuple[SampleSet, SampleSet, SampleSet]:
    """Seeded shuffle then contiguous partition; sizes floor(n*train),
    floor(n*val), remainder to test."""
    n = len(samples)
    if n == 0:
        raise ValueError("cannot split an empty sample set")
    perm = SplitMix64(spec.seed).permutation(n)
    n_train = int(n * spec.train_frac)
    n_val = int(n * spec.val_frac)
    p = np.asarray(perm, dtype=np.int64)
    return (
        samples.take(p[:n_train]),
        samples.take(p[n_train:n_train + n_val]),
        samples.take(p[n_train + n_val:]),
    )


def fit_normalizer(train: SampleSet) -> Normalizer:
    if len(train) == 0:
        raise ValueError("cannot fit a normalizer on an empty set")
    return Normalizer(train.features.min(axis=0), train.features.max(axis=0))


def apply_normalizer(norm: Normalizer, v: np.ndarray) -> np.ndarray:
    """2*(x - min)/(max - min) - 1 per component; no clamping, so values
    outside the training range land outside [-1, 1]."""
    v = np.asarray(v, dtype=np.float64)
    return 2.0 * (v - norm.minimum) / (norm.maximum - norm.minimum) - 1.0


def normalize_set(norm: Normalizer, samples: SampleSet) -> SampleSet:
    return SampleSet(apply_normalizer(norm, samples.features), samples.labels,
                     samples.band_order)


def dataset_report(samples: SampleSet) -> dict:
    n = len(samples)
    n_pos = int(samples.labels.sum())
    spw = n / MLP_WEIGHT_COUNT
    return {
        "n_samples": n,
        "n_negative": n - n_pos,
        "n_positive": n_pos,
        "n_weights": MLP_WEIGHT_COUNT,
        "samples_per_weight": spw,
        "samples_per_weight_ok": spw > MIN_SAMPLES_PER_WEIGHT,
    }


# ---------------------------------------------------------------------------
# container

def save_samples(samples: SampleSet, path: str | os.PathLike) -> None:
    header = "LSET1 {} {} {}\n".format(
        len(samples), N_FEATURES, ",".join(samples.band_order)
    ).encode("ascii")
    feats = samples.features.astype("<f4")
    body = bytearray()
    for i in range(len(samples)):
        body += feats[i].tobytes()
        body.append(int(samples.labels[i]))
    atomic_write_bytes(path, header + bytes(body))


def load_samples(path: str | os.PathLike) -> SampleSet:
    with open(path, "rb") as f:
        header = f.readline().decode("ascii")
        parts = header.split()
        if len(parts) != 4 or parts[0] != "LSET1":
            raise ValueError(f"bad sample container header: {header!r}")
        count, n_feat = int(parts[1]), int(parts[2])
        band_order = tuple(parts[3].split(","))
        if n_feat != N_FEATURES:
            raise ValueError(f"sample container has {n_feat} features")
        record = np.dtype([("f", "<f4", (N_FEATURES,)), ("y", "u1")])
        data = np.frombuffer(f.read(), dtype=record)
        if data.size != count:
            raise ValueError(f"sample container has {data.size} records, expected {count}")
    return SampleSet(data["f"].astype(np.float64), data["y"], band_order)
