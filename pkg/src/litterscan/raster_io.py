"""On-disk containers: band-stack manifest + raw band payloads, PGM masks,
float rasters.

Formats:
  * stack manifest -- JSON ``{"extent_m": ..., "bands": [{"id", "wavelength_nm",
    "native_gsd_m", "rows", "cols", "file", "dtype": "u16le"}]}``; each band
    payload is raw row-major unsigned 16-bit little-endian.
  * mask -- binary PGM (P5), maxval 255, 255 = plastic.
  * float raster -- raw row-major 32-bit little-endian floats, with a JSON
    sidecar ``{"rows": ..., "cols": ...}`` at ``<path>.json``.

All writes go to a temp file in the target directory and are renamed into
place, so a failed write never leaves a partial artifact.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .bands import BandSpec, canonical_index, canonical_spec


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class Band:
    """One band's pixel grid (unsigned 16-bit digital numbers)."""

    spec: BandSpec
    pixels: np.ndarray  # (rows, cols) uint16

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("pixels must be a non-empty 2-D grid")
        if px.dtype != np.uint16:
            if not np.issubdtype(px.dtype, np.integer):
                raise ValueError("pixels must be integers")
            if px.min() < 0 or px.max() > 0xFFFF:
                raise ValueError("pixel values must fit in 16 bits")
            px = px.astype(np.uint16)
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class BandStack:
    """Co-located bands over one square footprint, in canonical order."""

    bands: tuple[Band, ...]
    extent_m: float

    def __post_init__(self):
        if not self.bands:
            raise ValueError("stack has no bands")
        if self.extent_m <= 0:
            raise ValueError("extent_m must be positive")
        ids = [b.spec.id for b in self.bands]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate band id in stack: {ids}")
        ordered = tuple(sorted(self.bands, key=lambda b: canonical_index(b.spec.id)))
        object.__setattr__(self, "bands", ordered)
        for b in ordered:
            for n, what in ((b.rows, "rows"), (b.cols, "cols")):
                if abs(n * b.spec.native_gsd_m - self.extent_m) > 1e-6:
                    raise ValueError(
                        f"band {b.spec.id}: dimension/extent mismatch "
                        f"({what}={n} x {b.spec.native_gsd_m} m != {self.extent_m} m)"
                    )

    def band(self, band_id: str) -> Band:
        for b in self.bands:
            if b.spec.id == band_id:
                return b
        raise ValueError(f"stack has no band {band_id!r}")

    @property
    def band_ids(self) -> tuple[str, ...]:
        return tuple(b.spec.id for b in self.bands)


@dataclass(frozen=True)
class LabelMask:
    """Binary raster, 1 = plastic."""

    labels: np.ndarray  # (rows, cols) uint8 of {0, 1}

    def __post_init__(self):
        lb = np.asarray(self.labels)
        if lb.ndim != 2 or lb.size == 0:
            raise ValueError("labels must be a non-empty 2-D grid")
        if not np.isin(lb, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        lb = np.ascontiguousarray(lb.astype(np.uint8))
        lb.setflags(write=False)
        object.__setattr__(self, "labels", lb)

    @property
    def rows(self) -> int:
        return self.labels.shape[0]

    @property
    def cols(self) -> int:
        return self.labels.shape[1]


# ---------------------------------------------------------------------------
# band-stack container


def load_stack(manifest_path: str | os.PathLike) -> BandStack:
    """Read a stack manifest and its band payloads."""
    manifest_path = os.fspath(manifest_path)
    with open(manifest_path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"malformed manifest {manifest_path}: {e}") from e
    try:
        extent_m = float(doc["extent_m"])
        entries = doc["bands"]
    except (KeyError, TypeError) as e:
        raise ValueError(f"malformed manifest {manifest_path}: missing {e}") from e
    base = os.path.dirname(manifest_path)
    bands = []
    for ent in entries:
        spec = BandSpec(ent["id"], float(ent["wavelength_nm"]), float(ent["native_gsd_m"]))
        rows, cols = int(ent["rows"]), int(ent["cols"])
        if ent.get("dtype", "u16le") != "u16le":
            raise ValueError(f"band {spec.id}: unsupported dtype {ent['dtype']!r}")
        payload_path = os.path.join(base, ent["file"])
        data = np.fromfile(payload_path, dtype="<u2")
        if data.size != rows * cols:
            raise ValueError(
                f"band {spec.id}: payload {payload_path} has {data.size} samples, "
                f"expected {rows * cols}"
            )
        bands.append(Band(spec, data.reshape(rows, cols)))
    return BandStack(tuple(bands), extent_m)


def save_stack(stack: BandStack, manifest_path: str | os.PathLike) -> None:
    """Write manifest + one raw u16le payload per band next to it."""
    manifest_path = os.fspath(manifest_path)
    base = os.path.dirname(manifest_path)
    stem = os.path.splitext(os.path.basename(manifest_path))[0]
    entries = []
    for b in stack.bands:
        fname = f"{stem}_{b.spec.id}.u16"
        atomic_write_bytes(os.path.join(base, fname),
                           b.pixels.astype("<u2").tobytes())
        entries.append({
            "id": b.spec.id,
            "wavelength_nm": b.spec.wavelength_nm,
            "native_gsd_m": b.spec.native_gsd_m,
            "rows": b.rows,
            "cols": b.cols,
            "file": fname,
            "dtype": "u16le",
        })
    doc = {"extent_m": stack.extent_m, "bands": entries}
    atomic_write_bytes(manifest_path, json.dumps(doc, indent=2).encode())


def standard_stack(bands: dict[str, np.ndarray], extent_m: float) -> BandStack:
    """Build a stack from {band id: pixel grid} using Table-I metadata."""
    return BandStack(
        tuple(Band(canonical_spec(bid), px) for bid, px in bands.items()),
        extent_m,
    )


# ---------------------------------------------------------------------------
# PGM

def _read_pgm(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    if not raw.startswith(b"P5"):
        magic = raw[:2].decode("ascii", "replace")
        raise ValueError(f"unsupported PGM variant {magic!r} (binary P5 required)")
    # header: magic, width, height, maxval as whitespace-separated tokens,
    # '#' comments allowed
    tokens, pos = [], 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(int(raw[start:pos]))
    pos += 1  # single whitespace after maxval
    cols, rows, maxval = tokens
    if maxval not in (255, 65535):
        raise ValueError(f"PGM maxval {maxval} not supported (255 or 65535)")
    dtype = np.uint8 if maxval == 255 else np.dtype(">u2")
    payload = np.frombuffer(raw, dtype=dtype, count=-1, offset=pos)
    if payload.size < rows * cols:
        raise ValueError(f"truncated PGM payload: {payload.size} < {rows * cols}")
    return payload[: rows * cols].astype(np.uint16).reshape(rows, cols)


def import_pgm_band(path: str | os.PathLike, spec: BandSpec) -> Band:
    """Read a binary PGM as a band; 8-bit values are widened, not rescaled."""
    return Band(spec, _read_pgm(path))


def read_mask(path: str | os.PathLike) -> LabelMask:
    px = _read_pgm(path)
    return LabelMask((px > 0).astype(np.uint8))


def write_mask(mask: LabelMask, path: str | os.PathLike) -> None:
    header = f"P5\n{mask.cols} {mask.rows}\n255\n".encode("ascii")
    payload = (mask.labels * np.uint8(255)).tobytes()
    atomic_write_bytes(path, header + payload)


# ---------------------------------------------------------------------------
# float raster

def write_float_raster(values: np.ndarray, path: str | os.PathLike) -> None:
    """values: 2-D grid of finite numbers -> raw f32le + JSON sidecar."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.size == 0:
        raise ValueError("values must be a non-empty 2-D grid")
    if not np.isfinite(values).all():
        raise ValueError("float raster values must be finite")
    rows, cols = values.shape
    atomic_write_bytes(path, values.astype("<f4").tobytes())
    sidecar = json.dumps({"rows": rows, "cols": cols}).encode()
    atomic_write_bytes(os.fspath(path) + ".json", sidecar)


def read_float_raster(path: str | os.PathLike) -> np.ndarray:
    with open(os.fspath(path) + ".json", "r", encoding="utf-8") as f:
        meta = json.load(f)
    rows, cols = int(meta["rows"]), int(meta["cols"])
    data = np.fromfile(path, dtype="<f4")
    if data.size != rows * cols:
        raise ValueError(f"float raster payload has {data.size} samples, "
                         f"expected {rows * cols}")
    return data.reshape(rows, cols).astype(np.float64)
