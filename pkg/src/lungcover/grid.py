"""Voxel-grid domain types shared by every stage of the pipeline.

Axis convention: x runs left-right, y runs anterior-posterior (the
projection axis), z runs cranio-caudal. The coronal plane is x-z.
Arrays are stored C-contiguous with shape (nz, ny, nx), so the flat
element order is x-fastest, then y, then z: offset = x + nx*(y + ny*z).
2D coronal arrays use shape (nz, nx) with the same x-fastest order.

All types are immutable: constructors take ownership of the array and
mark it read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HU_MIN = -1024
HU_MAX = 3071

LABELS = ("right", "left", "both")


def _freeze(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class GridGeometry:
    """Grid dims (voxel counts) and isotropic-per-axis spacing in mm."""

    nx: int
    ny: int
    nz: int
    sx: float
    sy: float
    sz: float

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            n = getattr(self, name)
            if not isinstance(n, (int, np.integer)) or n < 1:
                raise ValueError(f"{name} must be a positive integer, got {n!r}")
        for name in ("sx", "sy", "sz"):
            s = getattr(self, name)
            if not (s > 0.0) or not np.isfinite(s):
                raise ValueError(f"{name} must be positive and finite, got {s!r}")

    @property
    def shape_zyx(self) -> tuple[int, int, int]:
        return (self.nz, self.ny, self.nx)

    @property
    def voxel_count(self) -> int:
        return self.nx * self.ny * self.nz


def voxel_volume_ml(geometry: GridGeometry) -> float:
    """Volume of one voxel in milliliters (mm^3 / 1000)."""
    return geometry.sx * geometry.sy * geometry.sz / 1000.0


def _check_label(label: str) -> None:
    if label not in LABELS:
        raise ValueError(f"label must be one of {LABELS}, got {label!r}")


@dataclass(frozen=True)
class VoxelVolume:
    """CT-like scalar volume, int16 HU values in [-1024, 3071]."""

    geometry: GridGeometry
    values: np.ndarray  # (nz, ny, nx) int16, read-only

    def __post_init__(self):
        raw = np.asarray(self.values)
        if raw.shape != self.geometry.shape_zyx:
            raise ValueError(
                f"values shape {raw.shape} != geometry {self.geometry.shape_zyx}"
            )
        # range check before the int16 narrowing so nothing wraps silently
        if raw.size and (raw.min() < HU_MIN or raw.max() > HU_MAX):
            raise ValueError(f"values outside [{HU_MIN}, {HU_MAX}]")
        object.__setattr__(self, "values", _freeze(raw, np.int16))


@dataclass(frozen=True)
class Mask3D:
    """Binary voxel mask on a grid, labeled right/left/both."""

    geometry: GridGeometry
    bits: np.ndarray  # (nz, ny, nx) bool, read-only
    label: str

    def __post_init__(self):
        bits = _freeze(self.bits, bool)
        if bits.shape != self.geometry.shape_zyx:
            raise ValueError(
                f"bits shape {bits.shape} != geometry {self.geometry.shape_zyx}"
            )
        _check_label(self.label)
        object.__setattr__(self, "bits", bits)

    @property
    def voxel_count(self) -> int:
        return int(np.count_nonzero(self.bits))


@dataclass(frozen=True)
class Mask2D:
    """Binary coronal-plane mask (x-z), labeled right/left/both."""

    nx: int
    nz: int
    sx: float
    sz: float
    bits: np.ndarray  # (nz, nx) bool, read-only
    label: str

    def __post_init__(self):
        if self.nx < 1 or self.nz < 1:
            raise ValueError("nx and nz must be positive")
        if not (self.sx > 0.0 and self.sz > 0.0):
            raise ValueError("sx and sz must be positive")
        bits = _freeze(self.bits, bool)
        if bits.shape != (self.nz, self.nx):
            raise ValueError(f"bits shape {bits.shape} != (nz, nx) = {(self.nz, self.nx)}")
        _check_label(self.label)
        object.__setattr__(self, "bits", bits)

    @property
    def pixel_count(self) -> int:
        return int(np.count_nonzero(self.bits))


@dataclass(frozen=True)
class DrrImage:
    """8-bit synthetic radiograph on the coronal plane."""

    nx: int
    nz: int
    pixels: np.ndarray  # (nz, nx) uint8, read-only

    def __post_init__(self):
        if self.nx < 1 or self.nz < 1:
            raise ValueError("nx and nz must be positive")
        px = _freeze(self.pixels, np.uint8)
        if px.shape != (self.nz, self.nx):
            raise ValueError(f"pixels shape {px.shape} != (nz, nx) = {(self.nz, self.nx)}")
        object.__setattr__(self, "pixels", px)
