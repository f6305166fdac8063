"""Coronal projections: DRR rendering and 2D<->3D mask transforms.

The DRR is an orthographic parallel-ray projection along +y: each output
pixel is the mean HU of its y-column, mapped through a display window to
8 bits. Masks move between 2D and 3D by extrusion (replicate along y)
and projection (OR along y). project(extrude(m)) == m for every ny >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import DrrImage, GridGeometry, Mask2D, Mask3D, VoxelVolume


@dataclass(frozen=True)
class WindowSpec:
    """Display window in HU; lo maps to 0, hi maps to 255."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"window requires lo < hi, got ({self.lo}, {self.hi})")


# Default window spans air to light soft tissue so lungs stay mid-gray.
DEFAULT_WINDOW = WindowSpec(-1000.0, 200.0)


def render_drr(volume: VoxelVolume, window: WindowSpec = DEFAULT_WINDOW) -> DrrImage:
    """Mean-intensity projection along y, windowed to uint8.

    pixel = round(255 * clamp((mean - lo) / (hi - lo), 0, 1)), with
    round half away from zero (the scaled value is nonnegative, so this
    is floor(v + 0.5)).
    """
    mean = volume.values.mean(axis=1, dtype=np.float64)  # (nz, nx)
    frac = np.clip((mean - window.lo) / (window.hi - window.lo), 0.0, 1.0)
    pixels = np.floor(255.0 * frac + 0.5).astype(np.uint8)
    return DrrImage(volume.geometry.nx, volume.geometry.nz, pixels)


def extrude_mask(mask: Mask2D, ny: int, sy: float) -> Mask3D:
    """Replicate a coronal mask ny times along y into a 3D mask."""
    geom = GridGeometry(mask.nx, ny, mask.nz, mask.sx, sy, mask.sz)
    bits = np.broadcast_to(mask.bits[:, None, :], geom.shape_zyx)
    return Mask3D(geom, bits, mask.label)


def project_mask(mask: Mask3D) -> Mask2D:
    """Coronal silhouette: OR along y."""
    g = mask.geometry
    return Mask2D(g.nx, g.nz, g.sx, g.sz, mask.bits.any(axis=1), mask.label)
