"""Covered/obscured partition of a 3D mask against a coronal 2D mask.

The 2D mask is extruded along y; reference voxels inside the extrusion
are "covered", the rest are "obscured". Counts are exact integers and
partition the reference, so covered_ml + obscured_ml == total_ml holds
bit-exactly (one shared voxel-volume factor, applied once at the end).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BothEmpty, EmptyReference, GeometryMismatch
from .grid import Mask2D, Mask3D, voxel_volume_ml
from .projection import extrude_mask


def _require_same_grid(a: Mask3D, b: Mask3D) -> None:
    if a.geometry != b.geometry:
        raise GeometryMismatch(f"mask grids differ: {a.geometry} vs {b.geometry}")


def _require_same_plane(a: Mask2D, b: Mask2D) -> None:
    if (a.nx, a.nz, a.sx, a.sz) != (b.nx, b.nz, b.sx, b.sz):
        raise GeometryMismatch("2D mask planes differ")


def _combined_label(a: str, b: str) -> str:
    return a if a == b else "both"


def overlap_mask(a: Mask3D, b: Mask3D) -> Mask3D:
    """Voxelwise AND."""
    _require_same_grid(a, b)
    return Mask3D(a.geometry, a.bits & b.bits, _combined_label(a.label, b.label))


def obscured_mask(reference: Mask3D, cover: Mask3D) -> Mask3D:
    """Reference voxels not inside the cover (AND NOT)."""
    _require_same_grid(reference, cover)
    return Mask3D(reference.geometry, reference.bits & ~cover.bits, reference.label)


def union2d(a: Mask2D, b: Mask2D) -> Mask2D:
    """Pixelwise OR of two coplanar 2D masks."""
    _require_same_plane(a, b)
    return Mask2D(nx=a.nx, nz=a.nz, sx=a.sx, sz=a.sz,
                  bits=a.bits | b.bits, label=_combined_label(a.label, b.label))


def mask_volume_ml(mask: Mask3D) -> float:
    return mask.voxel_count * voxel_volume_ml(mask.geometry)


def dice(a, b) -> float:
    """Dice coefficient 2|A&B| / (|A|+|B|) for two masks of one kind."""
    ca, cb, inter = _pair_counts(a, b)
    if ca + cb == 0:
        raise BothEmpty("Dice undefined: both masks empty")
    return 2.0 * inter / (ca + cb)


def jaccard(a, b) -> float:
    """Jaccard index: intersection over union; equals dsc/(2-dsc)."""
    ca, cb, inter = _pair_counts(a, b)
    union = ca + cb - inter
    if union == 0:
        raise BothEmpty("Jaccard undefined: both masks empty")
    return inter / union


def _pair_counts(a, b) -> tuple[int, int, int]:
    if isinstance(a, Mask3D) and isinstance(b, Mask3D):
        _require_same_grid(a, b)
    elif isinstance(a, Mask2D) and isinstance(b, Mask2D):
        _require_same_plane(a, b)
    else:
        raise GeometryMismatch(f"cannot compare {type(a).__name__} with {type(b).__name__}")
    ca = int(np.count_nonzero(a.bits))
    cb = int(np.count_nonzero(b.bits))
    inter = int(np.count_nonzero(a.bits & b.bits))
    return ca, cb, inter


@dataclass(frozen=True)
class AgreementReport:
    """DSC/JI between two same-kind masks."""

    label: str
    mask_kind: str  # "ct3d" or "drr2d"
    dsc: float
    ji: float

    def as_dict(self) -> dict:
        return {"label": self.label, "mask_kind": self.mask_kind,
                "dsc": self.dsc, "ji": self.ji}


def agreement(a, b) -> AgreementReport:
    kind = "ct3d" if isinstance(a, Mask3D) else "drr2d"
    return AgreementReport(_combined_label(a.label, b.label), kind, dice(a, b), jaccard(a, b))


def obscured_fraction(reference: Mask3D, mask2d: Mask2D) -> float:
    """Percent of reference voxels outside the extruded 2D mask.

    Spacing-invariant: a pure count ratio, times 100.
    """
    g = reference.geometry
    if (mask2d.nx, mask2d.nz) != (g.nx, g.nz) or (mask2d.sx, mask2d.sz) != (g.sx, g.sz):
        raise GeometryMismatch(
            f"2D mask plane ({mask2d.nx}x{mask2d.nz} @ {mask2d.sx},{mask2d.sz}) does not "
            f"match grid ({g.nx}x{g.nz} @ {g.sx},{g.sz})"
        )
    total = reference.voxel_count
    if total == 0:
        raise EmptyReference("obscured fraction undefined: reference mask empty")
    cover = extrude_mask(mask2d, g.ny, g.sy)
    obscured = int(np.count_nonzero(reference.bits & ~cover.bits))
    return 100.0 * obscured / total


@dataclass(frozen=True)
class LabelMeasures:
    """Volumes for one label: exact voxel counts plus derived ml."""

    total_voxels: int
    covered_voxels: int
    obscured_voxels: int
    total_ml: float
    covered_ml: float
    obscured_ml: float
    obscured_fraction_pct: float

    def as_dict(self) -> dict:
        return {
            "total_voxels": self.total_voxels,
            "covered_voxels": self.covered_voxels,
            "obscured_voxels": self.obscured_voxels,
            "total_ml": self.total_ml,
            "covered_ml": self.covered_ml,
            "obscured_ml": self.obscured_ml,
            "obscured_fraction_pct": self.obscured_fraction_pct,
        }


@dataclass(frozen=True)
class ConcordanceReport:
    """Per-case partition measures for right, left and both lungs."""

    case_id: str
    labels: dict  # label -> LabelMeasures

    def as_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "labels": {k: v.as_dict() for k, v in self.labels.items()},
        }


def _measure(reference: Mask3D, mask2d: Mask2D) -> LabelMeasures:
    g = reference.geometry
    total = reference.voxel_count
    if total == 0:
        raise EmptyReference("cannot analyze an empty reference mask")
    cover = extrude_mask(mask2d, g.ny, g.sy)
    covered = int(np.count_nonzero(reference.bits & cover.bits))
    obscured = int(np.count_nonzero(reference.bits & ~cover.bits))
    vv = voxel_volume_ml(g)
    covered_ml = covered * vv
    obscured_ml = obscured * vv
    return LabelMeasures(
        total_voxels=total,
        covered_voxels=covered,
        obscured_voxels=obscured,
        total_ml=covered_ml + obscured_ml,
        covered_ml=covered_ml,
        obscured_ml=obscured_ml,
        obscured_fraction_pct=100.0 * obscured / total,
    )


def analyze_case(
    ct_right: Mask3D,
    ct_left: Mask3D,
    mask2d_right: Mask2D,
    mask2d_left: Mask2D,
    case_id: str = "case",
) -> ConcordanceReport:
    """Partition both lungs against their 2D masks; adds a combined row.

    Labels are taken from argument position, not from mask.label, so
    swapped inputs still produce a report (the fractions make the swap
    obvious).
    """
    _require_same_grid(ct_right, ct_left)
    _require_same_plane(mask2d_right, mask2d_left)
    g = ct_right.geometry
    both3d = Mask3D(g, ct_right.bits | ct_left.bits, "both")
    both2d = Mask2D(mask2d_right.nx, mask2d_right.nz, mask2d_right.sx, mask2d_right.sz,
                    mask2d_right.bits | mask2d_left.bits, "both")
    labels = {
        "right": _measure(ct_right, mask2d_right),
        "left": _measure(ct_left, mask2d_left),
        "both": _measure(both3d, both2d),
    }
    return ConcordanceReport(case_id=case_id, labels=labels)
