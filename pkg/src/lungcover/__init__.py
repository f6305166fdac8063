"""Quantify how much lung volume 2D chest-radiograph masks actually cover.

The pipeline: synthesize a radiograph from a CT-like volume, carry lung
masks between the coronal plane and the volume, split each 3D lung into
the part covered by a 2D mask's extrusion and the part obscured from
it, and summarize cohorts with nonparametric paired statistics. A
synthetic chest phantom with closed-form obscured fractions provides
ground truth for end-to-end verification.
"""

from .concordance import (
    AgreementReport,
    ConcordanceReport,
    LabelMeasures,
    agreement,
    analyze_case,
    dice,
    jaccard,
    mask_volume_ml,
    obscured_fraction,
    obscured_mask,
    overlap_mask,
    union2d,
)
from .errors import (
    AllZeroDifferences,
    BothEmpty,
    DegenerateVariance,
    EmptyInput,
    EmptyReference,
    GeometryMismatch,
    IoFailure,
    LengthMismatch,
    LungCoverError,
    MalformedHeader,
    MalformedMask,
    SizeMismatch,
    SpecViolation,
    TooFewSamples,
    TooManySamples,
    ValidationError,
)
from .grid import (
    HU_MAX,
    HU_MIN,
    LABELS,
    DrrImage,
    GridGeometry,
    Mask2D,
    Mask3D,
    VoxelVolume,
    voxel_volume_ml,
)
from .io import (
    load_mask2d,
    load_mask3d,
    load_volume,
    pgm_bytes,
    save_mask2d,
    save_mask3d,
    save_pgm,
    save_volume,
)
from .phantom import (
    Ellipsoid,
    PhantomCase,
    PhantomSpec,
    SphereCap,
    TissueHu,
    analytic_obscured_fraction,
    anatomical_spec,
    cohort_case,
    default_spec,
    generate_cohort,
    generate_phantom,
    oracle_tolerance_pct,
    spec_from_dict,
    spec_to_dict,
)
from .projection import DEFAULT_WINDOW, WindowSpec, extrude_mask, project_mask, render_drr
from .stats import (
    DescriptiveSummary,
    PairedComparison,
    QuartileSummary,
    TestResult,
    describe,
    describe_quartiles,
    paired_compare,
    paired_t_test,
    shapiro_wilk,
    wilcoxon_signed_rank,
)

__all__ = [
    "AgreementReport",
    "AllZeroDifferences",
    "BothEmpty",
    "ConcordanceReport",
    "DEFAULT_WINDOW",
    "DegenerateVariance",
    "DescriptiveSummary",
    "DrrImage",
    "Ellipsoid",
    "EmptyInput",
    "EmptyReference",
    "GeometryMismatch",
    "GridGeometry",
    "HU_MAX",
    "HU_MIN",
    "IoFailure",
    "LABELS",
    "LabelMeasures",
    "LengthMismatch",
    "LungCoverError",
    "MalformedHeader",
    "MalformedMask",
    "Mask2D",
    "Mask3D",
    "PairedComparison",
    "PhantomCase",
    "PhantomSpec",
    "QuartileSummary",
    "SizeMismatch",
    "SpecViolation",
    "SphereCap",
    "TestResult",
    "TissueHu",
    "TooFewSamples",
    "TooManySamples",
    "ValidationError",
    "VoxelVolume",
    "WindowSpec",
    "agreement",
    "analytic_obscured_fraction",
    "analyze_case",
    "anatomical_spec",
    "cohort_case",
    "default_spec",
    "describe",
    "describe_quartiles",
    "dice",
    "extrude_mask",
    "generate_cohort",
    "generate_phantom",
    "jaccard",
    "load_mask2d",
    "load_mask3d",
    "load_volume",
    "mask_volume_ml",
    "obscured_fraction",
    "obscured_mask",
    "oracle_tolerance_pct",
    "overlap_mask",
    "paired_compare",
    "paired_t_test",
    "pgm_bytes",
    "project_mask",
    "render_drr",
    "save_mask2d",
    "save_mask3d",
    "save_pgm",
    "save_volume",
    "shapiro_wilk",
    "spec_from_dict",
    "spec_to_dict",
    "union2d",
    "voxel_volume_ml",
    "wilcoxon_signed_rank",
]
