"""Command line interface.

Subcommands:
  phantom    generate a synthetic cohort (volumes, masks, manifest)
  drr        render a volume to an 8-bit PGM radiograph
  analyze    partition two 3D lung masks against their 2D masks
  agreement  Dice/Jaccard between two masks of the same kind
  cohort     aggregate a cohort directory into report tables

Exit codes: 0 success, 1 invalid input or arguments, 2 I/O failure.
Errors print exactly one line on stderr: ``error: <Kind>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .concordance import ConcordanceReport, agreement, analyze_case, union2d
from .errors import IoFailure, LungCoverError, MalformedHeader, SpecViolation, ValidationError
from .grid import LABELS
from .io import (
    load_mask2d,
    load_mask3d,
    load_volume,
    save_mask2d,
    save_mask3d,
    save_pgm,
    save_volume,
    write_json,
)
from .phantom import (
    NAMED_SPECS,
    analytic_obscured_fraction,
    cohort_case,
    oracle_tolerance_pct,
    spec_from_dict,
    spec_to_dict,
)
from .projection import DEFAULT_WINDOW, WindowSpec, render_drr
from .reporting import (
    AGREEMENT_COLUMNS,
    CASE_COLUMNS,
    EXAM_COLUMNS,
    build_cohort_report,
    concordance_rows,
    read_csv,
    report_from_json,
    write_concordance_csv,
    write_cohort_tables,
    write_csv,
)


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument errors raise instead of exiting, for uniform reporting."""

    def error(self, message):
        raise UsageError(message)


def _say(args, *parts) -> None:
    if not args.quiet:
        print(*parts)


# --- phantom -------------------------------------------------------------------

def _load_spec(name_or_path: str, seed: int, jitter_px: int | None):
    builder = NAMED_SPECS.get(name_or_path)
    if builder is not None:
        return builder(rng_seed=seed,
                       annotator_jitter_px=1 if jitter_px is None else jitter_px)
    doc = json.loads(Path(name_or_path).read_text(encoding="utf-8"))
    spec = spec_from_dict(doc)
    if jitter_px is not None:
        spec = replace(spec, annotator_jitter_px=jitter_px)
    return spec


def cmd_phantom(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    base = _load_spec(args.spec, args.seed, args.jitter_px)
    out = Path(args.out)
    entries = []
    for index in range(args.n):
        case = cohort_case(base, index, args.seed, args.perturb_pct)
        case_id = f"case_{index:03d}"
        case_dir = out / case_id
        save_volume(case.volume, case_dir / "volume.json")
        save_mask3d(case.truth_right, case_dir / "truth_right.json")
        save_mask3d(case.truth_left, case_dir / "truth_left.json")
        save_mask2d(case.sota2d_right, case_dir / "sota2d_right.json")
        save_mask2d(case.sota2d_left, case_dir / "sota2d_left.json")
        save_mask2d(case.annot2_right, case_dir / "annot2_right.json")
        save_mask2d(case.annot2_left, case_dir / "annot2_left.json")
        oracle = {}
        for side in LABELS:
            frac = analytic_obscured_fraction(case.spec, side)
            oracle[side] = None if frac is None else 100.0 * frac
        entries.append({
            "case_id": case_id,
            "dir": case_id,
            "oracle_obscured_pct": oracle,
            "oracle_tolerance_pct": {s: oracle_tolerance_pct(case.spec, s) for s in LABELS},
            "spec": spec_to_dict(case.spec),
        })
        _say(args, f"wrote {case_dir}")
    manifest = {
        "kind": "lungcover-cohort",
        "n_cases": args.n,
        "cohort_seed": args.seed,
        "perturb_pct": args.perturb_pct,
        "base_spec": spec_to_dict(base),
        "cases": entries,
    }
    write_json(manifest, out / "manifest.json")
    print(out / "manifest.json")
    return 0


# --- drr -----------------------------------------------------------------------

def cmd_drr(args) -> int:
    volume = load_volume(args.volume)
    window = WindowSpec(args.window_lo, args.window_hi)
    save_pgm(render_drr(volume, window), args.out)
    print(args.out)
    return 0


# --- analyze -------------------------------------------------------------------

def cmd_analyze(args) -> int:
    report = analyze_case(
        load_mask3d(args.ct_right),
        load_mask3d(args.ct_left),
        load_mask2d(args.mask2d_right),
        load_mask2d(args.mask2d_left),
        case_id=args.case_id,
    )
    out = Path(args.out)
    write_json(report.as_dict(), out / "report.json")
    write_concordance_csv(report, out / "report.csv")
    vals = {label: report.labels[label].obscured_fraction_pct for label in LABELS}
    print(f"{report.case_id}: obscured right {vals['right']:.2f}% "
          f"left {vals['left']:.2f}% both {vals['both']:.2f}%")
    return 0


# --- agreement -------------------------------------------------------------------

def _load_any_mask(path: str):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    dims = doc.get("dims")
    if not isinstance(dims, list) or len(dims) not in (2, 3):
        raise MalformedHeader(f"{path}: dims must list 2 or 3 sizes")
    return load_mask3d(path) if len(dims) == 3 else load_mask2d(path)


def cmd_agreement(args) -> int:
    report = agreement(_load_any_mask(args.first), _load_any_mask(args.second))
    if args.out:
        write_json(report.as_dict(), args.out)
    print(f"label={report.label} kind={report.mask_kind} "
          f"dsc={report.dsc:.6f} ji={report.ji:.6f}")
    return 0


# --- cohort ----------------------------------------------------------------------

def _case_report(case_dir: Path, filename: str, case_id: str,
                 compute) -> ConcordanceReport:
    path = case_dir / filename
    if path.exists():
        report = report_from_json(json.loads(path.read_text(encoding="utf-8")))
        if report.case_id != case_id:
            raise SpecViolation(
                f"{path}: report is for {report.case_id!r}, expected {case_id!r}")
        return report
    return compute()


def cmd_cohort(args) -> int:
    cohort_dir = Path(args.cohort)
    manifest_path = cohort_dir / "manifest.json"
    if not manifest_path.exists():
        raise SpecViolation(f"{cohort_dir}: no manifest.json, not a cohort directory")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    cases = manifest.get("cases")
    if not cases:
        raise SpecViolation(f"{manifest_path}: cohort lists no cases")

    out_dir = Path(args.out) if args.out else cohort_dir / "report"
    case_ids: list[str] = []
    exam_rows: list[tuple] = []
    rows1: list[tuple] = []
    rows2: list[tuple] = []
    agreement_rows: list[tuple] = []

    for entry in cases:
        try:
            case_id = entry["case_id"]
            case_dir = cohort_dir / entry.get("dir", case_id)
            spec = spec_from_dict(entry["spec"])
        except (KeyError, TypeError) as exc:
            raise MalformedHeader(f"{manifest_path}: bad case entry: {exc}") from exc
        case_ids.append(case_id)
        g = spec.geometry
        exam_rows.append((case_id, g.sx, g.sz, g.nz, g.nz * g.sz))

        def compute_annot1():
            return analyze_case(
                load_mask3d(case_dir / "truth_right.json"),
                load_mask3d(case_dir / "truth_left.json"),
                load_mask2d(case_dir / "sota2d_right.json"),
                load_mask2d(case_dir / "sota2d_left.json"),
                case_id=case_id,
            )

        rows1.extend(concordance_rows(_case_report(case_dir, "report.json",
                                                   case_id, compute_annot1)))

        has_annot2 = (case_dir / "annot2_right.json").exists()
        if has_annot2:
            def compute_annot2():
                return analyze_case(
                    load_mask3d(case_dir / "truth_right.json"),
                    load_mask3d(case_dir / "truth_left.json"),
                    load_mask2d(case_dir / "annot2_right.json"),
                    load_mask2d(case_dir / "annot2_left.json"),
                    case_id=case_id,
                )

            rows2.extend(concordance_rows(_case_report(case_dir, "report_annot2.json",
                                                       case_id, compute_annot2)))
            sota_r = load_mask2d(case_dir / "sota2d_right.json")
            sota_l = load_mask2d(case_dir / "sota2d_left.json")
            ann_r = load_mask2d(case_dir / "annot2_right.json")
            ann_l = load_mask2d(case_dir / "annot2_left.json")
            pairs = [(sota_r, ann_r), (sota_l, ann_l),
                     (union2d(sota_r, sota_l), union2d(ann_r, ann_l))]
            for a, b in pairs:
                rep = agreement(a, b)
                agreement_rows.append((case_id, rep.label, rep.mask_kind, rep.dsc, rep.ji))
        _say(args, f"measured {case_id}")

    write_csv(out_dir / "exam.csv", EXAM_COLUMNS, exam_rows)
    write_csv(out_dir / "cases_annotator1.csv", CASE_COLUMNS, rows1)
    case_rows = {"annotator1": read_csv(out_dir / "cases_annotator1.csv")}
    if rows2:
        write_csv(out_dir / "cases_annotator2.csv", CASE_COLUMNS, rows2)
        case_rows["annotator2"] = read_csv(out_dir / "cases_annotator2.csv")
    write_csv(out_dir / "agreement.csv", AGREEMENT_COLUMNS, agreement_rows)

    report = build_cohort_report(
        case_ids=case_ids,
        exam_rows=read_csv(out_dir / "exam.csv"),
        case_rows=case_rows,
        agreement_rows=read_csv(out_dir / "agreement.csv"),
    )
    write_cohort_tables(report, out_dir)

    if not args.quiet:
        for label in LABELS:
            parts = []
            for annot in sorted(report.fractions):
                s = report.fractions[annot][label]
                sd = "n/a" if s.sd is None else f"{s.sd:.2f}"
                parts.append(f"{annot} {s.mean:.2f}% (sd {sd})")
            test = report.fraction_tests.get(label)
            if hasattr(test, "result"):
                parts.append(f"p={test.result.p_value:.4g} ({test.chosen})")
            print(f"{label}: obscured " + "; ".join(parts))
    print(out_dir / "cohort_report.json")
    return 0


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--quiet", action="store_true",
                        help="suppress progress lines (result paths still print)")
    parser = _Parser(prog="lungcover",
                     description="Quantify lung volume missed by 2D coverage masks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", parents=[common],
                       help="generate a synthetic cohort with analytic ground truth")
    p.add_argument("--out", required=True, help="cohort output directory")
    p.add_argument("--spec", default="default",
                   help="named spec (%s) or a JSON spec file" % ", ".join(sorted(NAMED_SPECS)))
    p.add_argument("--n", type=int, default=55, help="number of cases (default 55)")
    p.add_argument("--seed", type=int, default=0,
                   help="cohort seed; with a JSON spec it drives only the perturbations")
    p.add_argument("--jitter-px", type=int, default=None,
                   help="second-annotator boundary jitter radius in pixels")
    p.add_argument("--perturb-pct", type=float, default=15.0,
                   help="size perturbation range in percent (default 15)")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("drr", parents=[common],
                       help="render a mean-intensity projection to PGM")
    p.add_argument("volume", help="volume header (.json)")
    p.add_argument("--out", required=True, help="output PGM path")
    p.add_argument("--window-lo", type=float, default=DEFAULT_WINDOW.lo,
                   help="HU mapped to black (default %(default)s)")
    p.add_argument("--window-hi", type=float, default=DEFAULT_WINDOW.hi,
                   help="HU mapped to white (default %(default)s)")
    p.set_defaults(func=cmd_drr)

    p = sub.add_parser("analyze", parents=[common],
                       help="partition 3D lung masks against 2D coverage masks")
    p.add_argument("--ct-right", required=True, help="right lung 3D mask header")
    p.add_argument("--ct-left", required=True, help="left lung 3D mask header")
    p.add_argument("--mask2d-right", required=True, help="right lung 2D mask header")
    p.add_argument("--mask2d-left", required=True, help="left lung 2D mask header")
    p.add_argument("--case-id", default="case", help="identifier in the report")
    p.add_argument("--out", required=True, help="directory for report.json/report.csv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("agreement", parents=[common],
                       help="Dice/Jaccard between two masks of the same kind")
    p.add_argument("first", help="mask header (.json), 2D or 3D")
    p.add_argument("second", help="mask header of the same kind and grid")
    p.add_argument("--out", default=None, help="optional JSON report path")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("cohort", parents=[common],
                       help="aggregate a cohort directory into report tables")
    p.add_argument("cohort", help="cohort directory containing manifest.json")
    p.add_argument("--out", default=None,
                   help="report output directory (default <cohort>/report)")
    p.set_defaults(func=cmd_cohort)
    return parser


def _fail(exc: Exception) -> None:
    message = " ".join(str(exc).split()) or type(exc).__name__
    print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        _fail(exc)
        return 1
    try:
        return args.func(args)
    except IoFailure as exc:
        _fail(exc)
        return 2
    except (ValidationError, LungCoverError, ValueError) as exc:
        _fail(exc)
        return 1
    except OSError as exc:
        _fail(exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
