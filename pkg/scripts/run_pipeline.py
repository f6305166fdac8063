#!/usr/bin/env python3
"""End-to-end demo: generate a phantom cohort, render one radiograph,
analyze one case by hand, then aggregate the whole cohort.

Everything goes through the command line interface, so this doubles as
a usage example. The run is fully seeded; rerunning with the same
arguments reproduces every output byte for byte.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from lungcover.cli import main as lungcover


def run(argv: list[str]) -> None:
    code = lungcover(argv)
    if code != 0:
        raise SystemExit(code)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="pipeline_out", help="output directory")
    parser.add_argument("--n", type=int, default=10, help="cohort size")
    parser.add_argument("--seed", type=int, default=0, help="cohort seed")
    args = parser.parse_args()

    out = Path(args.out)
    cohort = out / "cohort"
    print(f"== generating {args.n}-case cohort (seed {args.seed}) ==")
    run(["phantom", "--out", str(cohort), "--n", str(args.n),
         "--seed", str(args.seed), "--quiet"])

    case = cohort / "case_000"
    print("== rendering a radiograph for case_000 ==")
    run(["drr", str(case / "volume.json"), "--out", str(out / "case_000.pgm")])

    print("== analyzing case_000 against its contour-style 2D masks ==")
    run(["analyze",
         "--ct-right", str(case / "truth_right.json"),
         "--ct-left", str(case / "truth_left.json"),
         "--mask2d-right", str(case / "sota2d_right.json"),
         "--mask2d-left", str(case / "sota2d_left.json"),
         "--case-id", "case_000",
         "--out", str(out / "case_000_analysis")])

    print("== annotator agreement on the right lung 2D masks ==")
    run(["agreement", str(case / "sota2d_right.json"),
         str(case / "annot2_right.json")])

    print("== aggregating the cohort ==")
    run(["cohort", str(cohort), "--out", str(out / "report"), "--quiet"])

    print(f"\ndone; reports in {out / 'report'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
