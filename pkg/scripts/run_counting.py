#!/usr/bin/env python3
"""Check both counting models and print verdicts with timings."""

import argparse
import time
from pathlib import Path

from actr_confluence.confluence import CheckOptions, check_confluence, format_report
from actr_confluence.parser import load_model

MODELS = Path(__file__).resolve().parents[1] / "models"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--verbose", action="store_true", help="print the full reports")
    ap.add_argument("--max-steps", type=int, default=1000)
    args = ap.parse_args()
    for name in ("counting_det", "counting_ambig"):
        model = load_model(MODELS / f"{name}.actr")
        t0 = time.perf_counter()
        report = check_confluence(model, CheckOptions(max_steps=args.max_steps))
        dt = time.perf_counter() - t0
        pruned = sum(r.pruned for r in report.results)
        print(f"{name}: {report.verdict} ({len(report.results)} overlaps, {pruned} pruned, {dt:.3f}s)")
        if args.verbose:
            print(format_report(report))


if __name__ == "__main__":
    main()
