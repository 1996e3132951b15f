#!/usr/bin/env python3
"""Compare critical-pair verdicts with brute-force normal-form enumeration.

Generates random terminating models, runs the analyzer and the brute-force
oracle from the test suite on each, and reports any disagreement.
"""

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from oracles import brute_force_confluent, universe_seeds  # noqa: E402

from actr_confluence.confluence import CheckOptions, check_confluence  # noqa: E402
from actr_confluence.gen import is_terminating, random_model  # noqa: E402
from actr_confluence.parser import format_model  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=50, help="number of terminating models")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--show", action="store_true", help="print disagreeing models")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    counts = {"agree": 0, "disagree": 0, "unknown": 0}
    tried = 0
    t0 = time.perf_counter()
    while sum(counts.values()) < args.n:
        m = random_model(rng)
        tried += 1
        if not is_terminating(m, universe_seeds(m)):
            continue
        report = check_confluence(m, CheckOptions(max_steps=50, max_states=5000))
        brute = brute_force_confluent(m)
        if report.verdict == "unknown" or brute is None:
            counts["unknown"] += 1
        elif (report.verdict == "confluent") == brute:
            counts["agree"] += 1
        else:
            counts["disagree"] += 1
            if args.show:
                print(format_model(m))
                print(f"analyzer: {report.verdict}, brute force confluent: {brute}\n")
    dt = time.perf_counter() - t0
    print(f"{args.n} terminating models out of {tried} generated in {dt:.1f}s: "
          + ", ".join(f"{k} {v}" for k, v in counts.items()))
    return 1 if counts["disagree"] else 0


if __name__ == "__main__":
    sys.exit(main())
