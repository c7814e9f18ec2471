#!/usr/bin/env python3
"""Run one or all verification suites and write JSON, CSV and text reports side by side.

    python3 scripts/run_suite.py --suite all --seed 1 --outdir reports
"""

import argparse
import os

from qweyl.suite import SUITES, SuiteConfig, emit_report, run_suite, threads_from_env


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--suite", default="all", choices=SUITES + ("all",))
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--outdir", default="reports")
    args = ap.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    rep = run_suite(SuiteConfig(suite=args.suite, seed=args.seed), threads_from_env())
    stem = os.path.join(args.outdir, f"{args.suite}-seed{args.seed}")
    for fmt in ("json", "csv", "text"):
        emit_report(rep, f"{stem}.{'txt' if fmt == 'text' else fmt}", fmt)
    s = rep.summary
    print(f"{args.suite}: {s['passed']} passed, {s['failed']} failed, {s['skipped']} skipped -> {stem}.*")
    return 0 if rep.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
