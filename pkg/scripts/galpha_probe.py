#!/usr/bin/env python3
"""Truncated L^{r'} norms of F(f_alpha) over growing frequency boxes.

Shows the divergent regime (alpha above 1 - 1/r') and the slowly converging
one below it; extend --domains to watch the increments shrink.

    python3 scripts/galpha_probe.py --alpha 0.1 0.4 --domains 4 8 16 24
"""

import argparse

from qweyl.weyl import divergence_threshold, increments, unboundedness_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.1, 0.4])
    ap.add_argument("--rprime", type=float, default=1.5)
    ap.add_argument("--domains", type=float, nargs="+", default=[4, 8, 16])
    args = ap.parse_args()

    print(f"threshold 1 - 1/r' = {divergence_threshold(args.rprime):.4f}")
    for a in args.alpha:
        v = unboundedness_probe(a, args.rprime, args.domains)
        inc = ", ".join(f"{d:+.2%}" for d in increments(v))
        print(f"alpha={a:<5} norms {[round(x, 6) for x in v]}  increments {inc}")


if __name__ == "__main__":
    main()
