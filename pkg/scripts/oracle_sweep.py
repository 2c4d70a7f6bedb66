#!/usr/bin/env python3
"""Sweep the fast kernels against the naive oracles over a size grid.

Usage: python scripts/oracle_sweep.py [--max-size 10] [--cases 200] [--seed 7]
"""

import argparse
import sys
import time
from fractions import Fraction

from regulab.generators import SplitMix64, random_bipartite, random_chain
from regulab.quasirandom import chain_quasirandomness, pair_quasirandomness


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-size", type=int, default=10)
    ap.add_argument("--cases", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    rng = SplitMix64(args.seed)
    t0 = time.monotonic()
    mismatches = 0
    for case in range(args.cases):
        na = 1 + rng.below(args.max_size)
        nb = 1 + rng.below(args.max_size)
        g = random_bipartite(na, nb, Fraction(1, 2), seed=rng.next_u64())
        fast = pair_quasirandomness(g, mode="fast")
        naive = pair_quasirandomness(g, mode="naive")
        if (fast.raw_sum, fast.value) != (naive.raw_sum, naive.value):
            mismatches += 1
            print(f"pair mismatch at case {case}: {na}x{nb}")
        if case % 4 == 0:
            sizes = tuple(1 + rng.below(min(args.max_size, 6)) for _ in range(3))
            c = random_chain(sizes, Fraction(2, 3), Fraction(1, 2), seed=rng.next_u64())
            cf = chain_quasirandomness(c, mode="fast")
            cn = chain_quasirandomness(c, mode="naive")
            if (cf.raw_sum, cf.value) != (cn.raw_sum, cn.value):
                mismatches += 1
                print(f"chain mismatch at case {case}: {sizes}")
    dt = time.monotonic() - t0
    print(f"{args.cases} pair cases + {args.cases // 4 + 1} chain cases in {dt:.1f}s")
    if mismatches:
        print(f"{mismatches} mismatches")
        return 1
    print("all kernels match their oracles")
    return 0


if __name__ == "__main__":
    sys.exit(main())
