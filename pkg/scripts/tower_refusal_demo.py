#!/usr/bin/env python3
"""Show the tower schedule saturating under the paper profile.

Prints the per-step schedule rows until every quantity saturates the
2^64 capacity, then the refusal that any paper-profile engine run
raises before touching the input.
"""

import sys
from fractions import Fraction

from regulab.engines import (
    ScheduleSaturation,
    check_paper_schedule,
    first_saturation,
    is_saturated,
    paper_schedule,
)
from regulab.quasirandom import PolyFunction


def fmt(x) -> str:
    if is_saturated(x):
        return "SATURATED"
    if isinstance(x, Fraction) and x.denominator > 10**12:
        return f"~2^-{x.denominator.bit_length()}"
    s = str(x)
    return s if len(s) <= 24 else f"~2^{int(x).bit_length()}"


def main() -> int:
    eta = Fraction(1, 4)
    psi = PolyFunction.parse("2**-100,28")
    rows = paper_schedule(eta, 3, psi, steps=3)
    print("eta = 1/4, t = 3, psi = 2^-100 * x^28")
    print(f"{'step':>4} {'B':>12} {'A':>12} {'delta':>12} {'alpha':>12} {'edge_cap':>12}")
    for r in rows:
        print(
            f"{r.tau:>4} {fmt(r.b):>12} {fmt(r.a):>12} "
            f"{fmt(r.delta):>12} {fmt(r.alpha):>12} {fmt(r.edge_cap):>12}"
        )
    quantity, step = first_saturation(rows)
    print(f"first saturation: {quantity} at step {step}")
    try:
        check_paper_schedule(eta, 3, psi)
    except ScheduleSaturation as exc:
        print(f"refusal: {exc}")
        return 0
    print("schedule unexpectedly ran to completion")
    return 1


if __name__ == "__main__":
    sys.exit(main())
