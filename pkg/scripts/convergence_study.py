#!/usr/bin/env python3
"""Measure integrator error against closed-form trajectories.

Runs the four integrators over a halving step-size grid, writes the raw
CSV, and prints the observed convergence order of each method (log2 of
the error ratio between adjacent grid levels).

    python scripts/convergence_study.py
    python scripts/convergence_study.py --system freefall --csv rows.csv
"""

import argparse
import math
import sys
from fractions import Fraction

from softslides.harness import (
    TraceError,
    compare_integrators,
    convergence_ratios,
    rows_to_csv,
)

EXPECTED_ORDER = {"euler": 1, "midpoint": 2, "feynman": 2, "rk4": 4}


def parse_grid(text: str) -> list[Fraction]:
    body = text[2:] if text.startswith("h=") else text
    try:
        return [Fraction(token.strip()) for token in body.split(",") if token.strip()]
    except (ValueError, ZeroDivisionError) as err:
        raise TraceError(f"bad grid {text!r}: {err}") from None


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--system", choices=("oscillator", "freefall"),
                    default="oscillator")
    ap.add_argument("--grid", default="h=1/60,1/120,1/240",
                    help="comma separated step sizes, each half the last")
    ap.add_argument("--t-end", default="2", help="integration span in seconds")
    ap.add_argument("--csv", help="write the raw rows here instead of stdout")
    args = ap.parse_args(argv)

    try:
        grid = parse_grid(args.grid)
        rows = compare_integrators(args.system, grid,
                                   t_end=Fraction(args.t_end))
        ratios = convergence_ratios(rows)
    except TraceError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    csv = rows_to_csv(rows)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(csv)
        print(f"wrote {len(rows)} rows to {args.csv}", file=sys.stderr)
    else:
        print(csv, end="")

    print(f"\nobserved order on the {args.system} system "
          f"(grid {', '.join(str(h) for h in grid)}):", file=sys.stderr)
    for kind in ("euler", "midpoint", "feynman", "rk4"):
        orders = [math.log2(r) for r in ratios[kind]]
        shown = ", ".join(f"{o:.2f}" for o in orders)
        print(f"  {kind:<9} expected {EXPECTED_ORDER[kind]}  measured {shown}",
              file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
