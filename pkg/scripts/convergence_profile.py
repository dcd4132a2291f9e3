#!/usr/bin/env python3
"""Print max_m |omega_{s(j)}(pi^m) - 1| next to the coset majorant along j = 1, 2, 4, ..."""

import argparse

from sphlab.padic import PrimeContext, dominant_coweights
from sphlab.spherical import convergence_profile

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--p", type=int, default=2)
ap.add_argument("--n", type=int, default=3)
ap.add_argument("--spread", type=int, default=2, help="grid of dominant m with m_1 - m_n <= spread")
ap.add_argument("--max-power", type=int, default=6, help="largest j is 2^max_power")
args = ap.parse_args()

ctx = PrimeContext(args.p, args.n)
grid = dominant_coweights(ctx.n, args.spread)
js = [2**k for k in range(args.max_power + 1)]
print(f"p={ctx.p} n={ctx.n} grid={grid}")
print(f"{'j':>5}  {'max deviation':>14}  {'majorant':>10}")
for row in convergence_profile(ctx, grid, js):
    print(f"{row['j']:>5}  {row['max_deviation']:>14.6e}  {row['majorant']:>10.4f}")
