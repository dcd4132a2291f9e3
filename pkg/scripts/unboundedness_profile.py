#!/usr/bin/env python3
"""|omega_s(pi^(m,-m))| for s = (sigma, -sigma) at n = 2, m = 1..m_max.

For m near 10 the coset count passes the default cap; raise it with --coset-cap.
"""

import argparse
from fractions import Fraction

from sphlab.padic import PrimeContext
from sphlab.positivity import omega_profile

ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
ap.add_argument("--p", type=int, default=2)
ap.add_argument("--sigma", default="1", help="rational like 1/2 or a float")
ap.add_argument("--m-max", type=int, default=8)
ap.add_argument("--coset-cap", type=int, default=None)
args = ap.parse_args()

try:
    sigma = Fraction(args.sigma)
except ValueError:
    sigma = float(args.sigma)
for m, value in omega_profile(sigma, PrimeContext(args.p, 2), args.m_max, cap=args.coset_cap):
    print(f"m={m:3d}  omega={value.real:.12g}{value.imag:+.3g}i  |omega|={abs(value):.12g}")
