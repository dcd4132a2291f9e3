#!/usr/bin/env python3
"""Search for a non-positive-definite omega_{s(j)} and write the certificate.

    python3 scripts/run_witness_search.py --p 2 --n 3 --out witness.json
"""

import argparse
import json
import sys
import time

from sphlab.errors import NotFound
from sphlab.padic import PrimeContext
from sphlab.positivity import SearchConfig, find_nonpd_witness, verify_certificate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--j-min", type=int, default=1)
    ap.add_argument("--j-max", type=int, default=16)
    ap.add_argument("--max-size", type=int, default=8)
    ap.add_argument("--trials", type=int, default=64)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()

    config = SearchConfig(
        j_min=args.j_min,
        j_max=args.j_max,
        max_size=args.max_size,
        trials=args.trials,
        seed=args.seed,
        threads=args.threads,
    )
    start = time.time()
    try:
        cert = find_nonpd_witness(PrimeContext(args.p, args.n), config)
    except NotFound as exc:
        print(f"not found: {exc}", file=sys.stderr)
        for j, lam in sorted(exc.report["min_eigenvalue_per_j"].items()):
            print(f"  j={j:3d}  lowest eigenvalue {lam}", file=sys.stderr)
        return 2
    report = verify_certificate(cert)
    print(f"found after {cert.meta['candidates_tried']} candidates ({time.time() - start:.1f}s)")
    print(f"  j = {cert.meta['j']}, |set| = {cert.size}, min eigenvalue = {cert.min_eigenvalue:.8f}")
    print(f"  re-verified Rayleigh quotient = {report['rayleigh']:.8f}  ok={report['ok']}")
    for g in cert.elements:
        print("  ", g.to_json())
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({**cert.to_json(), "verification": report}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
