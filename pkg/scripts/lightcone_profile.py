#!/usr/bin/env python3
"""Sweep the deformed light cone over a grid of spatial separations.

For each lambda the script tabulates the classical cone |s| against the
deformed locus v0 = sqrt(lambda + |s|^2) where the expectation of the
Lorentz square vanishes, and optionally re-derives each v0 by root finding
on the smeared expectation instead of the closed form.

    python3 scripts/lightcone_profile.py --lambdas 0.01 0.04 --points 40 \
        --out lightcone.csv
"""

import argparse
import csv
import sys

import numpy as np

from vertstar.states import lightcone_profile


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0.01, 0.04])
    ap.add_argument("--s-max", type=float, default=3.0)
    ap.add_argument("--points", type=int, default=40)
    ap.add_argument("--verify", action="store_true",
                    help="cross-check the closed form by root finding")
    ap.add_argument("--out", default=None, help="CSV path (default: stdout)")
    args = ap.parse_args(argv)

    grid = np.linspace(0.0, args.s_max, args.points)
    rows = []
    for lam in args.lambdas:
        for s, classical, deformed in lightcone_profile(lam, grid,
                                                        verify=args.verify):
            rows.append((lam, s, classical, deformed, deformed - classical))

    sink = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(sink)
        w.writerow(["lambda", "spatial_norm", "v0_classical", "v0_deformed",
                    "gap"])
        for row in rows:
            w.writerow([repr(float(x)) for x in row])
    finally:
        if args.out:
            sink.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
