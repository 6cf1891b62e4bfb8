#!/usr/bin/env python3
"""Run the full structural check battery and print one line per check.

Thin wrapper over the library-level checks used by `vertstar check`; handy
when iterating on a theta construction because it prints the measured
defect next to the tolerance instead of a bare ok flag.

    python3 scripts/run_checks.py --mode general_vertical --n 2 --seed 3
"""

import argparse

from vertstar.cli import ExperimentConfig, ThetaSpec, TOLERANCES, run_check

CHECKS = ("assoc", "jacobi", "vertical", "flip", "hermitean",
          "positivity", "uncertainty", "pair-consistency")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mode", default="moyal_constant",
                    choices=("moyal_constant", "moyal_fiberwise",
                             "general_vertical"))
    ap.add_argument("--theta", default="constant",
                    choices=("constant", "commuting_compact", "ball_compact"))
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--order", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=50)
    args = ap.parse_args(argv)

    cfg = ExperimentConfig(
        n=args.n, N_lambda=args.order, star_mode=args.mode,
        theta=ThetaSpec(kind=args.theta),
        sample_count=args.count, seed=args.seed)

    failures = 0
    for name in CHECKS:
        rep = run_check(cfg, name)
        status = "ok  " if rep["ok"] else "FAIL"
        tol = TOLERANCES.get(name, 0.0)
        print(f"{status} {name:<17} defect {rep['defect']:.3e}  tol {tol:.0e}")
        failures += 0 if rep["ok"] else 1
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
