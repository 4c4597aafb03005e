#!/usr/bin/env python3
"""Sweep the critical-tail fits for the generalized Bayes families.

For the unknown-scale member the fitted coefficient of beta_star / log w
should recover b; for the known-variance member the scaled gap
(log v)(p - 2 - psi_b(v)) should approach 2b.  Both converge only like
1/log, so the residual columns show how slow that is.
"""

import argparse

import numpy as np

from sure_boundary.core import ProblemDims, constants
from sure_boundary.families import GBUnknown, make_shrinkage, tail_profile
from sure_boundary.known_variance import psi_tail_fit


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--w-max", type=float, default=1e8)
    args = ap.parse_args()

    dims = ProblemDims(args.p, args.n)
    k = constants(dims)
    grid = np.geomspace(1e3, args.w_max, 48)

    print(f"unknown scale (p={dims.p}, n={dims.n}, beta_star={k.beta_star:.6f})")
    print(f"{'b':>5s} {'b_hat':>10s} {'rel err':>9s} {'fit resid':>10s}")
    for b in (0.5, 1.0, 2.0):
        phi = make_shrinkage(GBUnknown(a=-2.0, b=b), dims)
        prof = tail_profile(phi, dims, grid)
        print(f"{b:5.2f} {prof.b_hat:10.4f} {abs(prof.b_hat-b)/b:9.3%} "
              f"{prof.fit_quality:10.5f}")

    print(f"\nknown variance (p={args.p}), target 2b")
    print(f"{'b':>5s} {'estimate':>10s} {'rel err':>9s}")
    for b in (0.5, 1.0, 2.0):
        rep = psi_tail_fit(b, args.p)
        rel = abs(rep.limit_estimate - rep.target) / rep.target
        print(f"{b:5.2f} {rep.limit_estimate:10.4f} {rel:9.3%}")


if __name__ == "__main__":
    main()
