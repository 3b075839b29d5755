#!/usr/bin/env python3
"""Partial-sum convergence table for a Gaussian bump.

Projects the bump onto the basis up to a radial order, then reports the
whole-ball L2 error of each partial sum omega_K (all terms with radial
index k <= K) against the true phantom.  The error must decrease
strictly with K; the final column shows the reduction factor per step.
"""

import argparse
import math
import sys

import numpy as np

from calderon3d import BallQuadrature, PhantomSpec, project, synthesize_ball_grid


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kmax", type=int, default=7)
    parser.add_argument("--degree-cap", type=int, default=30)
    parser.add_argument("--sharpness", type=float, default=50.0)
    parser.add_argument("--center", type=float, nargs=3, default=(0.0, 0.3, 0.0))
    args = parser.parse_args(argv)

    quad = BallQuadrature()
    eta = PhantomSpec(
        "gaussian", center=tuple(args.center), sharpness=args.sharpness
    ).build()
    c = project(eta, args.kmax, args.degree_cap, quad)

    x, y, z = quad.cartesian_grid()
    cube = eta(x, y, z)
    norm = math.sqrt(quad.integrate(np.abs(cube) ** 2).real)
    print(f"phantom norm {norm:.6f}; projection has {len(c.entries)} coefficients")
    print()
    print("  K    ||eta - omega_K||   relative    step ratio")
    print("---------------------------------------------------")
    prev = None
    for K in range(args.kmax + 1):
        w = synthesize_ball_grid(c, quad, mode=K)
        err = math.sqrt(quad.integrate(np.abs(cube - w) ** 2).real)
        ratio = "" if prev is None else f"{err / prev:10.4f}"
        print(f"{K:3d}    {err:.6e}      {err / norm:.4e}  {ratio}")
        prev = err
    return 0


if __name__ == "__main__":
    sys.exit(main())
