#!/usr/bin/env python3
"""Self-interaction constants of the discrete logarithmic kernel.

kappa:   mean of -log|x - y| over x, y uniform in the unit square.
segment: mean of -log|s - t| over s, t uniform in the unit interval.

For a square cell of side h the mean is -log(h) + kappa, for a segment of
length w it is -log(w) + segment.

The 4-D square average is reduced exactly to a 2-D integral: the difference
x - y of two independent uniform points has density (1-|u|)(1-|v|) on
[-1, 1]^2, so

    kappa = -4 * int_0^1 int_0^1 (1-u)(1-v) * log(sqrt(u^2 + v^2)) du dv.

A plain 4-D midpoint rule is evaluated as a cross-check (it converges slowly
because of the log singularity on the diagonal, so it only confirms the
leading digits).

Usage: compute_kappa.py [output.cpp]
"""

import itertools
import sys

from mpmath import mp, log, quad, sqrt

mp.dps = 30


def kappa_reduced():
    return -4 * quad(lambda u, v: (1 - u) * (1 - v) * log(sqrt(u * u + v * v)), [0, 1], [0, 1])


def segment_reduced():
    return -2 * quad(lambda u: (1 - u) * log(u), [0, 1])


def kappa_midpoint_4d(m=12):
    pts = [(k + 0.5) / m for k in range(m)]
    # Offset the second point's lattice by half a cell so no pair coincides.
    pts2 = [(k + 0.25) / m for k in range(m)]
    total = 0.0
    for x1, y1 in itertools.product(pts, pts):
        for x2, y2 in itertools.product(pts2, pts2):
            total += -0.5 * float(log((x1 - x2) ** 2 + (y1 - y2) ** 2))
    return total / m**4


def main():
    kappa = kappa_reduced()
    seg = segment_reduced()
    check = kappa_midpoint_4d()
    print(f"kappa   = {mp.nstr(kappa, 20)}")
    print(f"segment = {mp.nstr(seg, 20)}")
    print(f"4-D midpoint cross-check (m=12): {check:.6f}")
    if abs(check - float(kappa)) > 2e-2:
        raise SystemExit("4-D cross-check disagrees with the reduced integral")
    if len(sys.argv) > 1:
        with open(sys.argv[1], "w") as f:
            f.write("// Generated by tools/oracles/compute_kappa.py. Do not edit.\n")
            f.write('#include "equilib/potential.hpp"\n\n')
            f.write("namespace equilib {\n\n")
            f.write(f"const double kCellSelfLogConstant = {mp.nstr(kappa, 17)};\n")
            f.write(f"const double kSegmentSelfLogConstant = {mp.nstr(seg, 17)};\n\n")
            f.write("}  // namespace equilib\n")


if __name__ == "__main__":
    main()
