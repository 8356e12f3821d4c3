"""Projection moments of the unit cube onto random planes.

A unit p-cube casts a shadow on a uniformly random p-plane. The first two
moments of the shadow volume have closed forms, and their ratio is the
expected distortion constant. This script samples shadows, compares the
Monte Carlo estimates to the closed forms, and verifies the ratio identity.
"""

import numpy as np

from voroscape import (MomentQuery, distortion_constant, moment_closed_form,
                       moment_monte_carlo, sample_stiefel)

rng = np.random.default_rng(2)

print("individual shadow volumes of the unit square in R^3:")
for _ in range(5):
    frame = sample_stiefel(2, 3, rng)
    # the shadow volume is |det| of the frame restricted to the first p axes
    vol = abs(np.linalg.det(frame.rows[:, :2]))
    print(f"  {vol:.4f}")

print("\nMonte Carlo vs closed form (100000 samples each):")
print("  p  d  j        estimate      closed        z")
for p, d in [(1, 2), (1, 3), (2, 3), (2, 5), (3, 6)]:
    for j in (1, 2):
        q = MomentQuery(p, d, j)
        est = moment_monte_carlo(q, 100000, seed=[p, d, j])
        cf = moment_closed_form(q)
        z = (est.mean - cf) / est.stderr
        print(f"  {p}  {d}  {j}   {est.mean:.6f}+-{est.stderr:.6f}"
              f"  {cf:.6f}  {z:+.2f}")

print("\nthe second moment is exactly 1 over a binomial coefficient:")
for p, d in [(1, 4), (2, 4), (2, 6), (3, 7)]:
    m2 = moment_closed_form(MomentQuery(p, d, 2))
    print(f"  p={p} d={d}: {m2:.10f},  reciprocal {1 / m2:.4f}")

print("\nfirst over second moment reproduces the distortion constant:")
for p, d in [(1, 2), (1, 3), (2, 3), (2, 5), (3, 8)]:
    m1 = moment_closed_form(MomentQuery(p, d, 1))
    m2 = moment_closed_form(MomentQuery(p, d, 2))
    print(f"  p={p} d={d}: M1/M2 = {m1 / m2:.12f}"
          f"   D = {distortion_constant(p, d):.12f}")
