"""The expected distortion constant and its exact forms.

Prints the constant table for probe dimension p against ambient dimension d,
the exact symbolic form of each entry, and the high-dimension behavior of
the scaled p=1 column. Entries with even p and even d are plain binomial
coefficients; odd d gives rationals; the remaining cases carry a factor pi.
"""

from math import pi, sqrt

from voroscape import (distortion_constant, distortion_exact_string,
                       distortion_table)

D_MAX = 8

print("value table (rows p, columns d):")
table = distortion_table(D_MAX)
header = "p\\d " + "".join(f"{d:>9d}" for d in range(1, D_MAX + 1))
print(header)
for p in range(1, D_MAX + 1):
    cells = []
    for d in range(1, D_MAX + 1):
        v = table[p - 1, d - 1]
        cells.append("        ." if d < p else f"{v:9.4f}")
    print(f"{p:>3d} " + "".join(cells))

print("\nexact forms along a few diagonals:")
for p, d in [(1, 2), (1, 3), (2, 4), (2, 6), (3, 7), (3, 10), (4, 8)]:
    print(f"  p={p} d={d:>2d}: {distortion_exact_string(p, d):>12s}"
          f"  = {distortion_constant(p, d):.12f}")

print("\neven p, even d entries reproduce the Pascal triangle:")
for d in (2, 4, 6, 8):
    row = [f"{distortion_constant(p, d):.0f}" for p in range(0, d + 1, 2)]
    print(f"  d={d}: " + " ".join(row))

print("\nline constant scaled by sqrt(pi/(2d)) falls toward 1:")
for d in (2, 5, 10, 25, 50, 100, 200):
    v = distortion_constant(1, d) * sqrt(pi / (2 * d))
    print(f"  d={d:>3d}: {v:.6f}")
