"""Zeros versus poles for a kernel sum with poles n^2 and coefficients 2^-n.

The coefficients do not sum to zero, so the zeros should keep pace with the poles:
both counting functions grow like r^(1/2), and the defect proxy stays small.

Run: python3 demos/keldysh_growth.py
"""

import numpy as np

from kslab import (KernelSum, build_exclusion_set, characteristic_table, defect_estimate,
                   order_estimate)

ks = KernelSum.generated("power", exponent=2, coefficients="geometric", rate=0.5)
h = ks.handle()

F = build_exclusion_set(ks.poles, 1.0, 2e4)
radii = np.array([F.snap_outside(r) for r in np.geomspace(100, 1e4, 9)])
table = characteristic_table(h, radii, 1e-9)

print("       r      n(r,f)    N(r,f)   N(r,1/f)")
for row in table.rows:
    r, n, N, m, T, zc, Nz, err = row
    print(f"{r:10.1f} {n:8d} {N:10.3f} {Nz:10.3f}")

print("\norder of N(r,f):   ", round(float(order_estimate(table, "N")), 3))
print("order of N(r,1/f): ", round(float(order_estimate(table, "N_zeros")), 3))
delta, _ = defect_estimate(table)
print("defect proxy:      ", round(delta, 3))
