"""Zeros of Bi, the ODE behind them, and the rays they crowd toward.

Run: python3 demos/airy_rays.py
"""

import math

import numpy as np

from kslab import airy, bi_zeros, critical_rays, ray_distance_stats, recover_Q, sector_test
from kslab.entire_zoo import bi_entire

# Bi solves g'' = z g, so Q = -z: three critical rays at pi/3, pi, -pi/3.
Q, fit = recover_Q(bi_entire(30), [1.0])
print("recovered Q coefficients:", np.round(Q.coef, 12), " fit error", f"{fit:.1e}")
rays = critical_rays([0.0, -1.0])
print("critical ray angles / pi:", np.round(rays.angles / math.pi, 12))

# The complex zeros beta_n approach the ray arg z = pi/3. None of them falls in
# the sector |arg z| < pi/4, so a sector that narrow says nothing about them.
beta = bi_zeros("upper_complex", 10)
d = ray_distance_stats(beta, rays)
for n, (b, dist) in enumerate(zip(beta, d), start=1):
    print(f"beta_{n:<2d} = {b.real:9.4f} {b.imag:+9.4f}i   distance to ray {dist:.4f}")

v = sector_test(beta, math.pi / 4, 1)
print("\nzeros inside the sector |arg z| < pi/4:", v.inside, f"({v.outside}/{v.total} outside)")

# Wronskian sanity check at a few complex points
z = np.array([0.5, -3.0 + 1j, 2.0 + 2.0j])
w = airy("Ai", z) * airy("Bi", z, derivative=True) - airy("Ai", z, derivative=True) * airy("Bi", z)
print("max |W - 1/pi|:", f"{np.abs(w - 1 / math.pi).max():.1e}")
