"""Quadrature of functions of ``f(r e^{i phi})`` over a full circle."""

import math

import numpy as np

from .errors import ExcludedRadiusError
from .handles import pole_locations
from .quadrature import DEFAULT_BUDGET, integrate, sign_change_points

TWO_PI = 2.0 * math.pi
POLE_HIT_RTOL = 1e-13
NEAR_BAND = 0.5
MAX_NEAR = 32
OFFSETS = (0.0, 0.5, 1.0, 2.0, 4.0, 16.0)


def check_radius(h, r):
    """Raise :class:`ExcludedRadiusError` when the circle ``|z| = r`` runs through a pole."""
    if not r > 0:
        raise ValueError("radius must be positive")
    loc, _ = pole_locations(h, r * (1 + 1e-12) + 1e-12)
    if loc.size:
        gap = np.min(np.abs(np.abs(loc) - r))
        if gap < POLE_HIT_RTOL * max(1.0, r):
            raise ExcludedRadiusError(f"circle |z| = {r:.17g} passes through a pole")


def _angles_near(points, r):
    if points.size == 0:
        return np.empty(0)
    rho = np.abs(points)
    gap = np.abs(rho - r)
    near = np.nonzero((gap <= NEAR_BAND * r) & (rho > 0))[0]
    if near.size == 0:
        return np.empty(0)
    # only the closest points produce features narrower than the default subdivision
    near = near[np.argsort(gap[near], kind="stable")[:MAX_NEAR]]
    ang = np.mod(np.angle(points[near]), TWO_PI)
    width = gap[near] / r
    out = [ang]
    for k in OFFSETS[1:]:
        out.append(ang + k * width)
        out.append(ang - k * width)
    return np.mod(np.concatenate(out), TWO_PI)


def circle_breakpoints(h, r):
    """Angles where ``f`` on ``|z| = r`` has peaks or log singularities: poles and known zeros nearby."""
    loc, _ = pole_locations(h, r * (1 + NEAR_BAND))
    pts = [_angles_near(loc, r)]
    if h.zeros_within is not None:
        zs = np.array([z for z, _ in h.zeros_within(r * (1 + NEAR_BAND))], dtype=complex)
        pts.append(_angles_near(zs, r))
    bp = np.unique(np.concatenate(pts)) if pts else np.empty(0)
    return bp[(bp > 0) & (bp < TWO_PI)]


def _grid(breakpoints, n):
    base = np.linspace(0.0, TWO_PI, n + 1)
    return np.unique(np.concatenate([base, breakpoints]))


def log_abs_on_circle(h, r):
    """Vectorized ``phi -> log|f(r e^{i phi})|``."""

    def func(phi):
        return h.logabs(r * np.exp(1j * np.asarray(phi)))

    return func


def circle_integrate(func, h, r, *, atol=1e-10, rtol=1e-10, budget=DEFAULT_BUDGET,
                     extra_breakpoints=(), kink_level=None, grid_points=2048):
    """Integrate ``func(phi)`` over ``[0, 2 pi]`` with breakpoints adapted to ``h`` on ``|z| = r``.

    ``kink_level`` adds the crossings ``log|f| = kink_level`` (found by
    bisection on a grid) as breakpoints; these are the kinks of ``log+``.
    """
    check_radius(h, r)
    bp = circle_breakpoints(h, r)
    if len(extra_breakpoints):
        bp = np.concatenate([bp, np.asarray(extra_breakpoints, dtype=float)])
    if kink_level is not None:
        logabs = log_abs_on_circle(h, r)
        kinks = sign_change_points(lambda p: logabs(p) - kink_level, _grid(bp, grid_points))
        bp = np.concatenate([bp, kinks])
    bp = np.unique(bp)
    return integrate(func, 0.0, TWO_PI, breakpoints=bp, atol=atol, rtol=rtol, budget=budget)
