"""The correspondence ``f = P/g**2`` <-> ``P g'' - P' g' + Q g = 0``.

Given an entire ``g`` with simple zeros and a polynomial ``P``, the kernel sum
``sum P(t)/g'(t)**2/(z-t)**2`` over the zeros of ``g`` equals ``P/g**2`` when
``Q = P' g'/g - P g''/g`` is a polynomial. This module checks the residue
condition at the zeros, recovers ``Q`` by least squares, and works out the
rays along which zeros of solutions accumulate.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import Polynomial

from .errors import IllConditionedFitError, NearMultipleZeroError, NoCriticalRaysError

PolynomialC = Polynomial

COEFF_TRUNCATION = 1e-8
MAX_CONDITION = 1e10
EXPONENT_MARGIN = 0.05


def as_polynomial(p):
    """Coerce a coefficient list (constant term first) or scalar to a complex polynomial."""
    if isinstance(p, Polynomial):
        return Polynomial(np.asarray(p.coef, dtype=complex))
    return Polynomial(np.atleast_1d(np.asarray(p, dtype=complex)))


def degree(p):
    """Degree ignoring exactly-zero leading coefficients (``-1`` for the zero polynomial)."""
    c = np.asarray(p.coef)
    nz = np.nonzero(c)[0]
    return int(nz[-1]) if nz.size else -1


def polynomial_document(p):
    """``[[re, im], ...]`` coefficients, constant term first."""
    return [[float(a.real), float(a.imag)] for a in np.asarray(p.coef, dtype=complex)]


@dataclass(frozen=True)
class ResidueReport:
    zeros: np.ndarray
    residuals: np.ndarray
    tol: float

    @property
    def passed(self):
        return bool(np.all(self.residuals <= self.tol))

    @property
    def worst(self):
        return float(self.residuals.max()) if self.residuals.size else 0.0


def verify_zero_residue_condition(g, P, count, tol=1e-9):
    """Check ``P'(t) g'(t) - P(t) g''(t) = 0`` at the first ``count`` zeros of ``g``.

    Residuals are scaled by ``max(|P' g'|, |P g''|, |P g'|)`` at each zero.
    """
    P = as_polynomial(P)
    t = g.first_zeros(count)
    d1 = g.derivative_at(t)
    small = np.abs(d1) < g.simple_zero_threshold
    if small.any():
        k = int(np.argmax(small))
        raise NearMultipleZeroError(f"|g'| = {abs(d1[k]):.3g} at zero {t[k]!r}")
    d2 = np.asarray(g.second_derivative(t), dtype=complex)
    a = P.deriv()(t) * d1
    b = P(t) * d2
    scale = np.maximum.reduce([np.abs(a), np.abs(b), np.abs(P(t) * d1)])
    res = np.abs(a - b) / np.where(scale > 0, scale, 1.0)
    return ResidueReport(t, res, float(tol))


def default_samples(g, radii=(2.0, 3.0), points=24):
    """Two concentric circles of sample points, each point nudged off nearby zeros of ``g``."""
    phi = 2 * math.pi * (np.arange(points) + 0.5) / points
    out = []
    for k, r in enumerate(radii):
        # stagger the circles so no two samples share an angle
        z = r * np.exp(1j * (phi + k * math.pi / (3 * points)))
        zs = np.asarray(g.zeros(max(radii) + 1.0), dtype=complex)
        if zs.size:
            for _ in range(8):
                near = np.min(np.abs(z[:, None] - zs[None, :]), axis=1) < 0.05 * r
                if not near.any():
                    break
                z[near] *= np.exp(0.5j * math.pi / points)
        out.append(z)
    return np.concatenate(out)


def q_from_g(g, P, z):
    """``P' g'/g - P g''/g`` at ``z``."""
    P = as_polynomial(P)
    z = np.asarray(z, dtype=complex)
    v = np.asarray(g.value(z), dtype=complex)
    return (P.deriv()(z) * g.derivative(z) - P(z) * g.second_derivative(z)) / v


def recover_Q(g, P, sample_points=None, degree_cap=8):
    """Least-squares polynomial fit of degree ``<= degree_cap`` to ``P' g'/g - P g''/g``.

    Coefficients below ``1e-8`` times the largest are set to zero. Returns
    ``(Q, residual)`` with the maximum absolute fit error at the samples.
    """
    z = default_samples(g) if sample_points is None else np.asarray(sample_points, dtype=complex)
    if z.size < 2 * (degree_cap + 1):
        raise ValueError(f"need at least {2 * (degree_cap + 1)} samples for degree {degree_cap}")
    v = np.asarray(g.value(z), dtype=complex)
    floor = 1e-8 * np.max(np.abs(v))
    if np.any(np.abs(v) < floor):
        raise IllConditionedFitError("a sample point sits on a zero of g; move the samples")
    rhs = q_from_g(g, P, z)
    s = float(np.max(np.abs(z)))
    V = np.vander(z / s, degree_cap + 1, increasing=True)
    cond = np.linalg.cond(V)
    if not cond < MAX_CONDITION:
        raise IllConditionedFitError(f"Vandermonde condition {cond:.3g}; spread the samples over more radii")
    b, *_ = np.linalg.lstsq(V, rhs, rcond=None)
    a = b / s ** np.arange(degree_cap + 1)
    a[np.abs(a) < COEFF_TRUNCATION * np.max(np.abs(a))] = 0
    Q = Polynomial(a)
    Q = Polynomial(a[:max(degree(Q), 0) + 1])
    return Q, float(np.max(np.abs(Q(z) - rhs)))


def ode_residual(g, P, Q, points):
    """Max over ``points`` of ``|P g'' - P' g' + Q g|`` relative to the largest of its three terms."""
    P, Q = as_polynomial(P), as_polynomial(Q)
    z = np.asarray(points, dtype=complex)
    t1 = P(z) * g.second_derivative(z)
    t2 = P.deriv()(z) * g.derivative(z)
    t3 = Q(z) * g.value(z)
    scale = np.maximum.reduce([np.abs(t1), np.abs(t2), np.abs(t3)])
    err = np.abs(t1 - t2 + t3)
    return float(np.max(err / np.where(scale > 0, scale, 1.0)))


@dataclass(frozen=True)
class CriticalRayFamily:
    """Half-lines ``base + s e^{i angle}``, ``s >= 0``."""

    base: complex
    angles: np.ndarray
    degree: int

    def distances(self, points):
        """Distance of each point to each ray, shape ``(len(points), len(angles))``."""
        w = np.atleast_1d(np.asarray(points, dtype=complex)) - self.base
        rot = w[:, None] * np.exp(-1j * self.angles)[None, :]
        return np.where(rot.real > 0, np.abs(rot.imag), np.abs(rot))

    def to_document(self):
        return {"base": [self.base.real, self.base.imag], "angles": [float(a) for a in self.angles],
                "degree": self.degree}


def critical_rays(Q):
    """Rays ``arg(z - base) = (2 pi j - arg a_m)/(m+2)``, ``base = -a_{m-1}/(m a_m)``."""
    Q = as_polynomial(Q)
    m = degree(Q)
    if m < 1:
        raise NoCriticalRaysError("Q is constant; solutions are trigonometric and have no critical rays")
    a = Q.coef
    base = complex(-a[m - 1] / (m * a[m]))
    j = np.arange(m + 2)
    angles = (2 * math.pi * j - np.angle(a[m])) / (m + 2)
    return CriticalRayFamily(base, angles, m)


def ray_distance_stats(points, rays):
    """Distance of each point to the nearest ray of the family."""
    return np.min(rays.distances(points), axis=1)


@dataclass(frozen=True)
class SectorVerdict:
    inside: bool
    outside: int
    outside_in_tail: int
    total: int


def sector_test(points, alpha, m):
    """Do the points, apart from finitely many, lie in ``|arg z| < alpha`` or ``|arg z - pi| < alpha``?

    "Finitely many" is judged on the larger half of the points by modulus.
    """
    if not 0 < alpha < math.pi / (m + 2):
        raise ValueError(f"alpha must lie in (0, pi/{m + 2})")
    z = np.asarray(points, dtype=complex)
    z = z[np.argsort(np.abs(z), kind="stable")]
    ang = np.abs(np.angle(z))
    out = ~((ang < alpha) | (math.pi - ang < alpha))
    tail = out[z.size // 2:]
    return SectorVerdict(not tail.any(), int(out.sum()), int(tail.sum()), int(z.size))


def order_from_degree(m):
    """Order ``(m+2)/2`` of solutions of ``g'' + Q g = 0`` with ``deg Q = m``."""
    if m < 0:
        raise ValueError("degree must be nonnegative")
    return Fraction(m + 2, 2)


def _nearest_half_integer(x, start):
    # nearest element of {start, start + 1/2, start + 1, ...}
    k = max(round(2 * x), 2 * start)
    return k / 2


@dataclass(frozen=True)
class ExponentEstimate:
    exponent: float
    residual: float
    nearest: float
    distance: float
    nearest_with_zero: float
    distance_with_zero: float

    @property
    def excluded_both_ways(self):
        """Exponent clearly outside the half-integer set whether or not it includes 0."""
        return min(self.distance, self.distance_with_zero) > EXPONENT_MARGIN


def convergence_exponent_estimate(points):
    """Slope of ``log n(r)`` against ``log r`` from the larger half of the points.

    ``nearest``/``distance`` use ``{1, 3/2, 2, ...}``; the ``_with_zero``
    fields use ``{0, 1/2, 1, ...}``.
    """
    rho = np.sort(np.abs(np.asarray(points, dtype=complex)))
    rho = rho[rho > 0]
    if rho.size < 30:
        raise ValueError("need at least 30 nonzero points")
    if rho[-1] / rho[0] < 100:
        raise ValueError("points must span at least 2 decades of modulus")
    n = np.arange(1, rho.size + 1)
    k = rho.size // 2
    x, y = np.log(rho[k:]), np.log(n[k:])
    if np.ptp(x) == 0:
        raise ValueError("degenerate spread of moduli")
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rho_hat = float(coef[0])
    resid = float(np.max(np.abs(A @ coef - y)))
    near1 = _nearest_half_integer(rho_hat, 1)
    near0 = _nearest_half_integer(rho_hat, 0)
    return ExponentEstimate(rho_hat, resid, near1, abs(rho_hat - near1), near0, abs(rho_hat - near0))


def _pole_sample(f, count):
    if f.poles.finite:
        t, _ = f.poles.within(math.inf)
        return np.asarray(t, dtype=complex)
    R = 1.0
    while True:
        t, _ = f.poles.within(R)
        if t.size >= count or R > 1e12:
            return np.asarray(t, dtype=complex)
        R *= 2.0


def rays_approached(points, rays):
    """Do distances to the family shrink along the points (sorted by modulus)?"""
    z = np.asarray(points, dtype=complex)
    z = z[np.argsort(np.abs(z), kind="stable")]
    d = ray_distance_stats(z, rays)
    q = max(1, d.size // 4)
    return bool(np.median(d[-q:]) < np.median(d[:q]))


@dataclass(frozen=True)
class ZeroExistenceVerdict:
    exponent: ExponentEstimate
    exponent_condition: bool
    ray_condition: bool

    @property
    def verdict(self):
        if self.exponent_condition or self.ray_condition:
            return "has-zero"
        return "inconclusive"


def corollary_fer_check(f, rays_candidates=(), sample=400):
    """Sufficient conditions for the kernel sum ``f`` to have a zero.

    Fires on a convergence exponent of the poles outside the half-integers
    (under both conventions for 0), or when the poles fail to approach every
    candidate ray family. Only sufficient: "inconclusive" is a valid answer.
    """
    t = _pole_sample(f, sample)
    est = convergence_exponent_estimate(t)
    cands = [r if isinstance(r, CriticalRayFamily) else critical_rays(r) for r in rays_candidates]
    ray_fires = bool(cands) and not any(rays_approached(t, r) for r in cands)
    return ZeroExistenceVerdict(est, est.excluded_both_ways, ray_fires)
