"""Nevanlinna characteristics of meromorphic handles.

Poles are counted with multiplicity. ``N(r, f)`` is the exact step
integral, ``m(r, f)`` a circle quadrature of ``log+|f|``, and ``N(r, 1/f)``
follows from Jensen's formula

    N(r, 1/f) = N(r, f) + mean_{|z|=r} log|f| - log|f(0)|

which needs ``f(0)`` finite and nonzero.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .circle import TWO_PI, circle_integrate, log_abs_on_circle
from .errors import ConvergenceError
from .handles import pole_locations
from .zero_finder import Contour, zero_count_in

COLUMNS = ("r", "n", "N", "m", "T", "zero_count", "N_zeros", "quad_err")


def pole_counting(h, r):
    """``n(r, f)``: poles with ``|t| <= r`` counted with multiplicity."""
    if not r > 0:
        raise ValueError("radius must be positive")
    _, mult = pole_locations(h, r)
    return int(mult.sum())


def _step_integral(loc, mult, r):
    rho = np.abs(loc)
    if np.any(rho == 0):
        raise ValueError("pole at the origin; shift the function so that f(0) is finite")
    inside = rho <= r
    return float(np.sum(mult[inside] * np.log(r / rho[inside])))


def integrated_counting(h, r):
    """``N(r, f) = sum_{|t| <= r} mult * log(r/|t|)``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    loc, mult = pole_locations(h, r)
    return _step_integral(loc, mult, r)


def proximity(h, r, tol=1e-9, *, budget=None):
    """``m(r, f)``: circle mean of ``log+|f|`` to absolute accuracy ``tol``."""
    res = _proximity(h, r, tol, budget)
    return res.value / TWO_PI


def _proximity(h, r, tol, budget):
    logabs = log_abs_on_circle(h, r)

    def integrand(phi):
        return np.maximum(logabs(phi), 0.0)

    kwargs = {} if budget is None else {"budget": budget}
    res = circle_integrate(integrand, h, r, atol=tol * TWO_PI, rtol=0.0, kink_level=0.0, **kwargs)
    if not res.converged:
        raise ConvergenceError(f"m(r) quadrature at r={r:g} stalled at error {res.error / TWO_PI:.3g}")
    return res


def characteristic(h, r, tol=1e-9):
    """``(N, m, T)`` at radius ``r``."""
    N = integrated_counting(h, r)
    m = proximity(h, r, tol)
    return N, m, N + m


def mean_log_abs(h, r, tol=1e-9):
    """``(1/2pi) int log|f(r e^{i phi})| dphi`` and its error estimate."""
    logabs = log_abs_on_circle(h, r)
    res = circle_integrate(logabs, h, r, atol=tol * TWO_PI, rtol=0.0)
    if not res.converged:
        raise ConvergenceError(f"log|f| quadrature at r={r:g} stalled at error {res.error / TWO_PI:.3g}")
    return res.value / TWO_PI, res.error / TWO_PI


def zero_integrated_counting(h, r, tol=1e-9):
    """``N(r, 1/f)`` by Jensen's formula; returns ``(value, error)``."""
    log0 = float(h.logabs(np.asarray(0j)))
    if not math.isfinite(log0):
        raise ValueError("Jensen's formula needs f(0) finite and nonzero")
    mean, err = mean_log_abs(h, r, tol)
    return integrated_counting(h, r) + mean - log0, err


def integrated_count_bracket(radii, counts):
    """Bounds on ``int_0^r n(t)/t dt`` at ``r = radii[-1]`` from counts ``n(radii[i])``.

    ``n`` is nondecreasing, so using the left or right count on each grid cell
    brackets the integral. The upper bound is finite only if ``counts[0] == 0``.
    """
    radii = np.asarray(radii, dtype=float)
    counts = np.asarray(counts, dtype=float)
    logs = np.log(radii[1:] / radii[:-1])
    lower = float(np.sum(counts[:-1] * logs))
    upper = float(np.sum(counts[1:] * logs)) if counts[0] == 0 else math.inf
    return lower, upper


@dataclass
class CharacteristicTable:
    """Rows ``(r, n, N, m, T, zero_count, N_zeros, quad_err)``; missing entries are NaN."""

    rows: list = field(default_factory=list)
    tol: float = 1e-9

    def column(self, name):
        k = COLUMNS.index(name)
        return np.array([row[k] for row in self.rows], dtype=float)

    @property
    def radii(self):
        return self.column("r")

    def csv_rows(self):
        return [tuple(row) for row in self.rows]


def characteristic_table(h, radii, tol=1e-9, *, zeros=True, winding=True):
    """Characteristic table on a strictly increasing radius grid.

    ``zeros`` adds ``N(r, 1/f)`` by Jensen's formula; ``winding`` adds the
    argument-principle zero count on each circle.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    table = CharacteristicTable(tol=tol)
    for r in radii:
        n = pole_counting(h, r)
        N = integrated_counting(h, r)
        mres = _proximity(h, r, tol, None)
        m = mres.value / TWO_PI
        err = mres.error / TWO_PI
        zc = math.nan
        Nz = math.nan
        if winding:
            zc = zero_count_in(h, Contour.circle(0.0, r))
        if zeros:
            Nz, e = zero_integrated_counting(h, r, tol)
            err += e
        table.rows.append((float(r), n, N, m, N + m, zc, Nz, err))
    return table


@dataclass(frozen=True)
class OrderEstimate:
    order: float
    residual: float
    radii_used: int

    def __float__(self):
        return self.order


def order_from_samples(radii, values, *, top_half=True):
    """Least-squares slope of ``log(values)`` against ``log(radii)``."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(~(values > 0)):
        raise ValueError("order estimate needs positive values")
    if top_half:
        k = radii.size // 2
        radii, values = radii[k:], values[k:]
    x = np.log(radii)
    y = np.log(values)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(np.abs(A @ coef - y))) if x.size > 2 else 0.0
    return OrderEstimate(float(coef[0]), resid, int(x.size))


def order_estimate(table, column="T"):
    """Growth order of a table column from the top half of its radii (needs 6 rows over 2 decades)."""
    r = table.radii
    # radii snapped outside the exclusion set move by a relative amount far below 1e-3
    if r.size < 6 or r[-1] / r[0] < 100 * (1 - 1e-3):
        raise ValueError("need at least 6 rows spanning 2 decades")
    return order_from_samples(r, table.column(column))


def defect_estimate(table):
    """``(1 - max ratio over the top half, ratios)`` with ratios ``N(r,1/f)/T(r,f)``."""
    Nz = table.column("N_zeros")
    if np.any(np.isnan(Nz)):
        raise ValueError("table has no N(r, 1/f) column")
    ratios = Nz / table.column("T")
    k = ratios.size // 2
    return float(1.0 - np.max(ratios[k:])), ratios
