"""Good radii: circles on which a second-order kernel sum has small L1 mean.

Pole mass is grouped into annuli ``base**k <= |t| < base**(k+1)``; a sparse
subsequence of annuli with small mass is selected, and on each selected
scale the radius minimizing the circle integral of ``|f|`` is picked from
a geometric grid, avoiding the exclusion set around pole moduli.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .circle import TWO_PI, check_radius, circle_breakpoints, circle_integrate
from .errors import (ExcludedRadiusError, NormalizationError, SelectionError,
                     ToleranceUnreachable)
from .kernel_sum import KernelSum, build_exclusion_set
from .nevanlinna import proximity
from .quadrature import superlevel_measure

SEARCH_POINTS = 64


@dataclass(frozen=True)
class OctaveSums:
    """``a[k] = sum |c|/|t|**2`` over ``base**k <= |t| < base**(k+1)``, ``k = 0..k_max``.

    ``tail`` bounds the mass beyond ``base**(k_max+1)``.
    """

    base: float
    a: np.ndarray
    tail: float = 0.0

    @property
    def k_max(self):
        return self.a.size - 1


def octave_tail_sums(poles, base, k_max):
    """Annulus masses from the explicit terms plus a certified bound on the rest."""
    if not base > 1:
        raise ValueError("base must exceed 1")
    if isinstance(poles, KernelSum):
        poles = poles.poles
    top = float(base) ** (k_max + 1)
    try:
        t, c = poles.within(top)
    except ToleranceUnreachable as exc:
        raise SelectionError(f"k_max = {k_max} lies beyond what the pole generator can certify") from exc
    rho = np.abs(t)
    w = np.abs(c) / rho ** 2
    keep = (rho >= 1.0) & (rho < top)
    k = np.floor(np.log(rho[keep]) / math.log(base)).astype(int)
    # guard floating-point edges of log
    k = np.where(float(base) ** (k + 1) <= rho[keep], k + 1, k)
    k = np.where(float(base) ** k > rho[keep], k - 1, k)
    a = np.bincount(k, weights=w[keep], minlength=k_max + 1)[:k_max + 1]
    return OctaveSums(float(base), a.astype(float), float(poles.abs_tail(top, 2)))


def dyadic_block(k):
    """Block ``[2**m + 1, 2**(m+1)]`` containing ``k >= 2``; ``k = 1`` is its own block."""
    if k < 1:
        raise ValueError("block indices start at 1")
    if k == 1:
        return 1, 1
    m = (k - 1).bit_length() - 1
    return 2 ** m + 1, 2 ** (m + 1)


def good_indices(a):
    """Boolean mask over ``k = 1..k_max`` of ``a[k] <= sqrt(block sum)/k``."""
    a = np.asarray(a, dtype=float)
    good = np.zeros(a.size, dtype=bool)
    k = 1
    while k < a.size:
        lo, hi = dyadic_block(k)
        if hi >= a.size:
            break
        ks = np.arange(lo, hi + 1)
        bound = math.sqrt(a[lo:hi + 1].sum()) / ks
        good[lo:hi + 1] = a[lo:hi + 1] <= bound
        k = hi + 1
    return good


def select_subsequence(a, count):
    """Indices ``k_1 < k_2 < ...`` with ``n <= k_n <= 2n`` and ``a[k_n] <= sqrt(block sum)/k_n``.

    Each ``k_n`` is the smallest admissible index above ``k_{n-1}`` and at
    least ``n``.
    """
    a = a.a if isinstance(a, OctaveSums) else np.asarray(a, dtype=float)
    if count < 1:
        return []
    if 2 * count >= a.size:
        raise SelectionError(f"{count} indices need a certified range up to k = {2 * count}")
    good = good_indices(a)
    out = []
    prev = 0
    for n in range(1, count + 1):
        k = max(prev + 1, n)
        while k <= 2 * n and not good[k]:
            k += 1
        if k > 2 * n:
            raise SelectionError(f"no admissible index in [{max(prev + 1, n)}, {2 * n}] for n = {n}")
        out.append(k)
        prev = k
    return out


def block_sum(a, k):
    a = a.a if isinstance(a, OctaveSums) else np.asarray(a, dtype=float)
    lo, hi = dyadic_block(k)
    return float(a[lo:hi + 1].sum())


def _require_outside(F, r):
    if F is not None and F.contains(r):
        raise ExcludedRadiusError(f"radius {r:.17g} lies in the exclusion set")


def circle_lp(h, r, p, tol=1e-10, *, F=None, rtol=1e-10):
    """``int_0^{2pi} |f(r e^{i phi})|**p dphi`` for ``0 < p <= 1``."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    _require_outside(F, r)

    def integrand(phi):
        return np.abs(h.value(r * np.exp(1j * phi))) ** p

    res = circle_integrate(integrand, h, r, atol=tol, rtol=rtol)
    return res.value


def circle_l1(h, r, tol=1e-10, *, F=None, rtol=1e-10):
    """``int_0^{2pi} |f(r e^{i phi})| dphi``."""
    return circle_lp(h, r, 1.0, tol, F=F, rtol=rtol)


def keldysh_angular_measure(f, r, tol=1e-10, *, S=None):
    """Measure of ``{phi : |z**2 f(z)/S - 1| >= 1/2}`` on ``|z| = r``; returns ``(measure, S)``.

    ``S`` defaults to the certified coefficient sum of ``f``.
    """
    if S is None:
        S, err = f.coefficient_sum()
        total = float(np.sum(np.abs(f.poles.within(max(r, 1.0))[1])))
        if abs(S) <= max(1e3 * err, 1e-12 * max(total, 1e-300)):
            raise NormalizationError("coefficient sum vanishes; the angular diagnostic needs a nonzero sum")
    h = f.handle()
    check_radius(h, r)

    def deviation(phi):
        z = r * np.exp(1j * np.asarray(phi))
        return np.abs(z * z * h.value(z) / S - 1.0)

    grid = np.unique(np.concatenate([np.linspace(0.0, TWO_PI, 4097), circle_breakpoints(h, r)]))
    measure, _ = superlevel_measure(deviation, 0.0, TWO_PI, 0.5, grid=grid)
    return measure, complex(S)


def log_circle_diagnostic(h, r, *, F=None, tol=1e-9):
    """``m(r, f) / log r``."""
    if not r > 1:
        raise ValueError("radius must exceed 1")
    _require_outside(F, r)
    return proximity(h, r, tol) / math.log(r)


@dataclass
class GoodRadiusReport:
    """Rows ``(j, k_j, R_j, r_j, I, measure)``."""

    rows: list = field(default_factory=list)
    mode: str = "octave"
    delta: float = math.nan

    def column(self, name):
        k = ("j", "k_j", "R_j", "r_j", "I", "measure").index(name)
        return np.array([row[k] for row in self.rows], dtype=float)

    def csv_rows(self):
        return [tuple(row) for row in self.rows]


def _search_grid(F, lo, hi):
    grid = np.geomspace(lo, hi, SEARCH_POINTS)
    snapped = np.unique([F.snap_outside(r) for r in grid])
    return snapped[snapped <= hi * (1 + 1e-9)]


def _mode_params(mode, delta):
    """``(base, stretch, factor, spacing)``: ``R_j = stretch * base**k_j``, search ``[R_j, factor R_j]``."""
    if mode == "octave":
        return 8.0, 2.0, 2.0, 4.0
    if mode == "delta":
        if delta is None or not delta > 0:
            raise ValueError("delta mode needs delta > 0")
        return (1.0 + delta) ** 3, 1.0 + delta, 1.0 + delta, 1.0 + delta
    raise ValueError("mode must be 'octave' or 'delta'")


def selected_scales(f, count=6, mode="octave", delta=None):
    """Selected indices ``k_j`` for ``f`` under ``mode``."""
    base = _mode_params(mode, delta)[0]
    return select_subsequence(octave_tail_sums(f.poles, base, 2 * count), count)


def good_radius_sequence(f, F, mode="octave", count=6, *, delta=None, tol=1e-10, measure=True):
    """Good radii ``r_1 < r_2 < ...`` for the kernel sum ``f``.

    ``mode="octave"``: base 8, ``R_j = 2 * 8**k_j``, search ``[R_j, 2 R_j]``.
    ``mode="delta"``: base ``(1+delta)**3``, ``R_j = (1+delta) * base**k_j``,
    search ``[R_j, (1+delta) R_j]``.
    """
    base, stretch, factor, spacing = _mode_params(mode, delta)
    ks = selected_scales(f, count, mode, delta)
    h = f.handle()
    report = GoodRadiusReport(mode=mode, delta=float(delta) if delta else math.nan)
    prev = None
    for j, k in enumerate(ks, start=1):
        R = stretch * base ** k
        if R * factor > F.R_max:
            raise ExcludedRadiusError(f"exclusion set only covers radii up to {F.R_max:g}")
        grid = _search_grid(F, R, factor * R)
        if grid.size == 0:
            raise ExcludedRadiusError(f"[{R:g}, {factor * R:g}] lies entirely in the exclusion set")
        values = [circle_l1(h, r, tol, rtol=1e-6) for r in grid]
        r_best = float(grid[int(np.argmin(values))])
        I = circle_l1(h, r_best, tol)
        mu = math.nan
        if measure:
            try:
                mu, _ = keldysh_angular_measure(f, r_best)
            except NormalizationError:
                pass
        if F.contains(r_best):
            raise ExcludedRadiusError(f"selected radius {r_best:g} lies in the exclusion set")
        if prev is not None and r_best < spacing * prev * (1 - 1e-12):
            raise SelectionError(f"spacing violated: r_{j} = {r_best:g} < {spacing:g} * {prev:g}")
        report.rows.append((j, k, R, r_best, I, mu))
        prev = r_best
    return report


def default_exclusion(f, count=6, mode="octave", delta=None, L=1.0):
    """Exclusion set covering every radius the good-radius search for ``f`` visits."""
    base, stretch, factor, _ = _mode_params(mode, delta)
    ks = selected_scales(f, count, mode, delta)
    return build_exclusion_set(f.poles, L, factor * stretch * base ** ks[-1] * (1 + 1e-9))
