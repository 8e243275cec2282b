"""Concrete entire and meromorphic functions used in the experiments.

Sine family ``a/sin(bz - c)**2``, ``z/cos(z**2)**2``, Airy functions by
Taylor continuation, zeros of ``Bi``, genus-zero canonical products with
zeros ``n**alpha``, Krein-type reciprocal sums, and the zero-sum example
``(1/g)'``.
"""

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import mpmath
import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConvergenceError, PoleHitError
from .handles import EntireHandle, FunctionHandle
from .kernel_sum import KernelSum, PoleSpec
from .taylor_ode import airy_solution
from .zero_finder import Contour, zero_count_in

# --------------------------------------------------------------------------
# trigonometric examples


def log_abs_sin(w):
    """``log|sin w|`` without overflow for large ``|Im w|``."""
    w = np.asarray(w, dtype=complex)
    y = np.abs(w.imag)
    # sin w = (e^{iw} - e^{-iw})/(2i); factor out the dominant exponential
    ws = np.where(w.imag >= 0, w, np.conj(w))
    with np.errstate(divide="ignore"):
        return y - math.log(2.0) + np.log(np.abs(1.0 - np.exp(2j * ws)))


def inv_sin2_cot(w):
    """``(1/sin(w)**2, cot w)`` through ``p = exp(2i w)`` (or its reciprocal) with ``|p| <= 1``.

    Stays finite wherever ``1/sin**2`` is representable, unlike ``sin(w)**-2``
    whose denominator overflows for ``|Im w| > 355``.
    """
    w = np.asarray(w, dtype=complex)
    up = w.imag >= 0
    p = np.exp(np.where(up, 2j * w, -2j * w))
    with np.errstate(divide="ignore", invalid="ignore"):
        inv2 = -4.0 * p / (1.0 - p) ** 2
        cot = np.where(up, 1j * (p + 1.0) / (p - 1.0), 1j * (1.0 + p) / (1.0 - p))
    return inv2, cot


def sine_family(a=1.0, b=1.0, c=0.0):
    """``a / sin(bz - c)**2`` as a closed-form handle and as a lattice kernel sum."""
    a, b, c = complex(a), complex(b), complex(c)
    ks = KernelSum.generated("lattice", a=a, b=b, c=c)

    def value(z):
        return a * inv_sin2_cot(b * np.asarray(z) - c)[0]

    def derivative(z):
        inv2, cot = inv_sin2_cot(b * np.asarray(z) - c)
        return -2.0 * a * b * cot * inv2

    def log_abs(z):
        return math.log(abs(a)) - 2.0 * log_abs_sin(b * np.asarray(z) - c)

    handle = FunctionHandle(value, derivative, ks.poles_within, log_abs=log_abs,
                            zeros_within=lambda r: [],
                            label=f"{a:g}/sin^2({b:g}z-{c:g})")
    return handle, ks


def cos_square_example():
    """``z / cos(z**2)**2`` and its kernel sum over the poles ``+-u_n``, ``u_n**2 = pi(n + 1/2)``."""
    ks = KernelSum.generated("cos_square")

    def value(z):
        z = np.asarray(z, dtype=complex)
        return z * inv_sin2_cot(z * z + np.pi / 2)[0]

    def derivative(z):
        z = np.asarray(z, dtype=complex)
        w = z * z
        inv2, cot = inv_sin2_cot(w + np.pi / 2)
        # 1/cos^2 w = 1/sin^2(w + pi/2) and tan w = -cot(w + pi/2)
        return inv2 * (1.0 - 4.0 * w * cot)

    def log_abs(z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(z)) - 2.0 * log_abs_sin(z * z + np.pi / 2)

    handle = FunctionHandle(value, derivative, ks.poles_within, log_abs=log_abs,
                            zeros_within=lambda r: [(0j, 1)], label="z/cos^2(z^2)")
    return handle, ks


def _sorted_by_modulus(z):
    z = np.asarray(z, dtype=complex)
    return z[np.lexsort((np.angle(z), np.abs(z)))]


def sin_entire():
    """``sin`` as an :class:`EntireHandle` with zeros ``pi n``."""

    def zeros(r):
        n = np.arange(-math.floor(r / math.pi), math.floor(r / math.pi) + 1)
        return _sorted_by_modulus(math.pi * n)

    def deriv_at(t):
        n = np.rint(np.asarray(t).real / math.pi)
        return np.where(n % 2 == 0, 1.0, -1.0).astype(complex)

    return EntireHandle(np.sin, np.cos, lambda z: -np.sin(z), zeros, deriv_at, label="sin")


def cos_square_entire():
    """``cos(z**2)`` with zeros ``+-u_n`` and ``+-i u_n``."""

    def value(z):
        return np.cos(np.asarray(z) ** 2)

    def derivative(z):
        z = np.asarray(z)
        return -2.0 * z * np.sin(z * z)

    def second(z):
        z = np.asarray(z)
        return -2.0 * np.sin(z * z) - 4.0 * z * z * np.cos(z * z)

    def zeros(r):
        x = r * r / math.pi
        n = np.arange(math.ceil(-x - 0.5), math.floor(x - 0.5) + 1)
        root = np.sqrt((math.pi * (n + 0.5)).astype(complex))
        return _sorted_by_modulus(np.concatenate([root, -root]))

    def deriv_at(t):
        t = np.asarray(t, dtype=complex)
        n = np.rint((t * t).real / math.pi - 0.5)
        # sin(pi(n + 1/2)) = (-1)^n
        return -2.0 * t * np.where(n % 2 == 0, 1.0, -1.0)

    return EntireHandle(value, derivative, second, zeros, deriv_at, label="cos(z^2)")


# --------------------------------------------------------------------------
# Airy functions

_AIRY = {}
_AIRY_LOCK = threading.Lock()


def _airy_shared(kind):
    with _AIRY_LOCK:
        if kind not in _AIRY:
            _AIRY[kind] = airy_solution(kind)
        return _AIRY[kind]


def airy(kind, z, derivative=False):
    """``Ai``/``Bi`` (or their derivatives) by Taylor continuation from the origin."""
    sol = _airy_shared(kind)
    g, dg = sol.evaluate(z, derivative=True)
    return dg if derivative else g


def _bi_guess_argument(t):
    return t ** (2.0 / 3.0) * (1.0 + 5.0 / 48.0 * t ** -2 - 5.0 / 36.0 * t ** -4)


def bi_zero_guess(family, n):
    """Asymptotic starting point for the ``n``-th zero of ``Bi`` in ``family``."""
    if family == "real":
        return -_bi_guess_argument(3.0 * math.pi * (4 * n - 3) / 8.0) + 0j
    if family == "upper_complex":
        t = 3.0 * math.pi * (4 * n - 1) / 8.0 + 0.75j * math.log(2.0)
        return complex(np.exp(1j * math.pi / 3) * _bi_guess_argument(complex(t)))
    raise ValueError("family must be 'real' or 'upper_complex'")


@dataclass(frozen=True)
class ZeroRecord:
    family: str
    index: int
    location: complex
    derivative: complex
    residual: float


def _bi_handle(sol):
    return FunctionHandle(lambda z: sol.evaluate(z),
                          lambda z: sol.evaluate(z, derivative=True)[1], label="Bi")


def bi_zero_records(family, count, *, solution=None, tol=1e-10, confirm=True):
    """Zeros of ``Bi`` refined by Newton and confirmed by a winding count of one."""
    if count < 1:
        return []
    sol = solution or airy_solution("Bi")
    handle = _bi_handle(sol)
    out = []
    for n in range(1, count + 1):
        z = bi_zero_guess(family, n)
        if family == "real":
            z = complex(z.real, 0.0)
        step = math.inf
        for _ in range(50):
            g, dg = sol.evaluate(z, derivative=True)
            step = g / dg
            z -= step
            if family == "real":
                z = complex(z.real, 0.0)
            if abs(step) <= 1e-15 * max(1.0, abs(z)):
                break
        g, dg = sol.evaluate(z, derivative=True)
        residual = abs(g / dg)
        if not residual <= tol * max(1.0, abs(z)):
            raise ConvergenceError(f"Newton did not converge for {family} zero index {n}")
        if confirm:
            rho = min(0.3, 0.5 / math.sqrt(max(1.0, abs(z))))
            if zero_count_in(handle, Contour.circle(z, rho)) != 1:
                raise ConvergenceError(f"{family} zero index {n} is not simple or is misplaced")
        out.append(ZeroRecord(family, n, z, complex(dg), residual))
    return out


def bi_zeros(family, count):
    """First ``count`` zeros of ``Bi`` on the negative axis or in the upper half plane."""
    return np.array([r.location for r in bi_zero_records(family, count)], dtype=complex)


def bi_inverse_square_expansion(count, *, records=None):
    """Kernel sum ``sum 1/(Bi'(t)**2 (z - t)**2)`` over ``b_n``, ``beta_n`` and conjugates, ``n <= count``."""
    if records is None:
        sol = airy_solution("Bi")
        real = bi_zero_records("real", count, solution=sol)
        upper = bi_zero_records("upper_complex", count, solution=sol)
    else:
        real, upper = records
        real, upper = real[:count], upper[:count]
    t = [r.location for r in real]
    d = [r.derivative for r in real]
    for r in upper:
        t += [r.location, r.location.conjugate()]
        d += [r.derivative, r.derivative.conjugate()]
    t = np.array(t)
    c = 1.0 / np.array(d) ** 2
    return KernelSum(PoleSpec.explicit(t, c), order=2)


def bi_entire(count=60):
    """``Bi`` as an :class:`EntireHandle` (zeros from the first ``count`` of each family)."""
    sol = airy_solution("Bi")
    real = bi_zero_records("real", count, solution=sol, confirm=False)
    upper = bi_zero_records("upper_complex", count, solution=sol, confirm=False)
    t, d = [], []
    for r in real:
        t.append(r.location)
        d.append(r.derivative)
    for r in upper:
        t += [r.location, r.location.conjugate()]
        d += [r.derivative, r.derivative.conjugate()]
    t = np.array(t)
    d = np.array(d)
    order = np.lexsort((np.angle(t), np.abs(t)))
    t, d = t[order], d[order]
    r_max = min(abs(real[-1].location), abs(upper[-1].location))

    def zeros(r):
        if r > r_max:
            raise ValueError(f"zeros of Bi are tabulated only up to |z| = {r_max:.3g}")
        return t[np.abs(t) <= r]

    def deriv_at(z):
        z = np.asarray(z, dtype=complex)
        idx = np.argmin(np.abs(z.ravel()[:, None] - t[None, :]), axis=1)
        return d[idx].reshape(z.shape)

    def value(z):
        return sol.evaluate(z)

    def derivative(z):
        return sol.evaluate(z, derivative=True)[1]

    return EntireHandle(value, derivative, sol.second_derivative, zeros, deriv_at,
                        label="Bi", meta={"r_max": r_max})


# --------------------------------------------------------------------------
# canonical products with zeros n**alpha


@lru_cache(maxsize=64)
def _scaled_moments(alpha, start, count=200):
    """``s_k = sum_{n >= start} (start/n)**(alpha k)`` for ``k = 1..count``."""
    out = np.empty(count)
    with mpmath.workdps(20):
        a = mpmath.mpf(alpha)
        for k in range(1, count + 1):
            out[k - 1] = float(mpmath.zeta(a * k, start) * mpmath.power(start, a * k))
    return out


def _tail_log(z, alpha, start, kind=0):
    """Contribution of the factors ``n >= start`` to ``log g`` (kind 0) or its derivatives."""
    t0 = float(start) ** alpha
    s = _scaled_moments(float(alpha), int(start))
    w = z / t0
    absw = float(np.max(np.abs(w))) if np.size(w) else 0.0
    out = np.zeros_like(z)
    wk = np.ones_like(z)
    for k in range(1, s.size + 1):
        if kind == 0:
            wk = wk * w
            out = out - wk * (s[k - 1] / k)
        elif kind == 1:
            out = out - wk * (s[k - 1] / t0)
            wk = wk * w
        else:
            if k > 1:
                out = out - (k - 1) * wk * (s[k - 1] / t0 ** 2)
                wk = wk * w
        if absw ** k * s[k - 1] * k < 1e-18:
            break
    return out


class CanonicalProduct:
    """Genus-zero product ``prod_n (1 - z/n**alpha)`` over all ``n >= 1``.

    The first ``truncation`` factors are multiplied out in log space; the
    remaining ones enter through ``-sum_k z**k/k * zeta(alpha k, N+1)``,
    used for ``|z| < (N+1)**alpha / 2``. With ``tail=False`` the object is
    the finite product itself.
    """

    def __init__(self, alpha, truncation, tail=True):
        if alpha <= 1:
            raise ValueError("genus zero requires alpha > 1")
        self.alpha = float(alpha)
        self.N = int(truncation)
        self.tail = tail
        self.t = np.arange(1, self.N + 1, dtype=float) ** self.alpha
        self.t_next = (self.N + 1.0) ** self.alpha

    def _check(self, z):
        if self.tail and np.any(np.abs(z) >= 0.5 * self.t_next):
            raise ValueError(f"|z| must stay below {0.5 * self.t_next:.3g} for truncation {self.N}")

    def _tail_series(self, z, kind):
        if not self.tail:
            return np.zeros_like(z)
        return _tail_log(z, self.alpha, self.N + 1, kind)

    def log(self, z):
        """A branch of ``log g(z)`` (real part is ``log|g|``)."""
        z = np.asarray(z, dtype=complex)
        self._check(z)
        flat = z.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        chunk = max(1, 2_000_000 // self.N)
        with np.errstate(divide="ignore"):
            for s in range(0, flat.size, chunk):
                zz = flat[s:s + chunk]
                out[s:s + chunk] = np.log(1.0 - zz[:, None] / self.t[None, :]).sum(axis=1)
        return out.reshape(z.shape) + self._tail_series(z, 0)

    def log_derivative(self, z, order=1):
        """``(log g)'`` or ``(log g)''``."""
        z = np.asarray(z, dtype=complex)
        self._check(z)
        flat = z.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        chunk = max(1, 2_000_000 // self.N)
        for s in range(0, flat.size, chunk):
            d = flat[s:s + chunk, None] - self.t[None, :]
            if np.any(d == 0):
                raise PoleHitError(complex(flat[s]), "zero of g")
            out[s:s + chunk] = (1.0 / d).sum(axis=1) if order == 1 else -(1.0 / d ** 2).sum(axis=1)
        return out.reshape(z.shape) + self._tail_series(z, order)

    def __call__(self, z):
        with np.errstate(over="ignore"):
            return np.exp(self.log(z))

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        on_zero = np.isin(z, self.t)
        zz = np.where(on_zero, z + 0.5, z)
        out = self(zz) * self.log_derivative(zz)
        if on_zero.any():
            out = np.where(on_zero, self.derivative_at_zeros(np.where(on_zero, z, 1.0)), out)
        return out

    def second_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        ld = self.log_derivative(z)
        return self(z) * (ld * ld + self.log_derivative(z, order=2))

    def log_abs_derivative_at_zeros(self, m):
        """``(log|g'(t_m)|, sign)`` for 1-based indices ``m``.

        Uses ``g'(t_m) = -1/t_m * prod_{n != m} (1 - t_m/t_n)``; factors up to
        ``4 max(m)`` are explicit so the remaining series converges fast.
        """
        m = np.atleast_1d(np.asarray(m, dtype=int))
        explicit = max(self.N, 4 * int(m.max())) if self.tail else self.N
        t_all = np.arange(1, explicit + 1, dtype=float) ** self.alpha
        tm = m.astype(float) ** self.alpha
        logs = np.empty(m.size)
        block = max(1, 4_000_000 // explicit)
        for s in range(0, m.size, block):
            ratio = np.abs(1.0 - tm[s:s + block, None] / t_all[None, :])
            ratio[np.arange(ratio.shape[0]), m[s:s + block] - 1] = 1.0
            logs[s:s + block] = np.log(ratio).sum(axis=1) - np.log(tm[s:s + block])
        if self.tail:
            logs += _tail_log(tm.astype(complex), self.alpha, explicit + 1, 0).real
        sign = np.where(m % 2 == 0, 1.0, -1.0)
        return logs, sign

    def derivative_at_zeros(self, t):
        t = np.asarray(t, dtype=complex)
        m = np.rint(np.abs(t) ** (1.0 / self.alpha)).astype(int)
        logs, sign = self.log_abs_derivative_at_zeros(m.ravel())
        with np.errstate(over="ignore"):
            return (sign * np.exp(logs)).reshape(t.shape).astype(complex)

    def zeros(self, r):
        n = int(math.floor(r ** (1.0 / self.alpha) + 1e-9)) if r >= 1 else 0
        while n > 0 and n ** self.alpha > r:
            n -= 1
        if not self.tail:
            n = min(n, self.N)
        return np.arange(1, n + 1, dtype=float) ** self.alpha + 0j

    def entire_handle(self):
        return EntireHandle(self, self.derivative, self.second_derivative, self.zeros,
                            self.derivative_at_zeros, label=f"prod(1-z/n^{self.alpha:g})",
                            meta={"alpha": self.alpha, "truncation": self.N})


def canonical_product(alpha, truncation, tail=True):
    """:class:`EntireHandle` of the genus-zero product with zeros ``n**alpha``."""
    return CanonicalProduct(alpha, truncation, tail).entire_handle()


# --------------------------------------------------------------------------
# Krein-type reciprocal expansions


@dataclass(frozen=True)
class KreinSumSpec:
    """Data of ``sum 1/g'(t_n) (1/(z - t_n) + sum_{j<k} z**j / t_n**(j+1)) + R(z)``."""

    zeros: np.ndarray
    derivatives: np.ndarray
    order: int = 0
    polynomial: Optional[Polynomial] = None

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("regularization order must be nonnegative")
        if np.shape(self.zeros) != np.shape(self.derivatives):
            raise ValueError("zeros and derivatives differ in length")

    def certified_sum(self):
        """``sum 1/(|t|**(k+1) |g'(t)|)`` over the stored zeros."""
        t = np.abs(np.asarray(self.zeros))
        d = np.abs(np.asarray(self.derivatives))
        with np.errstate(over="ignore", divide="ignore"):
            return float(np.sum(1.0 / (t ** (self.order + 1) * d)))


def krein_regularized_sum(spec, z):
    """Evaluate the regularized simple-fraction sum of ``spec`` at ``z``."""
    t = np.asarray(spec.zeros, dtype=complex)
    inv = 1.0 / np.asarray(spec.derivatives, dtype=complex)
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.zeros(flat.shape, dtype=complex)
    for i, zi in enumerate(flat):
        d = zi - t
        hit = np.abs(d) < 1e-13 * np.maximum(1.0, np.abs(t))
        if hit.any():
            raise PoleHitError(complex(zi), complex(t[hit][0]))
        terms = 1.0 / d
        for j in range(spec.order):
            terms = terms + zi ** j / t ** (j + 1)
        out[i] = np.sum(inv * terms)
    if spec.polynomial is not None:
        out = out + spec.polynomial(flat)
    out = out.reshape(z.shape)
    return complex(out) if z.ndim == 0 else out


def truncated_product_krein_spec(alpha, truncation):
    """Krein data for the finite product ``prod_{n<=N} (1 - z/n**alpha)``.

    For a finite product the simple-fraction sum reproduces ``1/g_N``
    exactly, so the gap to the infinite product measures truncation alone.
    """
    prod = CanonicalProduct(alpha, truncation, tail=False)
    m = np.arange(1, truncation + 1)
    logs = np.empty(truncation)
    t = prod.t
    block = max(1, 4_000_000 // truncation)
    for s in range(0, truncation, block):
        tm = t[s:s + block]
        ratio = np.abs(1.0 - tm[:, None] / t[None, :])
        ratio[np.arange(tm.size), np.arange(s, s + tm.size)] = 1.0
        logs[s:s + block] = np.log(ratio).sum(axis=1) - np.log(tm)
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    with np.errstate(over="ignore"):
        deriv = sign * np.exp(logs)
    return KreinSumSpec(t + 0j, deriv + 0j, 0)


# --------------------------------------------------------------------------
# the zero-sum example (1/g)'


@dataclass(frozen=True)
class DefectHalfExample:
    """``f = (1/g)' = -g'/g**2`` for the product with zeros ``n**alpha``.

    ``handle`` evaluates the closed form; ``kernel_sum`` is the same function
    as ``sum -1/g'(t_n) / (z - t_n)**2``.
    """

    alpha: float
    product: CanonicalProduct
    handle: FunctionHandle
    kernel_sum: KernelSum

    def coefficients(self):
        return self.kernel_sum.poles.rule.c


def defect_half_example(alpha=3.0, truncation=1000):
    """Zero-sum example for ``alpha > 2``: ``sum c_n = 0`` and ``sum |c_n| < inf``."""
    if alpha <= 2:
        raise ValueError("alpha must exceed 2")
    prod = CanonicalProduct(alpha, truncation)
    m = np.arange(1, truncation + 1)
    logs, sign = prod.log_abs_derivative_at_zeros(m)
    with np.errstate(over="ignore"):
        c = -sign * np.exp(-logs)
    keep = c != 0
    ks = KernelSum.explicit(prod.t[keep], c[keep], order=2)

    def value(z):
        z = np.asarray(z, dtype=complex)
        return -prod.log_derivative(z) * np.exp(-prod.log(z))

    def derivative(z):
        z = np.asarray(z, dtype=complex)
        l1 = prod.log_derivative(z)
        l2 = prod.log_derivative(z, order=2)
        return (l1 * l1 - l2) * np.exp(-prod.log(z))

    def log_abs(z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(prod.log_derivative(z))) - prod.log(z).real

    def poles(r):
        return [(complex(t), 2) for t in prod.zeros(r)]

    handle = FunctionHandle(value, derivative, poles, log_abs=log_abs,
                            label=f"-g'/g^2 (alpha={alpha:g})")
    return DefectHalfExample(float(alpha), prod, handle, ks)
