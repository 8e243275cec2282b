"""Kernel sums ``f(z) = sum_n c_n / (z - t_n)**m`` with certified truncation error.

Poles are summed in order of increasing modulus up to a truncation radius
``R >= 2|z|``. Beyond ``R`` every pole satisfies ``|z/t| <= 1/2``, so the
tail is expanded as

    sum_{|t|>R} c/(z-t)**q = (-1)**q * sum_k binom(q+k-1, k) z**k M_{q+k}(R)

where ``M_p(R) = sum_{|t|>R} c t**-p``. Generators that know their tail
moments in closed form (Hurwitz zeta) contribute the first ``K`` terms
exactly; the remainder is bounded by ``C(q, K) |z|**K A_{q+K}(R)`` with
``A_p(R) = sum_{|t|>R} |c| |t|**-p``. With ``K = 0`` this is the plain
``2**q`` estimate.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special

from .errors import NearMultipleZeroError, PoleHitError, ToleranceUnreachable
from .handles import FunctionHandle
from .summation import compensated_sum

POLE_HIT_RTOL = 1e-13
MAX_TAIL_TERMS = 6
MAX_POLES = 20_000_000
EPS = np.finfo(float).eps


@lru_cache(maxsize=None)
def tail_constant(q, K):
    """``sum_j binom(q+K+j-1, K+j) 2**-j``: remainder constant of ``(1-w)**-q`` for ``|w| <= 1/2``."""
    total = 0.0
    j = 0
    while True:
        term = math.comb(q + K + j - 1, K + j) * 2.0 ** -j
        total += term
        if j > 10 and term < 1e-17 * total:
            return total
        j += 1


def _hurwitz(s, a):
    """Hurwitz zeta for real ``s > 1``; complex shifts go through mpmath."""
    if isinstance(a, complex) and a.imag != 0.0:
        return complex(mpmath.zeta(s, mpmath.mpc(a.real, a.imag)))
    a = float(a.real if isinstance(a, complex) else a)
    return float(special.zeta(s, a))


def _sort_poles(t, c):
    order = np.lexsort((np.angle(t), np.abs(t)))
    return t[order], c[order]


def _as_complex(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _encode_complex(v):
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


class PoleRule:
    """Closed-form, stateless pole generator ``n -> (t_n, c_n)``."""

    name = "rule"
    finite = False

    def within(self, R):
        """Arrays ``(t, c)`` of all poles with ``|t| <= R``, sorted by modulus then argument."""
        raise NotImplementedError

    def abs_tail(self, R, p):
        """Upper bound on ``sum_{|t|>R} |c| / |t|**p``."""
        raise NotImplementedError

    def tail_moment(self, R, p):
        """Exact ``sum_{|t|>R} c / t**p`` or ``None`` when unavailable."""
        return None

    def count_hint(self, R):
        """Number of poles with ``|t| <= R`` (or an overestimate), without generating them."""
        return 0

    def params(self):
        raise NotImplementedError


class ExplicitPoles(PoleRule):
    """A finite pole list: a truncated model of an infinite sum."""

    name = "explicit"
    finite = True

    def __init__(self, t, c):
        t = np.asarray(t, dtype=complex).ravel()
        c = np.asarray(c, dtype=complex).ravel()
        if t.shape != c.shape:
            raise ValueError("pole and coefficient arrays differ in length")
        if np.any(c == 0):
            raise ValueError("all coefficients must be nonzero")
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(c)):
            raise ValueError("non-finite pole data")
        t, c = _sort_poles(t, c)
        if t.size > 1 and np.any(np.diff(t) == 0):
            raise ValueError("poles must be distinct")
        self.t = t
        self.c = c
        self._mod = np.abs(t)

    def within(self, R):
        k = np.searchsorted(self._mod, R, side="right")
        return self.t[:k], self.c[:k]

    def abs_tail(self, R, p):
        k = np.searchsorted(self._mod, R, side="right")
        return float(np.sum(np.abs(self.c[k:]) / self._mod[k:] ** p))

    def tail_moment(self, R, p):
        k = np.searchsorted(self._mod, R, side="right")
        return complex(np.sum(self.c[k:] / self.t[k:] ** p))

    def params(self):
        return {}


class PowerRule(PoleRule):
    """Poles ``t_n = n**exponent`` (n >= 1) with geometric or power-law coefficients.

    ``coefficients="geometric"``: ``c_n = scale * rate**n`` (0 < rate < 1).
    ``coefficients="power"``: ``c_n = scale * n**-rate``.
    """

    name = "power"

    def __init__(self, exponent=2.0, coefficients="geometric", rate=0.5, scale=1.0):
        if exponent <= 0:
            raise ValueError("exponent must be positive")
        if coefficients not in ("geometric", "power"):
            raise ValueError("coefficients must be 'geometric' or 'power'")
        if coefficients == "geometric" and not 0 < rate < 1:
            raise ValueError("geometric rate must lie in (0, 1)")
        if scale == 0:
            raise ValueError("scale must be nonzero")
        self.exponent = float(exponent)
        self.coefficients = coefficients
        self.rate = float(rate)
        self.scale = complex(scale)

    def count_within(self, R):
        if R < 1:
            return 0
        a = self.exponent
        n = int(math.floor(R ** (1.0 / a)))
        while (n + 1) ** a <= R:
            n += 1
        while n > 0 and n ** a > R:
            n -= 1
        return n

    def coefficient(self, n):
        n = np.asarray(n, dtype=float)
        if self.coefficients == "geometric":
            return self.scale * self.rate ** n
        return self.scale * n ** -self.rate

    def within(self, R):
        N = self.count_within(R)
        if N > MAX_POLES:
            raise ToleranceUnreachable(0.0, math.inf, f"{N} poles exceed the working limit")
        n = np.arange(1, N + 1, dtype=float)
        c = self.coefficient(n)
        # drop coefficients that underflow; they are covered by abs_tail of the last kept index
        keep = c != 0
        return (n ** self.exponent + 0j)[keep], c[keep].astype(complex)

    def abs_tail(self, R, p):
        N = self.count_within(R)
        a = self.exponent
        if self.coefficients == "geometric":
            r = self.rate
            return float(abs(self.scale) * r ** (N + 1) * (N + 1.0) ** (-a * p) / (1.0 - r))
        s = self.rate + a * p
        if s <= 1:
            return math.inf
        return float(abs(self.scale) * _hurwitz(s, N + 1.0))

    def tail_moment(self, R, p):
        N = self.count_within(R)
        if self.coefficients == "geometric":
            if p == 0:
                return complex(self.scale * self.rate ** (N + 1) / (1.0 - self.rate))
            return None
        s = self.rate + self.exponent * p
        if s <= 1:
            return None
        return complex(self.scale * _hurwitz(s, N + 1.0))

    def count_hint(self, R):
        return self.count_within(R)

    def params(self):
        return {"exponent": self.exponent, "coefficients": self.coefficients,
                "rate": self.rate, "scale": _encode_complex(self.scale)}


class LatticeRule(PoleRule):
    """Poles of ``a / sin(bz - c)**2``: ``t_n = (pi n + c)/b``, ``c_n = a/b**2``, n in Z."""

    name = "lattice"

    def __init__(self, a=1.0, b=1.0, c=0.0):
        a, b, c = complex(a), complex(b), complex(c)
        if a == 0 or b == 0:
            raise ValueError("a and b must be nonzero")
        self.a, self.b, self.c = a, b, c
        self.coef = a / b ** 2

    def index_range(self, R):
        rb = R * abs(self.b)
        if rb < abs(self.c.imag):
            return 1, 0
        s = math.sqrt(rb * rb - self.c.imag ** 2)
        lo = math.ceil((-self.c.real - s) / math.pi)
        hi = math.floor((-self.c.real + s) / math.pi)
        while abs(math.pi * (lo - 1) + self.c) <= rb:
            lo -= 1
        while lo <= hi and abs(math.pi * lo + self.c) > rb:
            lo += 1
        while abs(math.pi * (hi + 1) + self.c) <= rb:
            hi += 1
        while hi >= lo and abs(math.pi * hi + self.c) > rb:
            hi -= 1
        return lo, hi

    def within(self, R):
        lo, hi = self.index_range(R)
        if hi - lo + 1 > MAX_POLES:
            raise ToleranceUnreachable(0.0, math.inf, "too many lattice poles")
        n = np.arange(lo, hi + 1, dtype=float)
        t = (math.pi * n + self.c) / self.b
        c = np.full(t.shape, self.coef, dtype=complex)
        return _sort_poles(t.astype(complex), c)

    def abs_tail(self, R, p):
        if p <= 1:
            return math.inf
        lo, hi = self.index_range(R)
        shift = self.c.real / math.pi
        near = 0.0
        if lo > hi:
            # empty window: the two poles nearest the imaginary axis exactly, the rest by Hurwitz zeta
            hi = math.floor(-shift)
            lo = hi + 1
            near = sum(abs(math.pi * n + self.c) ** -p for n in (hi, hi + 1)) * math.pi ** p
            lo, hi = hi, hi + 1
        right = _hurwitz(p, hi + 1 + shift)
        left = _hurwitz(p, 1 - lo - shift)
        return float(abs(self.coef) * abs(self.b) ** p * math.pi ** -p * (right + left + near))

    def tail_moment(self, R, p):
        if p < 2:
            return None
        lo, hi = self.index_range(R)
        if lo > hi:
            return None
        shift = self.c / math.pi
        right = _hurwitz(p, complex(hi + 1) + shift)
        left = _hurwitz(p, complex(1 - lo) - shift)
        return complex(self.coef * self.b ** p * math.pi ** -p * (right + (-1) ** p * left))

    def count_hint(self, R):
        lo, hi = self.index_range(R)
        return max(0, hi - lo + 1)

    def params(self):
        return {"a": _encode_complex(self.a), "b": _encode_complex(self.b),
                "c": _encode_complex(self.c)}


class CosSquareRule(PoleRule):
    """Poles of ``z / cos(z**2)**2``: ``t**2 = pi/2 + pi n`` (both roots), ``c = 1/(4t)``."""

    name = "cos_square"

    def index_range(self, R):
        x = R * R / math.pi
        lo = math.ceil(-x - 0.5)
        hi = math.floor(x - 0.5)
        return lo, hi

    def within(self, R):
        lo, hi = self.index_range(R)
        if 2 * (hi - lo + 1) > MAX_POLES:
            raise ToleranceUnreachable(0.0, math.inf, "too many poles")
        w = math.pi * (np.arange(lo, hi + 1, dtype=float) + 0.5)
        root = np.sqrt(w.astype(complex))
        t = np.concatenate([root, -root])
        t = t[np.abs(t) <= R]
        c = 1.0 / (4.0 * t)
        return _sort_poles(t, c)

    def abs_tail(self, R, p):
        s = 0.5 * (p + 1)
        if s <= 1:
            return math.inf
        lo, hi = self.index_range(R)
        pos = _hurwitz(s, hi + 1.5)
        neg = _hurwitz(s, 0.5 - lo)
        return float(0.5 * math.pi ** -s * (pos + neg))

    def count_hint(self, R):
        lo, hi = self.index_range(R)
        return 2 * max(0, hi - lo + 1)

    def tail_moment(self, R, p):
        if p % 2 == 0:
            return 0j
        q = (p + 1) // 2
        if q <= 1:
            return None
        lo, hi = self.index_range(R)
        pos = _hurwitz(q, hi + 1.5)
        neg = (-1) ** q * _hurwitz(q, 0.5 - lo)
        return complex(0.5 * math.pi ** -q * (pos + neg))

    def params(self):
        return {}


GENERATORS = {
    "power": PowerRule,
    "lattice": LatticeRule,
    "cos_square": CosSquareRule,
}


class PoleSpec:
    """Pole data of a kernel sum: an explicit list or a named generator."""

    def __init__(self, rule):
        self.rule = rule

    @classmethod
    def explicit(cls, t, c):
        return cls(ExplicitPoles(t, c))

    @classmethod
    def generated(cls, name, **params):
        try:
            rule_cls = GENERATORS[name]
        except KeyError:
            raise ValueError(f"unknown generator {name!r}; known: {sorted(GENERATORS)}") from None
        return cls(rule_cls(**params))

    @property
    def kind(self):
        return "explicit" if self.rule.finite else "generated"

    @property
    def finite(self):
        return self.rule.finite

    def within(self, R):
        return self.rule.within(R)

    def abs_tail(self, R, p=2):
        return self.rule.abs_tail(R, p)

    def tail_bound(self, R):
        """Bound on ``sum_{|t|>R} |c|/|t|**2``; zero beyond an explicit list."""
        return self.rule.abs_tail(R, 2)

    def tail_moment(self, R, p):
        return self.rule.tail_moment(R, p)

    def to_document(self):
        if self.rule.finite:
            return [{"re_t": float(t.real), "im_t": float(t.imag),
                     "re_c": float(c.real), "im_c": float(c.imag)}
                    for t, c in zip(self.rule.t, self.rule.c)]
        return {"generator": self.rule.name, "params": self.rule.params()}

    @classmethod
    def from_document(cls, doc):
        if isinstance(doc, list):
            t = [complex(r["re_t"], r.get("im_t", 0.0)) for r in doc]
            c = [complex(r["re_c"], r.get("im_c", 0.0)) for r in doc]
            return cls.explicit(t, c)
        if isinstance(doc, dict) and "generator" in doc:
            params = dict(doc.get("params", {}))
            for key in ("a", "b", "c", "scale"):
                if key in params:
                    params[key] = _as_complex(params[key])
            return cls.generated(doc["generator"], **params)
        raise ValueError("pole document must be a record list or {generator, params}")


def _check_tolerance(tol, rtol, radius, finite):
    if tol < 0 or rtol < 0:
        raise ValueError("tolerances must be nonnegative")
    if tol == 0 and rtol == 0 and radius is None and not finite:
        raise ValueError("a positive tolerance is required")


@dataclass(frozen=True)
class EvalResult:
    """Value with a bound on truncation plus floating-point error."""

    value: object
    tail_bound: object
    terms_used: int


class KernelSum:
    """``f(z) = sum_n c_n / (z - t_n)**order``."""

    def __init__(self, poles, order=2):
        if int(order) != order or order < 1:
            raise ValueError("order must be a positive integer")
        if not isinstance(poles, PoleSpec):
            poles = PoleSpec(poles)
        self.poles = poles
        self.order = int(order)

    def __repr__(self):
        return f"KernelSum(order={self.order}, poles={self.poles.rule.name})"

    @classmethod
    def explicit(cls, t, c, order=2):
        return cls(PoleSpec.explicit(t, c), order)

    @classmethod
    def generated(cls, name, order=2, **params):
        return cls(PoleSpec.generated(name, **params), order)

    def poles_within(self, r):
        t, _ = self.poles.within(r)
        return [(complex(x), self.order) for x in t]

    def _tail(self, z, q, R):
        """Tail correction and remainder bound for kernel power ``q`` beyond ``R``."""
        absz = np.abs(z)
        best = None
        moments = []
        for K in range(MAX_TAIL_TERMS + 1):
            if K > 0:
                m = self.poles.tail_moment(R, q + K - 1)
                if m is None:
                    break
                moments.append(m)
            a = self.poles.abs_tail(R, q + K)
            if not math.isfinite(a):
                continue
            bound = tail_constant(q, K) * absz ** K * a
            if best is None or bound.max() < best[1].max():
                best = (K, bound)
        if best is None:
            raise ToleranceUnreachable(0.0, math.inf, "tail of this kernel power is not summable")
        K, bound = best
        corr = np.zeros_like(z)
        for k in range(K):
            corr = corr + math.comb(q + k - 1, k) * z ** k * moments[k]
        return (-1) ** q * corr, bound

    def _sum(self, z, q, mult, tol, rtol, radius, strict=True):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        zf = np.atleast_1d(z).ravel()
        zmax = float(np.abs(zf).max()) if zf.size else 0.0
        if self.poles.finite and radius is None:
            R = math.inf
        else:
            R = radius if radius is not None else max(2.0 * zmax, 1.0)
            if R < 2.0 * zmax * (1 - 1e-15):
                raise ValueError("truncation radius must be at least 2|z|")
        while True:
            t, c = self.poles.within(R)
            partial, absum = self._direct(zf, t, c, q)
            if math.isinf(R):
                corr = np.zeros_like(zf)
                trunc = np.zeros(zf.shape)
            else:
                corr, trunc = self._tail(zf, q, R)
            value = mult * (partial + corr)
            rounding = 8.0 * EPS * abs(mult) * (absum + np.abs(corr))
            bound = abs(mult) * trunc + rounding
            target = np.maximum(tol, rtol * np.abs(value))
            # a larger radius cannot reduce rounding error, so stop once truncation is below it
            if radius is not None or math.isinf(R) or np.all(abs(mult) * trunc <= np.maximum(target, rounding)):
                break
            # grow the radius on the tail bound alone, then sum once more
            floor = np.maximum(target, rounding) / abs(mult)
            while True:
                R *= 2.0
                if self.poles.rule.count_hint(R) > MAX_POLES // 2:
                    raise ToleranceUnreachable(tol, float(bound.max()))
                if np.all(self._tail(zf, q, R)[1] <= floor):
                    break
        if strict and radius is None and np.any(bound > 2.0 * target):
            raise ToleranceUnreachable(float(target.min()), float(bound.max()),
                                       "rounding error near a pole exceeds the tolerance")
        if scalar:
            return EvalResult(complex(value[0]), float(bound[0]), int(t.size))
        return EvalResult(value.reshape(z.shape), bound.reshape(z.shape), int(t.size))

    @staticmethod
    def _direct(z, t, c, q):
        out = np.zeros(z.shape, dtype=complex)
        absum = np.zeros(z.shape)
        if t.size == 0:
            return out, absum
        thr = POLE_HIT_RTOL * np.maximum(1.0, np.abs(t))
        ac = np.abs(c)
        chunk = max(1, 4_000_000 // t.size)
        for s in range(0, z.size, chunk):
            zz = z[s:s + chunk]
            d = zz[:, None] - t[None, :]
            ad = np.abs(d)
            hit = ad < thr[None, :]
            if hit.any():
                i, j = np.argwhere(hit)[0]
                raise PoleHitError(complex(zz[i]), complex(t[j]))
            dq = d
            for _ in range(q - 1):
                dq = dq * d
            terms = c[None, :] / dq
            out[s:s + chunk] = compensated_sum(terms, axis=1)
            absum[s:s + chunk] = (ac[None, :] / ad ** q).sum(axis=1)
        return out, absum

    def evaluate(self, z, tol=1e-12, *, rtol=0.0, radius=None, strict=True):
        """Value at ``z`` (scalar or array) with certified error ``<= max(tol, rtol|f|)``.

        With ``radius`` given the truncation is fixed there and the achieved
        bound is reported instead. ``strict=False`` returns the best available
        value when rounding alone keeps the bound above the tolerance.
        """
        _check_tolerance(tol, rtol, radius, self.poles.finite)
        return self._sum(z, self.order, 1.0, tol, rtol, radius, strict)

    def evaluate_derivative(self, z, tol=1e-12, *, rtol=0.0, radius=None, strict=True):
        """Termwise derivative ``-m c/(z-t)**(m+1)`` with the same tail control."""
        _check_tolerance(tol, rtol, radius, self.poles.finite)
        return self._sum(z, self.order + 1, -float(self.order), tol, rtol, radius, strict)

    def coefficient_sum(self, tol=1e-14, R=None):
        """Certified ``(S, error)`` for ``S = sum_n c_n``."""
        if self.poles.finite:
            t, c = self.poles.within(math.inf)
            s = compensated_sum(c)
            return complex(s), float(4 * EPS * np.abs(c).sum())
        R = R or 16.0
        while True:
            t, c = self.poles.within(R)
            s = complex(compensated_sum(c))
            m = self.poles.tail_moment(R, 0)
            if m is not None:
                s += m
                err = 4 * EPS * float(np.abs(c).sum() + abs(m))
            else:
                err = self.poles.abs_tail(R, 0) + 4 * EPS * float(np.abs(c).sum())
            if err <= tol * max(1.0, abs(s)):
                return s, err
            if not math.isfinite(err) or t.size > MAX_POLES // 2:
                raise ToleranceUnreachable(tol, err, "coefficient sum is not certifiably convergent")
            R *= 4.0

    def handle(self, tol=0.0, rtol=1e-13, label=None):
        """A :class:`FunctionHandle` evaluating this sum to relative accuracy ``rtol``."""
        if tol == 0 and rtol == 0:
            rtol = 1e-13

        def value(z):
            return self.evaluate(z, tol, rtol=rtol, strict=False).value

        def derivative(z):
            return self.evaluate_derivative(z, tol, rtol=rtol, strict=False).value

        return FunctionHandle(value, derivative, self.poles_within,
                              label=label or repr(self))


@dataclass(frozen=True)
class ExclusionSet:
    """Merged intervals ``[|t| - |t|**-L, |t| + |t|**-L]`` around pole moduli."""

    L: float
    intervals: np.ndarray
    R_max: float = math.inf

    def contains(self, r):
        if self.intervals.size == 0:
            return False
        k = np.searchsorted(self.intervals[:, 0], r, side="right") - 1
        return bool(k >= 0 and r <= self.intervals[k, 1])

    def snap_outside(self, r):
        """Nearest radius ``>= r`` outside the set."""
        if not self.contains(r):
            return float(r)
        k = np.searchsorted(self.intervals[:, 0], r, side="right") - 1
        hi = float(self.intervals[k, 1])
        return hi * (1.0 + 1e-12) + 1e-300

    def total_length(self, R=math.inf):
        if self.intervals.size == 0:
            return 0.0
        lo = np.minimum(self.intervals[:, 0], R)
        hi = np.minimum(self.intervals[:, 1], R)
        return float(np.sum(hi - lo))


def build_exclusion_set(poles, L, R_max):
    """Exclusion set for all poles with ``|t| <= R_max + 1``."""
    if L <= 0:
        raise ValueError("L must be positive")
    if isinstance(poles, KernelSum):
        poles = poles.poles
    t, _ = poles.within(R_max + 1.0)
    rho = np.unique(np.abs(t))
    rho = rho[rho > 0]
    if rho.size == 0:
        return ExclusionSet(float(L), np.empty((0, 2)), float(R_max))
    half = rho ** -float(L)
    lo = np.maximum(rho - half, 0.0)
    hi = rho + half
    merged = []
    cur_lo, cur_hi = lo[0], hi[0]
    for a, b in zip(lo[1:], hi[1:]):
        if a <= cur_hi:
            cur_hi = max(cur_hi, b)
        else:
            merged.append((cur_lo, cur_hi))
            cur_lo, cur_hi = a, b
    merged.append((cur_lo, cur_hi))
    return ExclusionSet(float(L), np.array(merged), float(R_max))


def kernel_sum_from_entire(g, P, count):
    """Second-order kernel sum ``sum P(t)/g'(t)**2 / (z - t)**2`` over the first ``count`` zeros of ``g``."""
    P = np.polynomial.Polynomial(P) if not isinstance(P, np.polynomial.Polynomial) else P
    zeros = g.first_zeros(count)
    d = g.derivative_at(zeros)
    small = np.abs(d) < g.simple_zero_threshold
    if small.any():
        k = int(np.argmax(small))
        raise NearMultipleZeroError(f"|g'| = {abs(d[k]):.3g} at zero {zeros[k]!r}")
    c = P(zeros) / d ** 2
    return KernelSum.explicit(zeros, c, order=2)
