"""Argument-principle zero counting and quadtree zero location for meromorphic handles."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ClearanceError, KslabError, PoleHitError, ResolutionError, WindingError
from .handles import FunctionHandle, pole_locations

PHASE_STEP = math.pi / 4
CLEARANCE_RTOL = 1e-6
MULTIPLICITY_RTOL = 1e-4
MERGE_RTOL = 1e-8
NEWTON_RTOL = 1e-10
SPLIT_FRACTIONS = (0.5123, 0.4871, 0.5347, 0.4619, 0.5531)


@dataclass(frozen=True)
class Contour:
    """Positively oriented closed contour.

    ``kind`` is ``"circle"`` (center, radius), ``"rectangle"`` (lower-left and
    upper-right corners) or ``"annulus_sector"`` (r_in, r_out, phi1, phi2).
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind == "circle":
            if not self.params[1] > 0:
                raise ValueError("circle radius must be positive")
        elif self.kind == "rectangle":
            lo, hi = self.params
            if not (hi.real > lo.real and hi.imag > lo.imag):
                raise ValueError("degenerate rectangle")
        elif self.kind == "annulus_sector":
            r_in, r_out, p1, p2 = self.params
            if not (0 <= r_in < r_out and 0 < p2 - p1 <= 2 * math.pi):
                raise ValueError("degenerate annulus sector")
        else:
            raise ValueError(f"unknown contour kind {self.kind!r}")

    @classmethod
    def circle(cls, center, radius):
        return cls("circle", (complex(center), float(radius)))

    @classmethod
    def rectangle(cls, lo, hi):
        return cls("rectangle", (complex(lo), complex(hi)))

    @classmethod
    def annulus_sector(cls, r_in, r_out, phi1, phi2):
        return cls("annulus_sector", (float(r_in), float(r_out), float(phi1), float(phi2)))

    @property
    def scale(self):
        if self.kind == "circle":
            return self.params[1]
        if self.kind == "rectangle":
            d = self.params[1] - self.params[0]
            return max(d.real, d.imag)
        return self.params[1]

    def outer_radius(self):
        """Largest modulus of a point on or inside the contour."""
        if self.kind == "circle":
            return abs(self.params[0]) + self.params[1]
        if self.kind == "rectangle":
            lo, hi = self.params
            return max(abs(complex(x, y)) for x in (lo.real, hi.real) for y in (lo.imag, hi.imag))
        return self.params[1]

    def pieces(self):
        """Boundary pieces as callables ``s in [0, 1] -> z``."""
        if self.kind == "circle":
            c, r = self.params
            return [lambda s: c + r * np.exp(2j * np.pi * s)]
        if self.kind == "rectangle":
            lo, hi = self.params
            corners = [lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag), lo]
            return [_segment(corners[i], corners[i + 1]) for i in range(4)]
        r_in, r_out, p1, p2 = self.params
        pieces = [lambda s: r_out * np.exp(1j * (p1 + (p2 - p1) * s))]
        full = p2 - p1 >= 2 * math.pi - 1e-15
        if not full:
            pieces.append(_segment(r_out * np.exp(1j * p2), r_in * np.exp(1j * p2)))
        if r_in > 0:
            pieces.append(lambda s: r_in * np.exp(1j * (p2 - (p2 - p1) * s)))
        if not full:
            pieces.append(_segment(r_in * np.exp(1j * p1), r_out * np.exp(1j * p1)))
        return pieces

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "circle":
            c, r = self.params
            return np.abs(z - c) < r
        if self.kind == "rectangle":
            lo, hi = self.params
            return (z.real > lo.real) & (z.real < hi.real) & (z.imag > lo.imag) & (z.imag < hi.imag)
        r_in, r_out, p1, p2 = self.params
        rho = np.abs(z)
        ang = np.mod(np.angle(z) - p1, 2 * np.pi)
        return (rho > r_in) & (rho < r_out) & (ang < p2 - p1)

    def boundary_distance(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "circle":
            c, r = self.params
            return np.abs(np.abs(z - c) - r)
        if self.kind == "rectangle":
            lo, hi = self.params
            corners = [lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag), lo]
            return np.min([_segment_distance(z, corners[i], corners[i + 1]) for i in range(4)], axis=0)
        r_in, r_out, p1, p2 = self.params
        rho = np.abs(z)
        ang = np.mod(np.angle(z) - p1, 2 * np.pi)
        in_wedge = ang <= p2 - p1
        d = np.where(in_wedge, np.minimum(np.abs(rho - r_out), np.abs(rho - r_in)), np.inf)
        if p2 - p1 < 2 * math.pi - 1e-15:
            for p in (p1, p2):
                d = np.minimum(d, _segment_distance(z, r_in * np.exp(1j * p), r_out * np.exp(1j * p)))
        return d

    def nudged(self, amount):
        """Contour moved outward by ``amount``."""
        if self.kind == "circle":
            return Contour.circle(self.params[0], self.params[1] + amount)
        if self.kind == "rectangle":
            lo, hi = self.params
            return Contour.rectangle(lo - amount * (1 + 1j), hi + amount * (1 + 1j))
        r_in, r_out, p1, p2 = self.params
        dphi = 0.0 if p2 - p1 >= 2 * math.pi - 1e-15 else min(amount / r_out, 0.5 * (2 * math.pi - (p2 - p1)))
        return Contour.annulus_sector(max(r_in - amount, 0.0), r_out + amount, p1 - dphi, p2 + dphi)

    def bounding_box(self):
        if self.kind == "circle":
            c, r = self.params
            return c - r * (1 + 1j), c + r * (1 + 1j)
        if self.kind == "rectangle":
            return self.params
        r = self.params[1]
        return -r * (1 + 1j), r * (1 + 1j)


def _segment(a, b):
    return lambda s: a + (b - a) * s


def _segment_distance(z, a, b):
    d = b - a
    s = np.clip(((z - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return np.abs(z - (a + s * d))


@dataclass(frozen=True)
class WindingResult:
    """Winding number of ``h`` around ``contour`` (zeros minus poles inside)."""

    winding: int
    raw: float
    quadrature_error: float
    contour: Contour
    evaluations: int = 0


def _values(h, z):
    try:
        v = np.asarray(h.value(z), dtype=complex)
    except PoleHitError as exc:
        raise ClearanceError(f"contour passes through a pole near {exc.z!r}",
                             suggestion="nudge the boundary outward") from exc
    bad = ~np.isfinite(v) | (v == 0)
    if bad.any():
        z0 = complex(np.asarray(z)[bad][0])
        raise ClearanceError(f"value is zero or non-finite on the contour at {z0!r}",
                             suggestion="move the boundary off this point")
    return v


def _log_derivative(h, z, v):
    d = np.asarray(h.derivative(z), dtype=complex) / v
    if not np.all(np.isfinite(d)):
        z0 = complex(np.asarray(z)[~np.isfinite(d)][0])
        # silently dropping the step-size control would let the phase alias
        raise WindingError(f"derivative of {h.label} is not finite at {z0!r}")
    return d


def _track_piece(h, piece, n0, use_derivative, min_ds):
    s = np.linspace(0.0, 1.0, n0 + 1)
    z = piece(s)
    v = _values(h, z)
    d = _log_derivative(h, z, v) if use_derivative else None
    evals = s.size
    while True:
        dphi = np.angle(v[1:] / v[:-1])
        bad = np.abs(dphi) >= PHASE_STEP
        if use_derivative:
            bad |= 0.5 * (np.abs(d[:-1]) + np.abs(d[1:])) * np.abs(z[1:] - z[:-1]) >= math.pi / 2
        if not bad.any():
            return float(dphi.sum()), evals
        idx = np.nonzero(bad)[0]
        if np.min(s[idx + 1] - s[idx]) < min_ds:
            zb = complex(z[idx[0]])
            raise ResolutionError(f"phase step irreducible near {zb!r}; a zero or pole sits on the contour")
        sm = 0.5 * (s[idx] + s[idx + 1])
        zm = piece(sm)
        vm = _values(h, zm)
        evals += sm.size
        s = np.concatenate([s, sm])
        z = np.concatenate([z, zm])
        v = np.concatenate([v, vm])
        order = np.argsort(s, kind="stable")
        s, z, v = s[order], z[order], v[order]
        if use_derivative:
            d = np.concatenate([d, _log_derivative(h, zm, vm)])[order]


def _clear_of_poles(h, c, clearance_rtol, max_nudges=20):
    clearance = clearance_rtol * c.scale
    for _ in range(max_nudges):
        loc, _ = pole_locations(h, c.outer_radius() + 2 * clearance)
        if loc.size == 0 or np.min(c.boundary_distance(loc)) >= clearance:
            return c
        c = c.nudged(10 * clearance)
    raise ClearanceError("could not move the contour clear of poles",
                         suggestion="choose a contour away from the pole set")


def winding_number(h, c, *, clearance_rtol=CLEARANCE_RTOL, initial_points=64):
    """Argument-principle winding number of ``h`` along ``c``.

    Poles closer than ``clearance_rtol * scale`` to the boundary move the
    contour outward by ten times that clearance; the contour actually used
    is returned in the result.
    """
    c = _clear_of_poles(h, c, clearance_rtol)
    use_derivative = h.derivative is not None
    total = 0.0
    evals = 0
    for piece in c.pieces():
        phase, n = _track_piece(h, piece, initial_points, use_derivative, 1e-13)
        total += phase
        evals += n
    raw = total / (2 * math.pi)
    w = int(round(raw))
    err = abs(raw - w)
    if err > 0.25:
        raise WindingError(f"winding {raw:.4f} is not close to an integer")
    return WindingResult(w, raw, err, c, evals)


def poles_inside(h, c):
    loc, mult = pole_locations(h, c.outer_radius())
    if loc.size == 0:
        return 0
    return int(mult[c.contains(loc)].sum())


def zero_count_in(h, c, **kwargs):
    """Zeros (with multiplicity) of ``h`` inside ``c``: winding plus enclosed pole order."""
    w = winding_number(h, c, **kwargs)
    return w.winding + poles_inside(h, w.contour)


def zero_counts_up_to(h, radii, **kwargs):
    """Zero counts on nested circles ``|z| = r`` for increasing ``radii``."""
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    counts = [zero_count_in(h, Contour.circle(0.0, r), **kwargs) for r in radii]
    for a, b in zip(counts, counts[1:]):
        if b < a:
            raise WindingError(f"zero counts not monotone: {counts}")
    return counts


@dataclass(frozen=True)
class Zero:
    location: complex
    multiplicity: int
    residual: float


@dataclass
class ZeroSet:
    """Located zeros sorted by modulus; ``unresolved`` lists cells that hit the depth limit."""

    zeros: list = field(default_factory=list)
    unresolved: list = field(default_factory=list)
    expected_count: int = 0

    def __len__(self):
        return len(self.zeros)

    @property
    def locations(self):
        return np.array([z.location for z in self.zeros], dtype=complex)

    def total_multiplicity(self):
        return sum(z.multiplicity for z in self.zeros)

    @property
    def complete(self):
        return not self.unresolved and self.total_multiplicity() == self.expected_count

    def rows(self):
        return [(z.location.real, z.location.imag, z.multiplicity, z.residual) for z in self.zeros]


def _derivative(h, scale):
    if h.derivative is not None:
        return h.derivative
    eps = 1e-6 * scale

    def fd(z):
        return (h.value(z + eps) - h.value(z - eps)) / (2 * eps)

    return fd


def newton(h, z, multiplicity=1, *, scale=1.0, maxiter=60, max_travel=math.inf):
    """Newton iteration ``z -= m f/f'``; returns ``(z, last_step, converged)``.

    The iteration is abandoned once it moves more than ``max_travel`` from the start.
    """
    deriv = _derivative(h, scale)
    z = start = complex(z)
    step = math.inf
    for _ in range(maxiter):
        if abs(z - start) > max_travel:
            return z, math.inf, False
        try:
            v = complex(h.value(np.asarray(z)))
            d = complex(deriv(np.asarray(z)))
        except KslabError:
            return z, math.inf, False
        if v == 0:
            return z, 0.0, True
        if d == 0 or not np.isfinite(d) or not np.isfinite(v):
            return z, math.inf, False
        step = multiplicity * v / d
        z -= step
        if abs(step) <= 1e-14 * max(1.0, abs(z)):
            return z, abs(step), True
    return z, abs(step), abs(step) <= NEWTON_RTOL * scale


def _rect_children(lo, hi, fx, fy):
    xm = lo.real + fx * (hi.real - lo.real)
    ym = lo.imag + fy * (hi.imag - lo.imag)
    return [
        (lo, complex(xm, ym)),
        (complex(xm, lo.imag), complex(hi.real, ym)),
        (complex(lo.real, ym), complex(xm, hi.imag)),
        (complex(xm, ym), hi),
    ]


def _rect_count(h, lo, hi, clearance):
    c = Contour.rectangle(lo, hi)
    loc, _ = pole_locations(h, c.outer_radius() + clearance)
    if loc.size and np.min(c.boundary_distance(loc)) < clearance:
        raise ClearanceError("cell edge too close to a pole", suggestion="shift the split")
    w = winding_number(h, c, clearance_rtol=0.0)
    return w.winding + poles_inside(h, c)


def locate_zeros(h, region, max_depth=14):
    """Zeros of ``h`` inside ``region`` by quadtree subdivision plus Newton refinement."""
    scale = region.scale
    total = zero_count_in(h, region)
    region = _clear_of_poles(h, region, CLEARANCE_RTOL)
    clearance = CLEARANCE_RTOL * scale
    lo, hi = region.bounding_box()
    pad = 0.0173 * scale
    lo = lo - pad * (1.0 + 0.61j)
    hi = hi + pad * (1.0 + 0.89j)
    found = []
    unresolved = []
    root = None
    for _ in SPLIT_FRACTIONS:
        try:
            root = _rect_count(h, lo, hi, clearance)
            break
        except (ClearanceError, ResolutionError):
            lo -= pad * (0.37 + 0.29j)
            hi += pad * (0.23 + 0.41j)
    if root is None:
        raise ResolutionError("could not place a bounding box clear of zeros and poles")
    stack = [(lo, hi, root, 0)]
    while stack:
        clo, chi, count, depth = stack.pop()
        if count <= 0:
            continue
        size = max((chi - clo).real, (chi - clo).imag)
        center = 0.5 * (clo + chi)
        if _try_accept(h, clo, chi, center, count, scale, size, found):
            continue
        if depth >= max_depth:
            unresolved.append((clo, chi, count))
            continue
        children = None
        for fx, fy in zip(SPLIT_FRACTIONS, SPLIT_FRACTIONS[::-1]):
            try:
                kids = _rect_children(clo, chi, fx, fy)
                counts = [_rect_count(h, a, b, clearance) for a, b in kids]
            except (ClearanceError, ResolutionError):
                continue
            if sum(counts) == count and min(counts) >= 0:
                children = list(zip(kids, counts))
                break
        if children is None:
            unresolved.append((clo, chi, count))
            continue
        for (a, b), n in children:
            stack.append((a, b, n, depth + 1))
    zeros = _merge(found, MERGE_RTOL * scale)
    zeros = [z for z in zeros if region.contains(z.location)]
    zeros.sort(key=lambda z: (abs(z.location), np.angle(z.location)))
    return ZeroSet(zeros, unresolved, total)


def _try_accept(h, lo, hi, center, count, scale, size, found):
    slack = 1e-8 * scale
    z, step, ok = newton(h, center, multiplicity=count, scale=scale, max_travel=size)
    inside = (lo.real - slack <= z.real <= hi.real + slack
              and lo.imag - slack <= z.imag <= hi.imag + slack)
    if not (ok and inside and step <= NEWTON_RTOL * scale):
        return False
    if count == 1:
        found.append(Zero(z, 1, step))
        return True
    rho = min(MULTIPLICITY_RTOL * scale, 0.25 * size)
    try:
        m = zero_count_in(h, Contour.circle(z, rho), clearance_rtol=0.0)
    except (ClearanceError, ResolutionError, WindingError):
        return False
    if m != count:
        return False
    found.append(Zero(z, count, step))
    return True


def _merge(zeros, tol):
    out = []
    for z in sorted(zeros, key=lambda z: (z.location.real, z.location.imag)):
        if out and abs(out[-1].location - z.location) <= tol:
            continue
        out.append(z)
    return out


def rational_handle(zeros, poles, scale=1.0):
    """``scale * prod(z - a) / prod(z - b)`` with its pole and zero lists."""
    a = np.asarray(zeros, dtype=complex)
    b = np.asarray(poles, dtype=complex)

    def value(z):
        z = np.asarray(z, dtype=complex)
        num = np.prod(z[..., None] - a, axis=-1)
        den = np.prod(z[..., None] - b, axis=-1)
        return scale * num / den

    def derivative(z):
        z = np.asarray(z, dtype=complex)
        logd = np.sum(1.0 / (z[..., None] - a), axis=-1) - np.sum(1.0 / (z[..., None] - b), axis=-1)
        return value(z) * logd

    def within(points):
        def f(r):
            return [(complex(p), 1) for p in points if abs(p) <= r]
        return f

    return FunctionHandle(value, derivative, within(b), within(a), label="rational")
