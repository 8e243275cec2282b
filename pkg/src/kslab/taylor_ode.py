"""Entire solutions of ``g'' = q(z) g`` by chained local Taylor expansions.

Each waypoint stores the Taylor coefficients of ``g`` about itself together
with the radius on which the truncated series was checked. A query point is
evaluated from the nearest waypoint; if it lies outside that waypoint's
validated disk the solution is continued along a straight segment first and
the new waypoints are cached.
"""

import threading

import numpy as np
from numpy.polynomial import Polynomial

DEFAULT_ORDER = 30
DEFAULT_STEP_TOL = 1e-12


class TaylorODESolution:
    """Solution of ``g'' = q g`` with ``g(z0) = g0`` and ``g'(z0) = dg0``."""

    def __init__(self, q, z0, g0, dg0, *, order=DEFAULT_ORDER, step_tol=DEFAULT_STEP_TOL,
                 max_step=1.0, step_scale=0.5):
        self.q = q if isinstance(q, Polynomial) else Polynomial(q)
        self.z0 = complex(z0)
        self.g0 = complex(g0)
        self.dg0 = complex(dg0)
        self.order = int(order)
        self.step_tol = float(step_tol)
        self.max_step = float(max_step)
        self.step_scale = float(step_scale)
        self._lock = threading.Lock()
        self._points = []
        self._coefs = []
        self._radii = []
        self._add_waypoint(self.z0, self.g0, self.dg0)

    # -- local expansion -------------------------------------------------
    def step_radius(self, w):
        """Nominal step ``min(max_step, step_scale * (1 + |q(w)|)**-1/2)``."""
        qw = abs(self.q(complex(w)))
        return min(self.max_step, self.step_scale / np.sqrt(1.0 + qw))

    def taylor_coefficients(self, w, g, dg):
        """Coefficients ``a_0..a_order`` of the solution about ``w``."""
        qs = self.q(Polynomial([w, 1.0])).coef.astype(complex)
        a = np.zeros(self.order + 1, dtype=complex)
        a[0], a[1] = g, dg
        for k in range(self.order - 1):
            j = np.arange(min(k, qs.size - 1) + 1)
            a[k + 2] = np.dot(qs[j], a[k - j]) / ((k + 2) * (k + 1))
        return a

    def _tail_ok(self, a, h):
        powers = h ** np.arange(a.size)
        terms = np.abs(a) * powers
        tail = terms[-2:].sum()
        return tail <= self.step_tol * max(terms.sum(), 1e-300)

    def _add_waypoint(self, w, g, dg):
        a = self.taylor_coefficients(w, g, dg)
        h = self.step_radius(w)
        while not self._tail_ok(a, h):
            h *= 0.5
            if h < 1e-8:
                raise FloatingPointError(f"Taylor step collapsed at {w!r}")
        self._points.append(complex(w))
        self._coefs.append(a)
        self._radii.append(h)
        return a, h

    @staticmethod
    def _eval_series(a, s):
        """``(g, g')`` of the series ``a`` at offsets ``s``."""
        s = np.asarray(s, dtype=complex)
        g = np.zeros_like(s)
        dg = np.zeros_like(s)
        for k in range(a.size - 1, 0, -1):
            g = g * s + a[k]
            dg = dg * s + k * a[k]
        g = g * s + a[0]
        return g, dg

    # -- continuation ------------------------------------------------------
    def _march(self, w, a, h, target, cache):
        """Advance from waypoint ``w`` toward ``target``; returns the last waypoint."""
        while abs(target - w) > h:
            dz = target - w
            z_new = w + dz / abs(dz) * h
            g, dg = self._eval_series(a, z_new - w)
            w = complex(z_new)
            if cache:
                a, h = self._add_waypoint(w, complex(g), complex(dg))
            else:
                a = self.taylor_coefficients(w, complex(g), complex(dg))
                h = self.step_radius(w)
                while not self._tail_ok(a, h):
                    h *= 0.5
        return w, a, h

    def continue_along(self, path):
        """Continue the initial data along the polyline ``path`` (no caching).

        Returns ``(g, g')`` at the final vertex. ``path[0]`` must be ``z0``.
        """
        path = [complex(p) for p in path]
        if abs(path[0] - self.z0) > 0:
            raise ValueError("path must start at the initial point")
        w = self.z0
        a = self.taylor_coefficients(w, self.g0, self.dg0)
        h = self.step_radius(w)
        while not self._tail_ok(a, h):
            h *= 0.5
        for target in path[1:]:
            while abs(target - w) > 0:
                w, a, h = self._march(w, a, h, target, cache=False)
                if abs(target - w) > 0:
                    g, dg = self._eval_series(a, target - w)
                    w = target
                    a = self.taylor_coefficients(w, complex(g), complex(dg))
                    h = self.step_radius(w)
                    while not self._tail_ok(a, h):
                        h *= 0.5
        return complex(a[0]), complex(a[1])

    def _nearest(self, z):
        pts = np.asarray(self._points)
        d = np.abs(pts - z)
        k = int(np.argmin(d))
        return k, d[k]

    def evaluate(self, z, derivative=False):
        """``g(z)`` (or ``(g(z), g'(z))`` with ``derivative=True``) for scalar or array ``z``."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        g = np.empty_like(flat)
        dg = np.empty_like(flat)
        with self._lock:
            pts = np.asarray(self._points)
            dist = np.abs(flat[:, None] - pts[None, :]) if flat.size * pts.size < 4_000_000 else None
            for i, zi in enumerate(flat):
                if dist is not None:
                    k = int(np.argmin(dist[i]))
                    if dist[i, k] > self._radii[k]:
                        k, _ = self._nearest(zi)
                else:
                    k, _ = self._nearest(zi)
                if abs(zi - self._points[k]) > self._radii[k]:
                    self._march(self._points[k], self._coefs[k], self._radii[k], zi, cache=True)
                    k = len(self._points) - 1
                gi, dgi = self._eval_series(self._coefs[k], zi - self._points[k])
                g[i], dg[i] = gi, dgi
        g = g.reshape(z.shape)
        dg = dg.reshape(z.shape)
        if z.ndim == 0:
            g, dg = complex(g), complex(dg)
        return (g, dg) if derivative else g

    def derivative(self, z):
        return self.evaluate(z, derivative=True)[1]

    def second_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return self.q(z) * self.evaluate(z)

    def __call__(self, z):
        return self.evaluate(z)


# Ai(0) = 1/(3^(2/3) Gamma(2/3)), Ai'(0) = -1/(3^(1/3) Gamma(1/3)),
# Bi(0) = 1/(3^(1/6) Gamma(2/3)), Bi'(0) = 3^(1/6)/Gamma(1/3);
# evaluated once with mpmath at 30 digits.
AIRY_INITIAL = {
    "Ai": (0.355028053887817239260063186004, -0.258819403792806798405183560189),
    "Bi": (0.614926627446000735150922369094, 0.448288357353826357914823710399),
}


def airy_solution(kind):
    """A fresh continuation object for ``Ai`` or ``Bi`` (``g'' = z g``)."""
    try:
        g0, dg0 = AIRY_INITIAL[kind]
    except KeyError:
        raise ValueError("kind must be 'Ai' or 'Bi'") from None
    return TaylorODESolution(Polynomial([0.0, 1.0]), 0.0, g0, dg0)
