"""Uniform evaluable function handles consumed by the analysis modules."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


def _no_poles(r):
    return []


@dataclass(frozen=True)
class FunctionHandle:
    """A meromorphic function as seen by the Nevanlinna and zero-finding code.

    ``value`` and ``derivative`` accept complex arrays and return arrays of the
    same shape. ``poles_within(r)`` returns ``[(location, multiplicity), ...]``
    for all poles with ``|location| <= r`` and must be monotone in ``r``.
    ``log_abs``, when given, is a numerically stable ``log|f|`` used on
    circles where ``|f|`` would under- or overflow.
    """

    value: Callable
    derivative: Optional[Callable] = None
    poles_within: Callable = _no_poles
    zeros_within: Optional[Callable] = None
    log_abs: Optional[Callable] = None
    label: str = "f"
    # smallest |pole| modulus gap used for pole-hit checks on circles
    pole_hit_rtol: float = 1e-13

    def __call__(self, z):
        return self.value(np.asarray(z, dtype=complex))

    def logabs(self, z):
        z = np.asarray(z, dtype=complex)
        if self.log_abs is not None:
            return np.asarray(self.log_abs(z), dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.value(z)))

    def reciprocal(self):
        """Handle for ``1/f`` (requires ``zeros_within`` for its pole list)."""
        if self.zeros_within is None:
            poles = _no_poles
        else:
            poles = self.zeros_within
        value = self.value
        deriv = self.derivative

        def rvalue(z):
            return 1.0 / value(z)

        rderiv = None
        if deriv is not None:
            def rderiv(z):
                v = value(z)
                return -deriv(z) / (v * v)

        rlog = None
        if self.log_abs is not None:
            la = self.log_abs

            def rlog(z):
                return -la(z)

        return FunctionHandle(rvalue, rderiv, poles, self.poles_within, rlog,
                              label=f"1/({self.label})")


def pole_locations(h, r):
    """Pole locations (repeated by multiplicity is not applied) and multiplicities as arrays."""
    poles = h.poles_within(r)
    if not poles:
        return np.empty(0, dtype=complex), np.empty(0, dtype=int)
    loc = np.array([p[0] for p in poles], dtype=complex)
    mult = np.array([p[1] for p in poles], dtype=int)
    return loc, mult


@dataclass(frozen=True)
class EntireHandle:
    """An entire function with simple zeros, as needed by the ODE bridge.

    ``zeros(r)`` returns all zeros with modulus at most ``r`` sorted by
    modulus. ``derivative_at_zeros`` may supply exact derivative values at
    those zeros (defaults to ``derivative``).
    """

    value: Callable
    derivative: Callable
    second_derivative: Callable
    zeros: Callable
    derivative_at_zeros: Optional[Callable] = None
    label: str = "g"
    simple_zero_threshold: float = 1e-10
    meta: dict = field(default_factory=dict)

    def first_zeros(self, count, r0=1.0, r_max=1e8):
        """The ``count`` zeros of smallest modulus."""
        r = r0
        while True:
            zs = np.asarray(self.zeros(r), dtype=complex)
            if zs.size >= count:
                return zs[:count]
            if r > r_max:
                raise ValueError(f"only {zs.size} zeros found up to radius {r_max:g}")
            r *= 2.0

    def derivative_at(self, zeros):
        zeros = np.asarray(zeros, dtype=complex)
        if self.derivative_at_zeros is not None:
            return np.asarray(self.derivative_at_zeros(zeros), dtype=complex)
        return np.asarray(self.derivative(zeros), dtype=complex)

    def as_function_handle(self):
        """Entire function as a pole-free :class:`FunctionHandle`."""
        return FunctionHandle(self.value, self.derivative,
                              zeros_within=lambda r: [(t, 1) for t in self.zeros(r)],
                              label=self.label)
