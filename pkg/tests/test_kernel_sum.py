import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kslab.entire_zoo import sin_entire
from kslab.errors import PoleHitError, ToleranceUnreachable
from kslab.kernel_sum import KernelSum, PoleSpec, build_exclusion_set, kernel_sum_from_entire

SINE = KernelSum.generated("lattice", a=1.0, b=1.0, c=0.0)


def inv_sin2(z):
    return complex(1 / mpmath.sin(mpmath.mpc(z)) ** 2)


@pytest.mark.parametrize("z", [0.5, 1 + 1j, -2.3 + 0.1j, 3j, 0.3 - 4j])
def test_lattice_matches_inverse_sine_square(z):
    res = SINE.evaluate(z, 1e-13)
    assert abs(res.value - inv_sin2(z)) <= max(res.tail_bound, 1e-13) + 1e-15


def test_lattice_derivative():
    z = 0.7 + 0.4j
    want = complex(-2 * mpmath.cos(z) / mpmath.sin(z) ** 3)
    assert abs(SINE.evaluate_derivative(z, 1e-12).value - want) < 1e-11


def test_shifted_scaled_lattice():
    ks = KernelSum.generated("lattice", a=2.0, b=3.0, c=0.5)
    z = 0.2 + 0.1j
    want = complex(2 / mpmath.sin(3 * mpmath.mpc(z) - 0.5) ** 2)
    assert abs(ks.evaluate(z, 1e-12).value - want) < 1e-11


def test_cos_square_pairs():
    ks = KernelSum.generated("cos_square")
    z = 0.9 + 0.3j
    want = complex(z / mpmath.cos(mpmath.mpc(z) ** 2) ** 2)
    assert abs(ks.evaluate(z, 1e-12).value - want) < 1e-11


def test_power_rule_against_mpmath_series():
    ks = KernelSum.generated("power", exponent=2, coefficients="power", rate=3)
    z = mpmath.mpc(0.5, 0.5)
    with mpmath.workdps(30):
        want = complex(mpmath.nsum(lambda n: n ** -3 / (z - n * n) ** 2, [1, mpmath.inf]))
    assert abs(ks.evaluate(complex(z), 1e-14).value - want) < 1e-13


def test_geometric_rule_against_direct_sum():
    ks = KernelSum.generated("power", exponent=2, coefficients="geometric", rate=0.5)
    z = 10.5 + 2j
    with mpmath.workdps(30):
        want = complex(mpmath.fsum(mpmath.mpf(2) ** -n / (z - n * n) ** 2 for n in range(1, 200)))
    assert abs(ks.evaluate(z, 1e-14).value - want) < 1e-14


def test_explicit_is_exact():
    t = np.array([1.0, 2j, -3.0])
    c = np.array([1.0, 0.5, 2.0 - 1j])
    z = 0.1 + 0.2j
    res = KernelSum.explicit(t, c).evaluate(z)
    assert res.value == pytest.approx(np.sum(c / (z - t) ** 2), abs=1e-15)


def test_fixed_radius_reports_bound():
    res = SINE.evaluate(1 + 1j, radius=100.0)
    err = abs(res.value - inv_sin2(1 + 1j))
    assert err <= res.tail_bound
    assert res.tail_bound < 1e-3


def test_pole_hit():
    with pytest.raises(PoleHitError):
        SINE.evaluate(math.pi)


def test_unreachable_tolerance():
    with pytest.raises(ToleranceUnreachable):
        SINE.evaluate(0.5, 1e-22)


def test_coefficient_sums():
    s, err = KernelSum.generated("power", exponent=2, coefficients="power", rate=3).coefficient_sum()
    assert abs(s - float(mpmath.zeta(3))) < 1e-13 and err < 1e-13
    s, _ = KernelSum.generated("power", exponent=2, coefficients="geometric", rate=0.5).coefficient_sum()
    assert abs(s - 1.0) < 1e-14


def test_document_round_trip():
    for spec in [PoleSpec.generated("lattice", a=1.0, b=2.0, c=0.5),
                 PoleSpec.generated("power", exponent=3, coefficients="power", rate=4),
                 PoleSpec.explicit([1.0, 2j], [1.0, -1.0])]:
        back = PoleSpec.from_document(spec.to_document())
        z = 0.3 + 0.4j
        assert KernelSum(back).evaluate(z).value == pytest.approx(KernelSum(spec).evaluate(z).value, abs=1e-14)


def test_from_entire_sine():
    ks = kernel_sum_from_entire(sin_entire(), [1.0], 201)
    t, c = ks.poles.within(math.inf)
    assert np.allclose(c, 1.0)
    assert np.allclose(np.sort(t.real), math.pi * np.arange(-100, 101))


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 3))
def test_lattice_symmetries(x, y):
    z = complex(x, y)
    f = SINE.evaluate(z, 1e-12).value
    assert abs(SINE.evaluate(-z, 1e-12).value - f) <= 1e-11 * max(1, abs(f))
    assert abs(SINE.evaluate(z.conjugate(), 1e-12).value - f.conjugate()) <= 1e-11 * max(1, abs(f))
    assert abs(SINE.evaluate(z + math.pi, 1e-12).value - f) <= 1e-10 * max(1, abs(f))


@settings(max_examples=40, deadline=None)
@given(st.floats(1.0, 1e4), st.floats(1.0, 100.0))
def test_tail_bound_monotone(R, factor):
    spec = PoleSpec.generated("power", exponent=2, coefficients="power", rate=3)
    assert spec.abs_tail(R * factor, 2) <= spec.abs_tail(R, 2)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.5, 5e3))
def test_exclusion_snap_is_outside(r):
    F = build_exclusion_set(PoleSpec.generated("power", exponent=2, coefficients="power", rate=3), 1.0, 1e4)
    s = F.snap_outside(r)
    assert s >= r and not F.contains(s)
