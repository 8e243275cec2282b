import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Polynomial

from kslab.entire_zoo import bi_entire, bi_zeros, cos_square_entire, sin_entire
from kslab.errors import NoCriticalRaysError
from kslab.kernel_sum import KernelSum, kernel_sum_from_entire
from kslab.ode_bridge import (convergence_exponent_estimate, corollary_fer_check, critical_rays,
                              default_samples, ode_residual, order_from_degree, ray_distance_stats,
                              recover_Q, sector_test, verify_zero_residue_condition)

BI = bi_entire(20)


def test_residue_condition_examples():
    assert verify_zero_residue_condition(sin_entire(), [1.0], 20, 1e-12).passed
    assert verify_zero_residue_condition(cos_square_entire(), [0.0, 1.0], 20, 1e-9).passed
    assert verify_zero_residue_condition(BI, [1.0], 20, 1e-9).passed


def test_residue_condition_detects_wrong_P():
    rep = verify_zero_residue_condition(sin_entire(), [0.0, 1.0], 10, 1e-9)
    assert not rep.passed


def test_recover_q_examples():
    Q, res = recover_Q(sin_entire(), [1.0])
    assert np.allclose(Q.coef, [1.0], atol=1e-10) and res < 1e-10
    Q, _ = recover_Q(cos_square_entire(), [0.0, 1.0])
    assert np.allclose(Q.coef, [0, 0, 0, 4], atol=1e-6)
    Q, _ = recover_Q(BI, [1.0])
    assert np.allclose(Q.coef, [0, -1], atol=1e-6)


def test_recover_then_residual_self_consistent():
    for g, P in [(sin_entire(), [1.0]), (cos_square_entire(), [0.0, 1.0]), (BI, [1.0])]:
        pts = default_samples(g)
        Q, fit = recover_Q(g, P, pts)
        assert ode_residual(g, P, Q, pts) <= fit + 1e-12


def test_ode_residual_flags_wrong_q():
    z = np.linspace(-5, 5, 41) + 0.3j
    assert ode_residual(sin_entire(), [1.0], [1.0], z) < 1e-12
    assert ode_residual(sin_entire(), [1.0], [2.0], z) > 0.1


def test_too_few_samples():
    with pytest.raises(ValueError):
        recover_Q(sin_entire(), [1.0], np.array([2.0, 2j, -2.0]), degree_cap=4)


def test_critical_rays_examples():
    r = critical_rays([0, -1])
    assert r.base == 0
    assert np.allclose(np.sort(r.angles), [-math.pi / 3, math.pi / 3, math.pi])
    r = critical_rays([0, 0, 1])
    assert np.allclose(r.angles, [0, math.pi / 2, math.pi, 3 * math.pi / 2])
    with pytest.raises(NoCriticalRaysError):
        critical_rays([1.0])


def test_critical_ray_base():
    r = critical_rays([0.0, 3.0, 1.0])  # z^2 + 3z: base -3/2
    assert r.base == pytest.approx(-1.5)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=2, max_size=5),
       st.floats(0.1, 10), st.floats(-3, 3))
def test_critical_ray_transformations(coefs, scale, theta):
    if abs(coefs[-1]) < 1e-3:
        return
    base = critical_rays(coefs)
    m = len(coefs) - 1
    same = critical_rays(np.array(coefs) * scale)
    assert np.allclose(same.angles, base.angles, atol=1e-12)
    rot = critical_rays(np.array(coefs) * np.exp(1j * theta))
    # rotation by -theta/(m+2), up to the 2 pi/(m+2) spacing of the family
    d = np.angle(np.exp(1j * (m + 2) * (rot.angles - base.angles + theta / (m + 2))))
    assert np.allclose(d, 0, atol=1e-9)
    assert rot.base == pytest.approx(base.base, abs=1e-9)


def test_ray_distances():
    r = critical_rays([0, -1])
    pts = np.array([2 * np.exp(1j * math.pi / 3), -5.0, 0.0])
    assert np.allclose(ray_distance_stats(pts, r), 0, atol=1e-14)
    assert ray_distance_stats(np.array([1.0]), r)[0] == pytest.approx(math.sin(math.pi / 3))


def test_bi_zeros_approach_ray():
    r = critical_rays([0, -1])
    k = int(np.argmin(np.abs(r.angles - math.pi / 3)))
    d = r.distances(bi_zeros("upper_complex", 10))[:, k]
    assert np.all(np.diff(d) < 0)


def test_sector_test():
    assert sector_test(np.arange(-10, 11) * 1.0, 0.3, 1).inside
    assert sector_test(math.pi * np.arange(-10, 11) + 0.4, 0.1, 0).inside
    b = bi_zeros("upper_complex", 10)
    v = sector_test(np.concatenate([b, b.conj(), bi_zeros("real", 10)]), math.pi / 4, 1)
    assert not v.inside and v.outside == 20
    with pytest.raises(ValueError):
        sector_test([1.0], math.pi / 2, 1)


def test_order_from_degree():
    assert order_from_degree(0) == 1
    assert order_from_degree(1) == Fraction(3, 2)
    assert order_from_degree(4) == 3
    with pytest.raises(ValueError):
        order_from_degree(-1)


def test_order_from_degree_matches_growth_of_sine():
    from kslab.entire_zoo import sine_family
    from kslab.nevanlinna import characteristic_table, order_estimate
    h, _ = sine_family(1.0, 1.0, math.pi / 2)  # 1/cos^2, no pole at the origin
    Q, _ = recover_Q(sin_entire(), [1.0])
    rho = order_from_degree(len(Q.coef) - 1)
    table = characteristic_table(h, np.geomspace(2, 300, 8) + 0.1, 1e-8, zeros=False, winding=False)
    assert abs(float(order_estimate(table)) - float(rho)) <= 0.15


@pytest.mark.parametrize("p,want", [(2, 0.5), (3, 1 / 3), (1, 1.0)])
def test_convergence_exponent(p, want):
    est = convergence_exponent_estimate(np.arange(1, 400) ** float(p))
    assert est.exponent == pytest.approx(want, abs=0.05)


def test_convergence_exponent_conventions():
    est = convergence_exponent_estimate(np.arange(1, 400) ** 2.0)
    assert est.nearest_with_zero == 0.5 and est.distance_with_zero < 0.05
    assert est.nearest == 1.0 and est.distance > 0.4


def test_convergence_exponent_needs_spread():
    with pytest.raises(ValueError):
        convergence_exponent_estimate(np.linspace(1, 2, 50))


def test_corollary_check_examples():
    n3 = KernelSum.generated("power", exponent=3, coefficients="power", rate=3)
    assert corollary_fer_check(n3).exponent_condition
    sine = KernelSum.generated("lattice", a=1.0, b=1.0, c=0.0)
    assert corollary_fer_check(sine).verdict == "inconclusive"
    n = np.arange(1, 5000)
    ray = KernelSum.explicit(np.exp(1j * math.pi / 5) * n ** (2 / 3), n ** -3.0)
    v = corollary_fer_check(ray, [[0, -1]])
    assert not v.exponent_condition and v.ray_condition


def test_round_trip_from_entire():
    for g, P in [(sin_entire(), [1.0]), (cos_square_entire(), [0.0, 1.0])]:
        kernel_sum_from_entire(g, P, 10)
        assert verify_zero_residue_condition(g, P, 10, 1e-9).passed
