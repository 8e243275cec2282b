import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kslab.quadrature import integrate, sign_change_points, superlevel_measure
from kslab.summation import compensated_sum


def test_compensated_sum_cancellation_across_blocks():
    # one large or unit term per block of 128
    x = np.zeros(4 * 128)
    x[::128] = [1e16, 1.0, -1e16, 1.0]
    assert compensated_sum(x) == 2.0
    assert x.sum() != 2.0


def test_compensated_sum_complex_rows():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(3, 1000)) + 1j * rng.normal(size=(3, 1000))
    want = [complex(mpmath.fsum(map(mpmath.mpc, row))) for row in x]
    assert np.allclose(compensated_sum(x, axis=1), want, rtol=0, atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=300))
def test_compensated_sum_matches_exact(xs):
    exact = float(mpmath.fsum(xs))
    assert abs(compensated_sum(np.array(xs)) - exact) <= 1e-15 * max(1.0, sum(abs(v) for v in xs))


def test_integrate_smooth():
    res = integrate(np.exp, 0.0, 1.0, atol=1e-14, rtol=0)
    assert res.converged
    assert abs(res.value - (math.e - 1)) < 1e-13


def test_integrate_log_singularity_with_breakpoint():
    # int_0^2 log|x - 1| dx = -2
    res = integrate(lambda x: np.log(np.abs(x - 1.0) + 1e-300), 0.0, 2.0, breakpoints=[1.0], atol=1e-10, rtol=0)
    assert abs(res.value + 2.0) < 1e-8


def test_sign_change_points():
    pts = sign_change_points(np.sin, np.linspace(0.5, 10, 40))
    assert np.allclose(pts, [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-12)


def test_superlevel_measure_of_cosine():
    m, _ = superlevel_measure(np.cos, 0.0, 2 * math.pi, 0.5, grid=np.linspace(0, 2 * math.pi, 101))
    assert m == pytest.approx(2 * math.pi / 3, abs=1e-10)
