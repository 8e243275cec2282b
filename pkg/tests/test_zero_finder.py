import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kslab.entire_zoo import sine_family
from kslab.handles import FunctionHandle
from kslab.scenario import random_rational
from kslab.zero_finder import (Contour, locate_zeros, newton, rational_handle, winding_number,
                               zero_count_in, zero_counts_up_to)


def test_winding_of_polynomial():
    h = rational_handle([0.1, -0.2j, 0.5 + 0.5j, 2.0], [])
    assert winding_number(h, Contour.circle(0, 1)).winding == 3


def test_winding_counts_poles_negatively():
    h = rational_handle([0.3], [0.1j, -0.4, 3.0])
    assert winding_number(h, Contour.circle(0, 1)).winding == 1 - 2
    assert zero_count_in(h, Contour.circle(0, 1)) == 1


def test_rectangle_and_sector():
    h = rational_handle([1 + 1j, 2 + 0.5j, -1 + 0.2j], [])
    assert zero_count_in(h, Contour.rectangle(0.5 + 0.1j, 2.5 + 1.5j)) == 2
    sector = Contour.annulus_sector(1.2, 3.0, 0.0, math.pi / 2)
    assert zero_count_in(h, sector) == 2


def test_exp_has_no_zeros():
    h = FunctionHandle(np.exp, np.exp)
    assert zero_count_in(h, Contour.circle(0, 20)) == 0


def test_sin_zero_counts():
    h = FunctionHandle(np.sin, np.cos)
    counts = zero_counts_up_to(h, [1.0, 4.0, 7.0, 10.0])
    assert list(counts) == [1, 3, 5, 7]


def test_locate_double_zeros_of_sin_squared():
    h = FunctionHandle(lambda z: np.sin(z) ** 2, lambda z: 2 * np.sin(z) * np.cos(z))
    zs = locate_zeros(h, Contour.circle(0, 4))
    assert zs.complete
    assert sorted(z.multiplicity for z in zs.zeros) == [2, 2, 2]
    assert np.allclose(np.sort(zs.locations.real), [-math.pi, 0, math.pi], atol=1e-7)


def test_newton_converges():
    h = FunctionHandle(lambda z: z * z - 2, lambda z: 2 * z)
    z, step, ok = newton(h, 1.0)
    assert ok and abs(z - math.sqrt(2)) < 1e-14


def test_inverse_sine_square_has_no_zeros():
    h, _ = sine_family()
    assert zero_count_in(h, Contour.circle(0, 10.0)) == 0


def test_contour_through_pole_is_nudged():
    h = rational_handle([0.5], [1.0])
    assert zero_count_in(h, Contour.circle(0, 1.0)) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_rational_counts(seed):
    rng = np.random.default_rng(seed)
    a, b = random_rational(rng)
    h = rational_handle(a, b)
    assert zero_count_in(h, Contour.circle(0, 1.0)) == int(np.sum(np.abs(a) < 1))
