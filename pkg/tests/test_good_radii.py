import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kslab.errors import ExcludedRadiusError, NormalizationError, SelectionError
from kslab.good_radii import (block_sum, circle_l1, circle_lp, dyadic_block, good_indices,
                              keldysh_angular_measure, octave_tail_sums, select_subsequence)
from kslab.kernel_sum import KernelSum, PoleSpec, build_exclusion_set

F_N2 = KernelSum.generated("power", exponent=2, coefficients="power", rate=3)


def test_dyadic_blocks():
    assert dyadic_block(1) == (1, 1)
    assert dyadic_block(2) == (2, 2)
    assert dyadic_block(3) == (3, 4)
    assert dyadic_block(4) == (3, 4)
    assert dyadic_block(5) == (5, 8)
    assert dyadic_block(9) == (9, 16)


def test_octave_sums_against_brute_force():
    s = octave_tail_sums(F_N2.poles, 8.0, 4)
    n = np.arange(1, 100)
    t = n * n
    w = n ** -3.0 / t ** 2
    for k in range(4):
        band = (t >= 8.0 ** k) & (t < 8.0 ** (k + 1))
        assert s.a[k] == pytest.approx(w[band].sum(), rel=1e-12)


def test_selection_on_geometric_sequence():
    a = 2.0 ** -np.arange(0, 200)
    ks = select_subsequence(a, 64)
    for n, k in enumerate(ks, start=1):
        assert n <= k <= 2 * n
        assert a[k] <= math.sqrt(block_sum(a, k)) / k


def test_selection_on_slowly_decaying_sequence():
    k = np.arange(1, 300.0)
    a = np.concatenate([[0.0], 1.0 / (k ** 2 * np.log(k + 1) ** 2)])
    ks = select_subsequence(a, 64)
    assert len(ks) == 64
    for n, kn in enumerate(ks, start=1):
        assert n <= kn <= 2 * n
        assert a[kn] <= math.sqrt(block_sum(a, kn)) / kn


def test_selection_fails_without_admissible_index():
    # equal weights in blocks {2} and {3, 4}: a_k > sqrt(block sum)/k for k = 2, 3, 4
    a = np.full(20, 1e-30)
    a[1:5] = 1.0
    with pytest.raises(SelectionError):
        select_subsequence(a, 2)


def test_selection_needs_certified_range():
    with pytest.raises(SelectionError):
        select_subsequence(np.ones(10) * 1e-3, 6)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(1.1, 4.0))
def test_selection_invariants_random(seed, p):
    # total mass kept small: the admissible set is only guaranteed dense once block sums are small
    rng = np.random.default_rng(seed)
    k = np.arange(1, 400)
    a = np.concatenate([[0.0], 1e-2 * rng.uniform(0.1, 1.0, k.size) * k ** -p])
    ks = select_subsequence(a, 64)
    assert all(n <= kn <= 2 * n for n, kn in enumerate(ks, start=1))
    assert all(a[kn] <= math.sqrt(block_sum(a, kn)) / kn for kn in ks)
    assert all(x < y for x, y in zip(ks, ks[1:]))


def test_selection_may_fail_for_heavy_early_blocks():
    # a legitimate failure: the first blocks carry most of the mass
    rng = np.random.default_rng(249)
    k = np.arange(1, 400)
    a = np.concatenate([[0.0], rng.uniform(0.1, 1.0, k.size) * k ** -1.25])
    with pytest.raises(SelectionError):
        select_subsequence(a, 64)


def test_good_indices_are_most_of_each_block():
    # at most sqrt of the block count can be bad (Chebyshev-type count)
    a = np.concatenate([[0.0], np.arange(1, 300) ** -2.0])
    good = good_indices(a)
    for m in range(1, 7):
        lo, hi = 2 ** m + 1, 2 ** (m + 1)
        assert good[lo:hi + 1].sum() >= (hi - lo + 1) / 2


def test_circle_l1_against_brute_force():
    # direct sum of 1e4 terms (tail below 1e-24), periodic trapezoid rule on the circle
    r = 20.0
    phi = np.linspace(0, 2 * math.pi, 1024, endpoint=False)
    z = r * np.exp(1j * phi)
    n = np.arange(1, 10001, dtype=float)
    vals = (n ** -3 / (z[:, None] - n * n) ** 2).sum(axis=1)
    want = np.abs(vals).mean() * 2 * math.pi
    assert circle_l1(F_N2.handle(), r, 1e-12) == pytest.approx(want, rel=1e-8)


def test_circle_lp_half():
    # |1/(z-2)^2|^(1/2) on |z| = 1
    ks = KernelSum.explicit([2.0], [1.0])
    want = float(mpmath.quad(lambda p: 1 / abs(mpmath.expj(p) - 2), [0, 2 * mpmath.pi]))
    assert circle_lp(ks.handle(), 1.0, 0.5, 1e-12) == pytest.approx(want, rel=1e-9)


def test_lp_rejects_excluded_radius():
    F = build_exclusion_set(F_N2.poles, 1.0, 100.0)
    with pytest.raises(ExcludedRadiusError):
        circle_l1(F_N2.handle(), 16.0, F=F)


def test_angular_measure_needs_nonzero_sum():
    ks = KernelSum.explicit([1.0, 2.0], [1.0, -1.0])
    with pytest.raises(NormalizationError):
        keldysh_angular_measure(ks, 10.0)


def test_angular_measure_small_for_large_radius():
    ks = KernelSum.explicit([1.0, 1j], [1.0, 1.0])
    mu, S = keldysh_angular_measure(ks, 50.0)
    assert S == pytest.approx(2.0)
    assert mu == 0.0
