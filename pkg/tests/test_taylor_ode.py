import math
from concurrent.futures import ThreadPoolExecutor

import mpmath
import numpy as np
import pytest

from kslab.taylor_ode import AIRY_INITIAL, TaylorODESolution, airy_solution


def test_initial_constants_match_gamma_formulas():
    with mpmath.workdps(30):
        ai0 = 1 / (mpmath.cbrt(9) * mpmath.gamma(mpmath.mpf(2) / 3))
        dai0 = -1 / (mpmath.cbrt(3) * mpmath.gamma(mpmath.mpf(1) / 3))
        bi0 = 1 / (mpmath.root(3, 6) * mpmath.gamma(mpmath.mpf(2) / 3))
        dbi0 = mpmath.root(3, 6) / mpmath.gamma(mpmath.mpf(1) / 3)
    for got, want in zip(AIRY_INITIAL["Ai"] + AIRY_INITIAL["Bi"], (ai0, dai0, bi0, dbi0)):
        assert abs(got - float(want)) < 1e-16


def test_harmonic_oscillator_is_sine():
    sol = TaylorODESolution([-1.0], 0.0, 0.0, 1.0)
    z = np.array([0.5, 3 + 1j, -7 + 0.5j, 10j])
    assert np.allclose(sol.evaluate(z), np.sin(z), rtol=1e-12, atol=0)


@pytest.mark.parametrize("z", [2.0, -3.0, 1 + 1j, -4 + 2j, 5j])
def test_airy_against_mpmath(z):
    ai = airy_solution("Ai")
    bi = airy_solution("Bi")
    assert abs(ai(z) - complex(mpmath.airyai(z))) <= 1e-11 * abs(complex(mpmath.airyai(z))) + 1e-15
    g, dg = bi.evaluate(z, derivative=True)
    assert abs(g - complex(mpmath.airybi(z))) <= 1e-11 * abs(g)
    assert abs(dg - complex(mpmath.airybi(z, 1))) <= 1e-11 * abs(dg)


def test_closed_loop_returns_initial_data():
    sol = airy_solution("Bi")
    g, dg = sol.continue_along([0, 1, 1 + 2j, -1 + 2j, -1, 0])
    assert abs(g - sol.g0) <= 10 * sol.step_tol
    assert abs(dg - sol.dg0) <= 10 * sol.step_tol


def test_halving_steps_changes_little():
    z = 3 + 2j
    a = airy_solution("Bi").evaluate(z)
    fine = TaylorODESolution([0.0, 1.0], 0.0, *AIRY_INITIAL["Bi"], step_scale=0.25)
    assert abs(fine.evaluate(z) - a) <= 1e-11 * abs(a)


def test_cached_matches_uncached():
    sol = airy_solution("Ai")
    z = -2.5 + 1.5j
    assert sol.evaluate(z) == pytest.approx(sol.continue_along([0, z])[0], rel=1e-12)


def test_concurrent_evaluation_is_consistent():
    pts = np.linspace(-6, 4, 41) + 0.5j
    serial = airy_solution("Bi").evaluate(pts)
    shared = airy_solution("Bi")
    with ThreadPoolExecutor(4) as pool:
        out = list(pool.map(lambda z: shared.evaluate(z), pts))
    assert np.allclose(out, serial, rtol=1e-12, atol=0)


def test_second_derivative_from_equation():
    sol = airy_solution("Bi")
    z = 1.5 - 0.5j
    assert sol.second_derivative(z) == pytest.approx(z * complex(mpmath.airybi(z)), rel=1e-11)
