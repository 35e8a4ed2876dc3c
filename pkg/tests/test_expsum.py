import cmath
import math
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polydiff.expsum import (ResourceError, default_moment_exponent, gauss_complete, gauss_shifted_prime,
                             gauss_unit, inequality_xq0, loglog_slope, mobius_prediction, moment_sum,
                             psi_count, verify_asymptotic, weighted_spectrum, weyl_inequality_bound,
                             weyl_sum)
from polydiff.oscint import QuadratureError, linear_closed_form, oscillatory_integral
from polydiff.poly import IntPoly, content, parse_poly as P


def close(a, b, tol=1e-9):
    return abs(complex(a) - complex(b)) <= tol


def test_gauss_complete_examples():
    assert close(gauss_complete(P("x"), F(1, 4)), 0)
    assert abs(abs(gauss_complete(P("x^2"), F(1, 5))) - math.sqrt(5)) < 1e-9
    assert close(gauss_complete(P("x^2"), F(1, 4)), 2 + 2j)


def test_gauss_unit_examples():
    assert close(gauss_unit(P("x"), F(1, 6)), 1)
    assert close(gauss_unit(P("x"), F(1, 4)), 0)
    assert close(gauss_unit(P("x^3+x+7"), F(0, 1)), 1)


def test_gauss_shifted_prime_examples():
    assert close(gauss_shifted_prime(P("x"), F(1, 6), 1, 1), cmath.exp(-2j * math.pi / 6) * -1 * -1)
    assert close(gauss_shifted_prime(P("x"), F(1, 6), 1, 1), 0.5 - 0.8660254037844386j)
    assert close(gauss_shifted_prime(P("x"), F(1, 2), 2, 2), 0)
    assert close(gauss_shifted_prime(P("x^2"), F(1, 5), 1, 0), gauss_unit(P("x^2"), F(1, 5)))


def test_mobius_prediction_matches_direct_sum():
    for q in range(1, 60):
        for a in range(q):
            if math.gcd(a, q) != 1:
                continue
            for d in (1, 2, 3, 5):
                if math.gcd(d, q) == 1:
                    assert close(gauss_shifted_prime(P("x"), F(a, q), d, 1), mobius_prediction(F(a, q), d))


def test_linear_gauss_vanishes():
    for q in range(2, 40):
        for a in range(1, q):
            if math.gcd(a, q) == 1:
                assert abs(gauss_complete(P("x+5"), F(a, q))) <= 1e-12 * q


@settings(max_examples=50)
@given(st.lists(st.integers(-20, 20), min_size=2, max_size=5).filter(lambda c: c[-1] != 0),
       st.sampled_from([(3, 4), (4, 5), (5, 7), (8, 9), (7, 11), (9, 10)]),
       st.integers(1, 200), st.integers(1, 200))
def test_gauss_unit_multiplicative(c, qs, a1, a2):
    g = IntPoly(tuple(c))
    q1, q2 = qs
    a1, a2 = a1 % q1 or 1, a2 % q2 or 1
    if math.gcd(a1, q1) != 1 or math.gcd(a2, q2) != 1:
        return
    total = F(a1, q1) + F(a2, q2)
    assert close(gauss_unit(g, total), gauss_unit(g, F(a1, q1)) * gauss_unit(g, F(a2, q2)), 1e-8)


def test_gauss_magnitude_shape():
    # |G(a/q)| <= C gcd(cont, q)^(1/j) q^(1 - 1/j) with a stable fitted C
    g = P("x^3+2x")
    j = g.degree
    ratios = []
    for q in range(2, 300):
        v = abs(gauss_complete(g, F(1, q)))
        ratios.append(v / (math.gcd(content(g), q) ** (1 / j) * q ** (1 - 1 / j)))
    assert max(ratios) < 3.0


def test_weyl_examples():
    assert close(weyl_sum(P("x^2"), 0, 4).value, 4)
    assert close(weyl_sum(P("x^2"), F(1, 2), 4).value, 0)
    assert close(weyl_sum(P("x"), F(1, 3), 6, "sieved", W=2).value, 0)


def test_weyl_periodic_and_capped():
    for alpha in (F(1, 7), F(3, 11), F(5, 13)):
        assert close(weyl_sum(P("x^3+x"), alpha, 500).value, weyl_sum(P("x^3+x"), alpha + 1, 500).value, 1e-9)
    with pytest.raises(ResourceError):
        weyl_sum(P("x"), 0, 10, max_terms=5)


def test_weyl_weighted_and_prime_variants():
    # weighted at alpha = 0 is (1/L) sum g'(n)
    assert close(weyl_sum(P("x^2"), 0, 10, "weighted", L=100).value, 110 / 100)
    assert close(weyl_sum(P("x"), 0, 10, "prime", d=1, r=0).value, math.log(2 * 3 * 5 * 7))


def test_psi_examples():
    assert abs(psi_count(10, 1, 2) - math.log(105)) < 1e-12
    assert abs(psi_count(10, 0, 1) - math.log(210)) < 1e-12
    assert psi_count(1, 1, 2) == 0


def test_oscillatory_examples():
    assert close(oscillatory_integral(P("x^3"), 0, 7.5), 7.5)
    assert close(oscillatory_integral(P("x"), 0.013, 100), linear_closed_form(0.013, 100), 1e-8)
    assert abs(oscillatory_integral(P("x^2"), 0.01, 100)) <= 20


@pytest.mark.parametrize("j,beta,X", [(2, 1e-3, 100), (3, 1e-4, 50), (2, 0.3, 20), (5, 1e-6, 30)])
def test_oscillatory_against_mpmath(j, beta, X):
    f = lambda x: mpmath.expjpi(2 * beta * x**j)
    # panels short enough to hold about one oscillation each
    n = max(200, int(4 * beta * X**j))
    ref = complex(mpmath.quad(f, mpmath.linspace(0, X, n)))
    assert close(oscillatory_integral(P(f"x^{j}"), beta, X), ref, 1e-7 * X)


def test_oscillatory_rejects_bad_input():
    with pytest.raises((ValueError, QuadratureError)):
        oscillatory_integral(P("x^2"), 0.1, -1)


def test_verify_asymptotic_examples():
    r = verify_asymptotic(P("x^2"), F(0, 1), 0.0, 1000)
    assert r.error == 0 and close(r.main_term, 1000)
    assert verify_asymptotic(P("x^2"), F(1, 5), 0.0, 1000).measured_constant <= 10
    r = verify_asymptotic(P("x"), F(1, 6), 1e-6, 10**4, "prime", d=1, r=1)
    assert r.measured_constant < 1
    # main term = (1/phi(6)) G I with G the Moebius value
    G = mobius_prediction(F(1, 6), 1)
    I = oscillatory_integral(P("x"), 1e-6, 10**4)
    assert close(r.main_term, G * I / 2, 1e-6)


def test_weyl_inequality_bound_values():
    b = weyl_inequality_bound(P("x^2"), F(1, 10**4), 10**4)
    assert math.isfinite(b) and b > 0
    s = abs(weyl_sum(P("x^3"), F(1, 89), 1000).value)
    assert s <= weyl_inequality_bound(P("x^3"), F(1, 89), 1000)
    # degree one: X (a_1 log(a_1 q X) (1/q + 1/X + q/(a_1 X)))^(1/2)
    X, q = 1000, 7
    want = X * (math.log(q * X) * (1 / q + 1 / X + q / X)) ** 0.5
    assert abs(weyl_inequality_bound(P("x"), F(1, q), X) - want) < 1e-9 * want


def test_moment_examples():
    assert moment_sum(np.zeros(16), 7) == 0
    assert moment_sum(np.array([1, 0, 0, 0]), 7) == 1
    assert default_moment_exponent([2]) == 7
    assert default_moment_exponent([3, 4]) == 17


def test_weighted_spectrum_matches_direct_sum():
    g, L, M = P("x^2+3x"), 257, 12
    T = weighted_spectrum(g, L, M)
    for t in (0, 1, 5, 100, 256):
        want = sum((2 * n + 3) * cmath.exp(2j * math.pi * g(n) * t / L) for n in range(1, M + 1)) / L
        assert close(T[t], want, 1e-10)


def test_inequality_xq0_and_slope():
    # stated for beta in [0, 1/2] and x >= 16
    assert all(inequality_xq0(b / 100, x) for b in range(0, 50) for x in (16.0, 100.0, 1e3, 1e6))
    assert not inequality_xq0(0.4, 2.0)
    qs = np.arange(2, 100)
    assert abs(loglog_slope(qs, qs**0.5) - 0.5) < 1e-12
