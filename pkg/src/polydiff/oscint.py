"""Oscillatory integrals  I(g, beta, X) = int_0^X e(beta g(x)) dx.

The range is split at a point x1 past which the phase is monotone and
fast.  On [0, x1] we use Gauss-Legendre panels no wider than one oscillation
(16- and 24-point rules compared for the error estimate).  On [x1, X] we use
the integration-by-parts expansion

    int e(phi) = [ e(phi) * sum_k B_k / (2 pi i beta)^(k+1) ]_{x1}^{X},
    B_0 = 1/g',  B_{k+1} = -B_k' / g',

whose coefficients are computed exactly with rational Taylor series, so the
end points may sit at phases of size 1e20 without losing accuracy.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .poly import IntPoly

TWO_PI = 2.0 * math.pi
_GL16 = np.polynomial.legendre.leggauss(16)
_GL24 = np.polynomial.legendre.leggauss(24)


class QuadratureError(ArithmeticError):
    pass


@dataclass
class IntegralValue:
    value: complex
    error: float
    panels: int
    split: float | None


def _frac_part(x: Fraction) -> float:
    return float(x - math.floor(x))


def _e_exact(beta: Fraction, g: IntPoly, x: Fraction) -> complex:
    ph = _frac_part(beta * _qeval(g, x))
    return cmath.exp(2j * math.pi * ph)


def _qeval(g: IntPoly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(g.coeffs):
        acc = acc * x + c
    return acc


def _root_bound(p: IntPoly) -> float:
    """Every real root of p lies in (-R, R)."""
    if p.degree < 1:
        return 0.0
    lead = abs(p.leading)
    return 1.0 + max(abs(c) for c in p.coeffs[:-1]) / lead


def _poly_float(coeffs, x):
    acc = np.zeros_like(x)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _panels(phase, weight, a: float, b: float, n: int, chunk: int = 4096):
    """Composite GL on n equal panels of [a, b]; returns (I24, I16)."""
    edges = np.linspace(a, b, n + 1)
    tot24 = 0j
    tot16 = 0j
    for lo in range(0, n, chunk):
        e0 = edges[lo : min(lo + chunk, n) + 1]
        mid = 0.5 * (e0[1:] + e0[:-1])
        half = 0.5 * (e0[1:] - e0[:-1])
        for (nodes, w), slot in ((_GL24, 0), (_GL16, 1)):
            x = mid[:, None] + half[:, None] * nodes[None, :]
            f = np.exp(2j * np.pi * phase(x))
            if weight is not None:
                f = f * weight(x)
            val = np.sum(half * (f @ w))
            if slot == 0:
                tot24 += val
            else:
                tot16 += val
    return tot24, tot16


def _series_inverse(a, order):
    out = [Fraction(0)] * order
    inv0 = 1 / a[0]
    out[0] = inv0
    for n in range(1, order):
        s = sum((a[k] * out[n - k] for k in range(1, min(n, len(a) - 1) + 1)), Fraction(0))
        out[n] = -s * inv0
    return out


def _series_mul(a, b, order):
    out = [Fraction(0)] * order
    for i, x in enumerate(a[:order]):
        if x:
            for j, y in enumerate(b[: order - i]):
                out[i + j] += x * y
    return out


def _ibp_coefficients(gp: IntPoly, x0: Fraction, K: int) -> list[Fraction]:
    """B_0(x0), ..., B_K(x0) exactly."""
    # g'(x0 + t) as a polynomial in t
    shifted = [Fraction(0)] * (gp.degree + 1)
    for k, c in enumerate(gp.coeffs):
        # c * (x0 + t)^k
        for m in range(k + 1):
            shifted[m] += c * math.comb(k, m) * x0 ** (k - m)
    order = K + 2
    inv = _series_inverse(shifted, order)
    B = inv[:]
    out = [B[0]]
    for _ in range(K):
        deriv = [(m + 1) * B[m + 1] for m in range(len(B) - 1)]
        B = [-v for v in _series_mul(deriv, inv, len(deriv))]
        out.append(B[0])
    return out


def _tail_boundary(g: IntPoly, beta: Fraction, x0: Fraction, K: int = 14):
    """Boundary value of the expansion at x0 and the size of the first omitted term."""
    coeffs = _ibp_coefficients(g.derivative(), x0, K)
    base = complex(0, TWO_PI * float(beta))
    terms = []
    for k, c in enumerate(coeffs):
        # magnitudes can underflow double range for huge g'; mpmath-free via logs
        if c == 0:
            terms.append(0j)
            continue
        lg = math.log(abs(c.numerator)) - math.log(c.denominator) - (k + 1) * math.log(abs(base))
        if lg < -700:
            terms.append(0j)
            continue
        mag = math.exp(lg)
        sign = 1 if c > 0 else -1
        terms.append(sign * mag * (1 / (1j if beta > 0 else -1j)) ** (k + 1))
    # truncate before the asymptotic series starts growing
    best, err = 0j, abs(terms[0])
    total = 0j
    for k, t in enumerate(terms):
        if k > 0 and abs(t) > abs(terms[k - 1]) and abs(terms[k - 1]) > 0:
            err = abs(terms[k - 1])
            break
        total += t
        best = total
        err = abs(terms[k + 1]) if k + 1 < len(terms) else abs(t)
    return _e_exact(beta, g, x0) * best, err


def _split_point(g: IntPoly, beta: float, target: float) -> float:
    """Smallest x >= R (root bound of g', g'') with x * |beta g'(x)| >= target."""
    gp = g.derivative()
    R = max(_root_bound(gp), _root_bound(gp.derivative()), 1.0)
    c = [float(v) for v in gp.coeffs]

    def size(x):
        return x * abs(beta) * abs(_poly_float(c, np.array([x]))[0])

    if size(R) >= target:
        return R
    lo, hi = R, 2 * R
    while size(hi) < target:
        lo, hi = hi, 2 * hi
        if hi > 1e300:
            return math.inf
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if size(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def oscillatory_integral_ex(
    g: IntPoly, beta, X, tol: float = 1e-8, max_panels: int = 4_000_000
) -> IntegralValue:
    """int_0^X e(beta g(x)) dx with error estimate; raises QuadratureError on failure."""
    X = float(X)
    if X <= 0:
        raise ValueError("X must be positive")
    beta_q = Fraction(beta)
    b = float(beta_q)
    if b == 0 or g.degree < 1:
        # constant phase
        c = g.coeffs[0] if g.coeffs else 0
        return IntegralValue(complex(X) * cmath.exp(2j * math.pi * _frac_part(beta_q * c)), 0.0, 0, None)

    j = max(g.degree, 1)
    x1 = _split_point(g, b, 1e3 * j * j) if g.degree >= 2 else _split_point(g, b, 1e3)
    head_end = min(x1, X)
    coeffs = [float(v) for v in g.coeffs]

    def phase(x):
        return b * _poly_float(coeffs, x)

    gp_abs = [abs(k * float(v)) for k, v in enumerate(g.coeffs)][1:]
    max_rate = abs(b) * sum(c * head_end**k for k, c in enumerate(gp_abs))
    n = int(math.ceil(head_end * max_rate)) + 4
    if n > max_panels:
        raise QuadratureError(f"head needs {n} panels (cap {max_panels})")
    i24, i16 = _panels(phase, None, 0.0, head_end, n)
    err = abs(i24 - i16)
    value = i24
    split = None
    if x1 < X:
        split = x1
        hi, e_hi = _tail_boundary(g, beta_q, Fraction(X))
        lo, e_lo = _tail_boundary(g, beta_q, Fraction(x1))
        value += hi - lo
        err += 2 * (e_hi + e_lo)
    if not math.isfinite(abs(value)) or err > tol * max(X, 1.0):
        raise QuadratureError(f"estimated error {err:.3g} exceeds {tol * max(X, 1.0):.3g}")
    if g.is_monomial() and g.leading == 1:
        bound = 2 * abs(b) ** (-1.0 / j)
        if abs(value) > bound + err:
            raise AssertionError(f"van der Corput bound violated: {abs(value)} > {bound}")
    return IntegralValue(complex(value), float(err), n, split)


def oscillatory_integral(g: IntPoly, beta, X, tol: float = 1e-8) -> complex:
    return oscillatory_integral_ex(g, beta, X, tol).value


def linear_closed_form(beta: float, X: float) -> complex:
    """int_0^X e(beta x) dx."""
    if beta == 0:
        return complex(X)
    return (cmath.exp(2j * math.pi * X * beta) - 1) / (2j * math.pi * beta)


def weighted_power_integral(g: IntPoly, beta: float, X: float, rho: float, d: int = 1,
                            max_panels: int = 2_000_000) -> complex:
    """int_0^X (d x)^(rho-1) e(beta g(x)) dx via x = u^(1/rho), which removes the singularity."""
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    U = X**rho
    coeffs = [float(v) for v in g.coeffs]

    def phase(u):
        return beta * _poly_float(coeffs, u ** (1.0 / rho))

    gp_abs = [abs(k * float(v)) for k, v in enumerate(g.coeffs)][1:]
    rate = abs(beta) * sum(c * X**k for k, c in enumerate(gp_abs)) * X / max(U, 1e-300)
    n = int(math.ceil(U * rate / rho)) + 8
    if n > max_panels:
        raise QuadratureError(f"weighted integral needs {n} panels")
    i24, i16 = _panels(phase, None, 0.0, U, n)
    if abs(i24 - i16) > 1e-8 * max(U, 1.0):
        raise QuadratureError("weighted integral did not converge")
    return complex(i24) * d ** (rho - 1) / rho
