"""Gauss sums, Weyl sums, asymptotic main terms and bound envelopes.

Every phase g(s) * a / q is reduced mod q in integers before it is turned
into a float, so coefficient size never costs phase accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .oscint import oscillatory_integral, weighted_power_integral
from .poly import IntPoly
from .primes import is_prime, mobius, phi, prime_flags, primes_up_to

DEFAULT_MAX_TERMS = 50_000_000


class ResourceError(RuntimeError):
    pass


def as_rational(x) -> Fraction:
    """Accept Fraction, int, (a, q) tuples and "a/q" strings; floats are converted exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, tuple):
        return Fraction(x[0], x[1])
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def e(x) -> complex:
    return complex(np.exp(2j * np.pi * x))


# ---------------------------------------------------------------------------
# exact phase reduction
# ---------------------------------------------------------------------------

def poly_mod(g: IntPoly, n: np.ndarray, q: int) -> np.ndarray:
    """g(n) mod q for an int64 array n; requires q < 2**31."""
    if q >= 1 << 31:
        raise ValueError("modulus too large for the int64 path")
    nn = np.asarray(n, dtype=np.int64) % q
    acc = np.zeros(nn.shape, dtype=np.int64)
    for c in reversed(g.coeffs):
        acc = (acc * nn + (c % q)) % q
    return acc


def frac_phases(g: IntPoly, n: np.ndarray, alpha: Fraction) -> np.ndarray:
    """Fractional part of g(n) * alpha, computed exactly then rounded once."""
    a, q = alpha.numerator, alpha.denominator
    n = np.asarray(n, dtype=np.int64)
    if q < 1 << 31:
        v = poly_mod(g, n, q)
        return ((v * (a % q)) % q) / q
    if q & (q - 1) == 0 and q <= 1 << 64:
        # power-of-two denominator (float input): wrap-around uint64 arithmetic is exact mod 2**64
        with np.errstate(over="ignore"):
            nn = n.astype(np.uint64)
            acc = np.zeros(nn.shape, dtype=np.uint64)
            for c in reversed(g.coeffs):
                acc = acc * nn + np.uint64(c % (1 << 64))
            acc = acc * np.uint64(a % (1 << 64))
        mask = np.uint64(q - 1) if q < 1 << 64 else np.uint64((1 << 64) - 1)
        return (acc & mask).astype(np.float64) / float(q)
    return _slow_phases(g, n, alpha)


def _slow_phases(g: IntPoly, n, alpha: Fraction) -> np.ndarray:
    a, q = alpha.numerator, alpha.denominator
    out = np.empty(len(n), dtype=np.float64)
    for k, v in enumerate(n):
        out[k] = ((g(int(v)) * a) % q) / q
    return out


def _expsum(phases: np.ndarray, weights=None) -> complex:
    z = np.exp(2j * np.pi * phases)
    if weights is not None:
        z = z * weights
    return complex(np.sum(z))


# ---------------------------------------------------------------------------
# Gauss sums
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _residues(coeffs: tuple, q: int) -> np.ndarray:
    return poly_mod(IntPoly(coeffs), np.arange(q, dtype=np.int64), q)


def _gauss(g: IntPoly, aq, mask_fn) -> complex:
    r = as_rational(aq)
    a, q = r.numerator % r.denominator, r.denominator
    v = _residues(g.coeffs, q)
    s = np.arange(q, dtype=np.int64)
    if mask_fn is not None:
        m = mask_fn(s, q)
        v = v[m]
    return _expsum(((v * a) % q) / q)


def gauss_complete(g: IntPoly, aq) -> complex:
    """sum_{s=0}^{q-1} e(g(s) a / q)."""
    return _gauss(g, aq, None)


def gauss_unit(g: IntPoly, aq) -> complex:
    """sum over s mod q with (s, q) = 1."""
    return _gauss(g, aq, lambda s, q: np.gcd(s, q) == 1)


def gauss_shifted_prime(g: IntPoly, aq, d: int, r: int) -> complex:
    """sum over s mod q with (d s + r, q) = 1."""
    return _gauss(g, aq, lambda s, q: np.gcd((d * s + r) % q, q) == 1)


def gauss_sieved(g: IntPoly, aq, W: int) -> complex:
    """sum over s mod q with ((s, q), W) = 1."""
    return _gauss(g, aq, lambda s, q: np.gcd(np.gcd(s, q), W) == 1)


def mobius_prediction(aq, d: int) -> complex:
    """mu(q) e(-j a / q) with j = d^{-1} mod q; zero when (d, q) > 1."""
    r = as_rational(aq)
    a, q = r.numerator % r.denominator, r.denominator
    if math.gcd(d, q) != 1:
        return 0j
    j = pow(d, -1, q) if q > 1 else 0
    return mobius(q) * e(Fraction(-j * a % q, q))


# ---------------------------------------------------------------------------
# Weyl sums
# ---------------------------------------------------------------------------

@dataclass
class SumValue:
    value: complex
    terms: int
    absolute_error_budget: float

    def __abs__(self):
        return abs(self.value)


def _float_eval(g: IntPoly, n: np.ndarray) -> np.ndarray:
    x = n.astype(np.float64)
    acc = np.zeros(x.shape, dtype=np.float64)
    for c in reversed(g.coeffs):
        acc = acc * x + float(c)
    return acc


def _phases(g: IntPoly, n: np.ndarray, base: Fraction, beta: float) -> np.ndarray:
    ph = frac_phases(g, n, base)
    if beta:
        ph = ph + np.fmod(beta * _float_eval(g, n), 1.0)
    return ph


def weyl_sum(
    g: IntPoly,
    alpha,
    M: int,
    variant: str = "plain",
    *,
    beta: float = 0.0,
    W: int | None = None,
    L: int | None = None,
    d: int | None = None,
    r: int | None = None,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SumValue:
    """Weyl sum at alpha (+ beta) over 1 <= n <= M.

    variants: plain; sieved (W); weighted (L, optional W: the 1/(wL) normalized
    derivative-weighted sum); prime (d, r: weights phi(d)/d log(dn + r) over dn + r prime).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if M > max_terms:
        raise ResourceError(f"M = {M} exceeds cap {max_terms}")
    base, b = as_rational(alpha), float(beta)
    n = np.arange(1, M + 1, dtype=np.int64)
    weights = None
    if variant == "plain":
        pass
    elif variant == "sieved":
        if not W or W < 1:
            raise ValueError("sieved variant needs W >= 1")
        n = n[np.gcd(n, W) == 1]
    elif variant == "weighted":
        if not L or L < 1:
            raise ValueError("weighted variant needs L >= 1")
        w = 1.0
        if W:
            n = n[np.gcd(n, W) == 1]
            w = math.prod(1 - 1 / p for p in _prime_divisors(W))
        weights = _float_eval(g.derivative(), n) / (w * L)
    elif variant == "prime":
        if d is None or r is None or d < 1:
            raise ValueError("prime variant needs d >= 1 and r")
        top = d * M + r
        flags = prime_flags(max(top, 2))
        vals = d * n + r
        keep = (vals >= 2) & flags[np.clip(vals, 0, None)]
        n = n[keep]
        weights = (phi(d) / d) * np.log((d * n + r).astype(np.float64))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if len(n) == 0:
        return SumValue(0j, 0, 0.0)
    val = _expsum(_phases(g, n, base, b), weights)
    scale = float(np.sum(np.abs(weights))) if weights is not None else float(len(n))
    budget = scale * 1e-15 * (1 + math.log2(len(n))) + (scale * 1e-16 * abs(b) * float(M) ** g.degree if b else 0.0)
    return SumValue(val, int(len(n)), budget)


def _prime_divisors(W: int) -> list[int]:
    out, p = [], 2
    while p * p <= W:
        if W % p == 0:
            out.append(p)
            while W % p == 0:
                W //= p
        p += 1
    if W > 1:
        out.append(W)
    return out


def weighted_spectrum(g: IntPoly, L: int, M: int, W: int | None = None) -> np.ndarray:
    """T(t) for every t in Z_L: (1/(wL)) sum_{n<=M, (n,W)=1} g'(n) e(g(n) t / L)."""
    n = np.arange(1, M + 1, dtype=np.int64)
    w = 1.0
    if W:
        n = n[np.gcd(n, W) == 1]
        w = math.prod(1 - 1 / p for p in _prime_divisors(W))
    v = poly_mod(g, n, L)
    wt = _float_eval(g.derivative(), n)
    bins = np.bincount(v, weights=wt, minlength=L)
    # sum_v c_v e(v t / L) = L * ifft(c)[t]
    return np.fft.ifft(bins) * L / (w * L)


def moment_sum(spectrum, m: float) -> float:
    return float(np.sum(np.abs(np.asarray(spectrum)) ** m))


def default_moment_exponent(degrees) -> int:
    return 2 * min(degrees) ** 2 - 1


def psi_count(x: float, a: int, q: int) -> float:
    from .primes import psi_count as _psi

    return _psi(x, a, q)


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------

@dataclass
class AsymptoticReport:
    direct: complex
    main_term: complex
    error: float
    stated_bound: float
    measured_constant: float
    variant: str

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "direct": [self.direct.real, self.direct.imag],
            "main_term": [self.main_term.real, self.main_term.imag],
            "error": self.error,
            "stated_bound": self.stated_bound,
            "measured_constant": self.measured_constant,
        }


def sieve_density(Y: float, q: int) -> float:
    """prod_{p <= Y, p does not divide q} (1 - 1/p)."""
    out = 1.0
    for p in primes_up_to(int(Y)):
        if q % int(p):
            out *= 1 - 1 / int(p)
    return out


def verify_asymptotic(
    g: IntPoly,
    aq,
    beta: float,
    M: int,
    variant: str = "plain",
    *,
    Y: int | None = None,
    d: int = 1,
    r: int = 1,
    chi_r: float = 0.0,
    rho: float = 0.5,
    cQ: float = 1.0,
) -> AsymptoticReport:
    """Compare a Weyl sum near a/q with the main term of the matching asymptotic formula.

    plain:  q^{-1} G(a,q) I,                        bound q (1 + J M^j |beta|)
    sieved: q^{-1} prod' (1-1/p) G_W(a,q) I, W = prod_{p<=Y} p,
            bound M exp(-log(M/q) / (2 log Y)) (1 + J M^j |beta|)
    prime:  phi(d)/d * d/phi(qd) * G_{d,r}(a,q) (I - chi(r) I_rho),
            bound q M (1 + J M^j |beta|) cQ^{-1}
    The exceptional term chi(r) (d x)^(rho - 1) is absent unless chi_r != 0.
    """
    a_q = as_rational(aq)
    q = a_q.denominator
    J = g.coefficient_l1()
    j = g.degree
    spread = 1 + J * float(M) ** j * abs(beta)
    integral = oscillatory_integral(g, beta, M)
    if variant == "plain":
        direct = weyl_sum(g, a_q, M, beta=beta).value
        main = gauss_complete(g, a_q) / q * integral
        bound = q * spread
    elif variant == "sieved":
        if not Y or Y < 2:
            raise ValueError("sieved variant needs Y >= 2")
        W = math.prod(int(p) for p in primes_up_to(Y))
        direct = weyl_sum(g, a_q, M, "sieved", beta=beta, W=W).value
        main = sieve_density(Y, q) * gauss_sieved(g, a_q, W) / q * integral
        bound = M * math.exp(-math.log(max(M / q, 1.0)) / (2 * math.log(Y))) * spread
    elif variant == "prime":
        direct = weyl_sum(g, a_q, M, "prime", beta=beta, d=d, r=r).value
        G = gauss_shifted_prime(g, a_q, d, r)
        I = integral
        if chi_r:
            I = I - chi_r * weighted_power_integral(g, beta, M, rho, d)
        main = (phi(d) / d) * (d / phi(q * d)) * G * I
        bound = q * M * spread / cQ
    else:
        raise ValueError(f"unknown variant {variant!r}")
    err = abs(direct - main)
    return AsymptoticReport(complex(direct), complex(main), err, bound, err / bound, variant)


def envelope_constant(report: AsymptoticReport, q: int, J: int, M: int, j: int, beta: float) -> float:
    """|direct - main| / (q (1 + J M^j |beta|)), the normalisation used for the acceptance grid."""
    return report.error / (q * (1 + J * float(M) ** j * abs(beta)))


def weyl_inequality_bound(g: IntPoly, aq, X: float) -> float:
    """X (a_j log^{j^2}(a_j q X) (1/q + 1/X + q/(a_j X^j)))^(2^-j), implied constant 1."""
    a_q = as_rational(aq)
    q = a_q.denominator
    aj = g.leading
    j = g.degree
    if aj <= 0:
        raise ValueError("leading coefficient must be positive")
    if X < 2:
        raise ValueError("X must be >= 2")
    inner = aj * math.log(aj * q * X) ** (j * j) * (1 / q + 1 / X + q / (aj * X**j))
    return X * inner ** (2.0**-j)


def siegel_walfisz_ratio(x: float, a: int, q: int) -> float:
    return abs(psi_count(x, a, q) - x / phi(q)) / x


def inequality_xq0(beta: float, x: float) -> bool:
    """1 - x^(-beta) / (1 - beta) >= beta, checked numerically."""
    return 1 - x ** (-beta) / (1 - beta) >= beta


def loglog_slope(qs, values) -> float:
    """Least-squares slope of log|value| against log q (zero values skipped)."""
    qs = np.asarray(qs, dtype=float)
    v = np.abs(np.asarray(values))
    keep = v > 1e-9
    if keep.sum() < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(qs[keep]), np.log(v[keep]), 1)
    return float(slope)


__all__ = [
    "AsymptoticReport",
    "SumValue",
    "as_rational",
    "gauss_complete",
    "gauss_shifted_prime",
    "gauss_sieved",
    "gauss_unit",
    "is_prime",
    "mobius_prediction",
    "moment_sum",
    "psi_count",
    "verify_asymptotic",
    "weighted_spectrum",
    "weyl_inequality_bound",
    "weyl_sum",
]
