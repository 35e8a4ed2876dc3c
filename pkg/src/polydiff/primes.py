"""Sieves and small multiplicative-function helpers.

Factoring goes through sympy; the sieve is a plain numpy segmented sieve with
an optional on-disk cache (``POLYDIFF_CACHE`` environment variable).
"""

from __future__ import annotations

import math
import os
from functools import lru_cache
from pathlib import Path

import numpy as np
from sympy import factorint as _factorint
from sympy import isprime as _isprime

DEFAULT_SIEVE_CAP = 10**8


class ResourceCapExceeded(RuntimeError):
    pass


def _base_primes(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0].astype(np.int64)


def _cache_dir() -> Path | None:
    d = os.environ.get("POLYDIFF_CACHE")
    return Path(d) if d else None


@lru_cache(maxsize=8)
def prime_flags(n: int, cap: int = DEFAULT_SIEVE_CAP) -> np.ndarray:
    """Boolean array ``flags[m]`` = m is prime, for 0 <= m <= n."""
    if n > cap:
        raise ResourceCapExceeded(f"sieve bound {n} exceeds cap {cap}")
    n = max(int(n), 1)
    cache = _cache_dir()
    if cache is not None:
        path = cache / f"sieve_{n}.npy"
        if path.exists():
            return np.load(path)
    flags = np.zeros(n + 1, dtype=bool)
    base = _base_primes(math.isqrt(n))
    seg = 1 << 20
    for lo in range(0, n + 1, seg):
        hi = min(lo + seg, n + 1)
        block = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, (lo + p - 1) // p * p)
            block[start - lo :: p] = False
        if lo == 0:
            block[: min(2, hi)] = False
        flags[lo:hi] = block
    flags.setflags(write=False)
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)
        np.save(cache / f"sieve_{n}.npy", flags)
    return flags


def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    return np.nonzero(prime_flags(n))[0].astype(np.int64)


def is_prime(n: int) -> bool:
    return n >= 2 and bool(_isprime(int(n)))


def factorint(n: int) -> dict[int, int]:
    if n < 1:
        raise ValueError("factorint expects a positive integer")
    return {int(p): int(e) for p, e in _factorint(int(n)).items()}


def prime_factors(n: int) -> list[int]:
    return sorted(factorint(n))


def mobius(n: int) -> int:
    f = factorint(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def phi(n: int) -> int:
    out = n
    for p in factorint(n):
        out = out // p * (p - 1)
    return out


def divisors(n: int) -> list[int]:
    out = [1]
    for p, e in factorint(n).items():
        out = [d * p**k for d in out for k in range(e + 1)]
    return sorted(out)


def num_divisors(n: int) -> int:
    return math.prod(e + 1 for e in factorint(n).values())


def radical(n: int) -> int:
    return math.prod(factorint(n))


def crt(residues, moduli) -> tuple[int, int]:
    """Combine ``x = r_i mod m_i`` for pairwise coprime moduli."""
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        inv = pow(m, -1, n)
        x = x + m * ((r - x) * inv % n)
        m *= n
    return x % m, m


def primorial(y: float) -> int:
    return math.prod(int(p) for p in primes_up_to(int(y)))


def psi_count(x: float, a: int, q: int) -> float:
    """Sum of log p over primes p <= x with p = a mod q."""
    if q < 1:
        raise ValueError("q must be positive")
    x = int(math.floor(x))
    if x < 2:
        return 0.0
    ps = primes_up_to(x)
    sel = ps[ps % q == a % q]
    return float(np.log(sel.astype(np.float64)).sum())

