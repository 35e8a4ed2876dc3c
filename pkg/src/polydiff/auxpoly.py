"""Shifts, the lambda functions and auxiliary polynomials of a root system."""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path

from .certify import PRIME, RootSystem
from .poly import IntPoly, compose_affine, content, discriminant, exact_div_scalar
from .primes import crt, factorint, is_prime


class PreconditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class AuxEntry:
    i: int
    d: int
    r: int
    lam: int
    aux: IntPoly

    def to_json(self) -> dict:
        return {"i": self.i, "d": self.d, "r": self.r, "lambda_i_d": self.lam, "aux": list(self.aux.coeffs)}


def _int_ceil_sqrt(n: int) -> int:
    c = math.isqrt(n)
    return c if c * c == n else c + 1


class AuxiliaryFamily:
    """Cached (i, d) -> (r_i^d, lambda_i(d), h_i^d) for a fixed root system."""

    def __init__(self, root_system: RootSystem):
        self.rs = root_system
        self.polys = root_system.polys
        self._cache: dict[tuple[int, int], AuxEntry] = {}
        self._lock = threading.Lock()

    @property
    def mode(self) -> str:
        return self.rs.mode

    # -- shifts and lambdas ---------------------------------------------------
    def shift(self, i: int, d: int) -> int:
        if d < 1:
            raise ValueError("d must be >= 1")
        res, mods = [], []
        for p, j in factorint(d).items():
            res.append(self.rs.root_mod(i, p, j))
            mods.append(p**j)
        x, _ = crt(res, mods)
        r = x % d
        return r - d if r > 0 else 0

    def _exponent(self, indices, p: int) -> int:
        return math.prod(self.rs.multiplicity(k, p) for k in indices)

    def _lam(self, indices, d: int) -> int:
        out = 1
        for p, v in factorint(d).items():
            out *= p ** (self._exponent(indices, p) * v)
        return out

    def lambda_value(self, i: int, d: int) -> int:
        return self._lam([i], d)

    def lambda_total(self, d: int) -> int:
        return self._lam(range(len(self.polys)), d)

    def lambda_tilde(self, i: int, d: int) -> int:
        return self._lam([k for k in range(len(self.polys)) if k != i], d)

    # -- auxiliary polynomials -------------------------------------------------
    def entry(self, i: int, d: int) -> AuxEntry:
        key = (i, d)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        r = self.shift(i, d)
        lam = self.lambda_value(i, d)
        aux = exact_div_scalar(compose_affine(self.polys[i], r, d), lam)
        e = AuxEntry(i, d, r, lam, aux)
        with self._lock:
            self._cache.setdefault(key, e)
        return e

    def aux_polynomial(self, i: int, d: int) -> IntPoly:
        return self.entry(i, d).aux

    def check_invariants(self, i: int, d: int) -> list[str]:
        """Return the list of violated family invariants for (i, d) (empty when fine)."""
        e = self.entry(i, d)
        h = self.polys[i]
        bad = []
        if not (-d < e.r <= 0):
            bad.append("shift outside (-d, 0]")
        if h(e.r) % d:
            bad.append("d does not divide h(r)")
        if self.mode == PRIME and math.gcd(e.r, d) != 1:
            bad.append("gcd(r, d) != 1")
        if e.aux.degree != h.degree:
            bad.append("degree changed")
        if h(0) == 0 and e.aux.nonzero_count() != h.nonzero_count():
            bad.append("sparsity changed")
        return bad

    def check_content_bound(self, i: int, d: int) -> dict:
        h = self.polys[i]
        k = h.degree
        lhs = content(self.aux_polynomial(i, d))
        disc = abs(int(discriminant(h)))
        rhs = _int_ceil_sqrt(disc ** (k - 1)) * content(h)
        return {"lhs": lhs, "rhs": rhs, "ok": lhs <= rhs}

    # -- inheritance ---------------------------------------------------------
    def in_fiber(self, i: int, d: int, n: int) -> bool:
        """n in Lambda_i^d, i.e. r_i^d + d*n is prime."""
        return n >= 1 and is_prime(self.shift(i, d) + d * n)

    def inheritance_pushforward(self, a: int, a_prime: int, ns, q: int, ds) -> dict:
        """Map a difference witness after passing to step lambda(q) back to the parent level."""
        ell = len(self.polys)
        ns, ds = list(ns), list(ds)
        if len(ns) != ell or len(ds) != ell:
            raise PreconditionViolated("need one n_i and one d_i per polynomial")
        diff = a - a_prime
        if diff == 0:
            raise PreconditionViolated("a - a' must be nonzero")
        big = [self.lambda_tilde(i, q) * ds[i] for i in range(ell)]
        total = 0
        for i in range(ell):
            if ns[i] < 1:
                raise PreconditionViolated(f"n_{i} must be a natural number")
            g = self.aux_polynomial(i, big[i])
            t = g(ns[i])
            if t == 0 or (t > 0) != (g.leading > 0):
                raise PreconditionViolated(f"term {i} has the wrong sign or is zero")
            if self.mode == PRIME and not self.in_fiber(i, big[i], ns[i]):
                raise PreconditionViolated(f"n_{i} is not in the prime fiber")
            total += t
        if total != diff:
            raise PreconditionViolated(f"sum of terms {total} != a - a' = {diff}")

        lam_q = self.lambda_total(q)
        s, args, rhs_terms = [], [], 0
        for i in range(ell):
            top, base = self.shift(i, big[i]), self.shift(i, ds[i])
            if (top - base) % ds[i]:
                raise AssertionError("shift compatibility failed")
            si = (top - base) // ds[i]
            m = si + self.lambda_tilde(i, q) * ns[i]
            if m < 1:
                raise AssertionError("pushed-forward index is not a natural number")
            if self.mode == PRIME and not self.in_fiber(i, ds[i], m):
                raise AssertionError("pushed-forward index left the prime fiber")
            s.append(si)
            args.append(m)
            rhs_terms += self.aux_polynomial(i, ds[i])(m)
        if rhs_terms != lam_q * diff:
            raise AssertionError("inheritance identity failed")
        return {"s": s, "arguments": args, "lambda_q": lam_q, "lhs": rhs_terms, "rhs": lam_q * diff}

    # -- leading coefficient dominance ---------------------------------------
    def symbig_defect(self, i: int, d: int, x: int) -> int:
        """|{n : 0 < h(n) < x} symmetric-difference [1, (x/b)^(1/k)]| for h = h_i^d (sign-adjusted)."""
        g = self.aux_polynomial(i, d)
        if g.leading < 0:
            g = -g
        b, k = g.leading, g.degree
        # all real roots of g' and of g - c lie below this Cauchy-type bound
        bound = 1 + max((abs(c) for c in g.coeffs[:-1]), default=0) // b + 1
        hits = set()
        n = 1
        while True:
            v = g(n)
            if 0 < v < x:
                hits.add(n)
            if n > bound and v >= x:
                break
            n += 1
        lo, hi = 0, max(2, int((x / b) ** (1.0 / k)) + 2)
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if b * mid**k <= x:
                lo = mid
            else:
                hi = mid - 1
        return len(hits.symmetric_difference(range(1, lo + 1)))

    # -- persistence ---------------------------------------------------------
    def rows(self) -> list[dict]:
        return [self._cache[k].to_json() for k in sorted(self._cache)]

    def save(self, path) -> None:
        Path(path).write_text(json.dumps({"polys": [str(h) for h in self.polys], "rows": self.rows()}, indent=1))

    def load(self, path) -> int:
        data = json.loads(Path(path).read_text())
        if data["polys"] != [str(h) for h in self.polys]:
            raise ValueError("cache belongs to a different system")
        for row in data["rows"]:
            e = AuxEntry(row["i"], row["d"], row["r"], row["lambda_i_d"], IntPoly(tuple(row["aux"])))
            self._cache[(e.i, e.d)] = e
        return len(data["rows"])
