"""p-adic roots, intersectivity certificates, root systems and system profiles."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .poly import (
    IntPoly,
    discriminant,
    rational_roots,
    squarefree_decomposition,
    valuation,
)
from .primes import is_prime, primes_up_to

INTEGER = "integer"
PRIME = "prime"
MODES = (INTEGER, PRIME)


class UncertifiedPrime(LookupError):
    def __init__(self, p: int, i: int):
        super().__init__(f"no admissible root of polynomial {i} at prime {p}")
        self.p = p
        self.i = i


class InvalidPartition(ValueError):
    def __init__(self, slot: int, reason: str):
        super().__init__(f"slot {slot}: {reason}")
        self.slot = slot


@dataclass(frozen=True)
class PadicRootClass:
    p: int
    residue: int
    precision: int
    multiplicity: int
    liftable: bool = True
    # "hensel" (strong Hensel witness) or "rational" (exact rational root)
    certificate: str = "hensel"
    witness: int = 0
    factor: IntPoly | None = field(default=None, compare=False, repr=False)

    def lift(self, precision: int) -> "PadicRootClass":
        """Same p-adic root, residue taken mod p**precision."""
        if self.factor is None:
            raise ValueError("no factor recorded for lifting")
        res = _lift_root(self.factor, self.residue, self.p, precision)
        return PadicRootClass(
            self.p, res, precision, self.multiplicity, True, self.certificate, self.witness, self.factor
        )

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "residue": self.residue,
            "precision": self.precision,
            "multiplicity": self.multiplicity,
            "liftable": self.liftable,
            "certificate": self.certificate,
            "witness": self.witness,
        }


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def _residue_zeros(f: IntPoly, p: int) -> list[int]:
    """All s in [0, p) with f(s) = 0 mod p."""
    if p < 1 << 31:
        s = np.arange(p, dtype=np.int64)
        acc = np.zeros(p, dtype=np.int64)
        for c in reversed(f.coeffs):
            acc = (acc * s + (c % p)) % p
        return [int(v) for v in np.nonzero(acc == 0)[0]]
    return [s for s in range(p) if f(s) % p == 0]


def _lift_root(f: IntPoly, s: int, p: int, target: int) -> int:
    """Newton iteration from a strong-Hensel start ``s``; returns root mod p**target."""
    fp = f.derivative()
    mod = p**target
    x = s
    while True:
        fx = f(x)
        if fx == 0:
            return x % mod
        dx = fp(x)
        v2 = valuation(dx, p)
        if valuation(fx, p) - v2 >= target:
            return x % mod
        unit = dx // p**v2
        x = (x - (fx // p**v2) * pow(unit, -1, mod)) % (mod * p**v2)


def _hensel_ok(f: IntPoly, fp: IntPoly, s: int, p: int, t: int):
    fx = f(s)
    v2 = valuation(fp(s), p)
    if v2 >= t:
        return None
    if fx != 0 and valuation(fx, p) <= 2 * v2:
        return None
    return v2


def _factor_roots(f: IntPoly, p: int, max_depth: int = 200) -> list[tuple[int, int]]:
    """Certified p-adic roots of a squarefree f as (start s, level t)."""
    fp = f.derivative()
    # tree nodes are disjoint classes and each certified class holds at most one root
    found: list[tuple[int, int]] = []
    frontier = [(s, 1) for s in _residue_zeros(f, p)]
    while frontier:
        s, t = frontier.pop()
        if t > max_depth:
            raise RuntimeError(f"root search did not terminate at p={p}")
        v2 = _hensel_ok(f, fp, s, p, t)
        if v2 is not None:
            # unique candidate root in the class s mod p^t; keep it if it really lies there
            alpha = _lift_root(f, s, p, t + v2 + 1)
            if (alpha - s) % p**t == 0:
                found.append((s, t))
            continue
        pt = p**t
        mod = pt * p
        for k in range(p):
            c = s + k * pt
            if f(c) % mod == 0:
                frontier.append((c, t + 1))
    return sorted(found)


def default_precision(h: IntPoly, p: int) -> int:
    disc = discriminant(h) if h.degree >= 1 else 1
    num = abs(Fraction(disc).numerator)
    return 2 * (valuation(num, p) if num else 0) + 3


def padic_roots(h: IntPoly, p: int, precision: int | None = None) -> list[PadicRootClass]:
    """Residue classes mod p**precision containing a p-adic integer root of h."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if precision is None:
        precision = default_precision(h, p)
    if precision < 1:
        raise ValueError("precision must be >= 1")
    out = []
    for f, e in squarefree_decomposition(h):
        for s, t in _factor_roots(f, p):
            res = _lift_root(f, s, p, precision)
            cert = "rational" if f.degree == 1 else "hensel"
            out.append(PadicRootClass(p, res, precision, e, True, cert, s, f))
    out.sort(key=lambda r: r.residue)
    return out


def roots_mod(h: IntPoly, q: int) -> list[int]:
    """Exhaustive list of s in [0, q) with h(s) = 0 mod q (numpy when it fits)."""
    if q < 1 << 31 and q <= 10**8:
        s = np.arange(q, dtype=np.int64)
        acc = np.zeros(q, dtype=np.int64)
        for c in reversed(h.coeffs):
            acc = (acc * s + (c % q)) % q
        return [int(v) for v in np.nonzero(acc == 0)[0]]
    return [s for s in range(q) if h(s) % q == 0]


def _obstruction_level(h: IntPoly, p: int, unit: bool, max_level: int = 64) -> int:
    """Smallest t such that h has no root (unit root if ``unit``) mod p**t."""
    sols = [s for s in range(p) if h(s) % p == 0 and (not unit or s % p)]
    t = 1
    while sols:
        t += 1
        if t > max_level:
            raise RuntimeError(f"no obstruction found at p={p} up to level {max_level}")
        pt, mod = p ** (t - 1), p**t
        sols = [s + k * pt for s in sols for k in range(p) if h(s + k * pt) % mod == 0]
    return t


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

INTERSECTIVE_COMPLETE = "IntersectiveComplete"
INTERSECTIVE_UPTO = "IntersectiveUpTo"
NOT_INTERSECTIVE = "NotIntersective"
P_INTERSECTIVE_COMPLETE = "PIntersectiveComplete"
P_INTERSECTIVE_UPTO = "PIntersectiveUpTo"
NOT_P_INTERSECTIVE = "NotPIntersective"


@dataclass
class Certificate:
    polynomial: IntPoly
    mode: str
    status: str
    prime_bound: int | None = None
    witness: int | None = None
    witness_prime: int | None = None
    obstructions: list[tuple[int, int]] = field(default_factory=list)
    witnesses: dict[int, PadicRootClass] = field(default_factory=dict)
    rational_roots: list[Fraction] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.status.startswith("Not")

    def to_json(self) -> dict:
        return {
            "polynomial": str(self.polynomial),
            "mode": self.mode,
            "status": self.status,
            "prime_bound": self.prime_bound,
            "witness": self.witness,
            "witness_prime": self.witness_prime,
            "obstructions": [{"p": p, "q": q} for p, q in self.obstructions],
            "rational_roots": [str(r) for r in self.rational_roots],
            "witnesses": {str(p): r.to_json() for p, r in sorted(self.witnesses.items())},
        }


def _complete_by_rational_roots(roots: list[Fraction], mode: str) -> bool:
    if not roots:
        return False
    if mode == INTEGER:
        return reduce(math.gcd, (r.denominator for r in roots)) == 1
    return reduce(math.gcd, (abs(r.numerator * r.denominator) for r in roots)) == 1


def _check_prime(args):
    h, p, mode = args
    roots = padic_roots(h, p, 1)
    if mode == PRIME:
        roots = [r for r in roots if r.residue % p]
    if roots:
        return p, roots[0], None
    return p, None, _obstruction_level(h, p, mode == PRIME)


def certify_intersective(h: IntPoly, prime_bound: int = 1000, mode: str = INTEGER, workers: int = 1) -> Certificate:
    if h.is_zero():
        raise ValueError("zero polynomial")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    complete = INTERSECTIVE_COMPLETE if mode == INTEGER else P_INTERSECTIVE_COMPLETE
    upto = INTERSECTIVE_UPTO if mode == INTEGER else P_INTERSECTIVE_UPTO
    fail = NOT_INTERSECTIVE if mode == INTEGER else NOT_P_INTERSECTIVE

    if h.degree < 1:
        # a nonzero constant c has a root mod q only for q | c
        p = 2 if abs(h.coeffs[0]) % 2 else next(q for q in range(3, 10**6) if is_prime(q) and h.coeffs[0] % q)
        return Certificate(h, mode, fail, prime_bound, witness=p, witness_prime=p, obstructions=[(p, p)])

    roots = rational_roots(h)
    if _complete_by_rational_roots(roots, mode):
        return Certificate(h, mode, complete, None, rational_roots=roots)

    ps = [int(p) for p in primes_up_to(prime_bound)]
    jobs = [(h, p, mode) for p in ps]
    if workers > 1 and len(ps) > 64:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_check_prime, jobs, chunksize=32))
    else:
        results = [_check_prime(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    cert = Certificate(h, mode, upto, prime_bound, rational_roots=roots)
    for p, root, level in results:
        if root is not None:
            cert.witnesses[p] = root
        else:
            cert.obstructions.append((p, p**level))
    if cert.obstructions:
        p, q = cert.obstructions[0]
        cert.status = fail
        cert.witness = q
        cert.witness_prime = p
    return cert


# ---------------------------------------------------------------------------
# root systems
# ---------------------------------------------------------------------------

def _order_at(h: IntPoly, z: int) -> int:
    """Multiplicity of the integer z as a root of h."""
    m = 0
    f = h
    while not f.is_zero() and f(z) == 0:
        # synthetic division by (x - z)
        coeffs = list(f.coeffs)
        out = [0] * (len(coeffs) - 1)
        carry = 0
        for k in range(len(coeffs) - 1, 0, -1):
            carry = coeffs[k] + carry * z
            out[k - 1] = carry
        f = IntPoly(tuple(out))
        m += 1
    return m


@dataclass
class RootSystem:
    polys: list[IntPoly]
    mode: str = INTEGER
    policy: str = "smallest-residue"
    prime_bound: int | None = None
    chosen: dict[tuple[int, int], PadicRootClass] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.forced: dict[int, int] = {}
        for i, h in enumerate(self.polys):
            if self.mode == INTEGER and h(0) == 0:
                self.forced[i] = 0
            elif self.mode == PRIME and h(1) == 0:
                self.forced[i] = 1
            elif self.mode == PRIME and h(-1) == 0:
                self.forced[i] = -1

    def root(self, i: int, p: int) -> PadicRootClass:
        key = (i, p)
        if key not in self.chosen:
            self.chosen[key] = self._select(i, p)
        return self.chosen[key]

    def _select(self, i: int, p: int) -> PadicRootClass:
        h = self.polys[i]
        prec = default_precision(h, p)
        if i in self.forced:
            z = self.forced[i]
            m = _order_at(h, z)
            return PadicRootClass(p, z % p**prec, prec, m, True, "rational", z, IntPoly((-z, 1)))
        cands = padic_roots(h, p, prec)
        if self.mode == PRIME:
            cands = [r for r in cands if r.residue % p]
        if not cands:
            raise UncertifiedPrime(p, i)
        return cands[0]

    def root_mod(self, i: int, p: int, k: int) -> int:
        """z_i^p reduced mod p**k (lifting beyond the stored precision if needed)."""
        r = self.root(i, p)
        if i in self.forced:
            return self.forced[i] % p**k
        if k > r.precision:
            r = r.lift(k)
            self.chosen[(i, p)] = r
        return r.residue % p**k

    def multiplicity(self, i: int, p: int) -> int:
        return self.root(i, p).multiplicity

    def to_json(self) -> dict:
        return {
            "polys": [str(h) for h in self.polys],
            "mode": self.mode,
            "policy": self.policy,
            "roots": [
                {"i": i, **r.to_json()} for (i, p), r in sorted(self.chosen.items())
            ],
        }


def build_root_system(polys, mode: str = INTEGER, precision_policy: str = "smallest-residue", primes=()) -> RootSystem:
    """Root system with lazy per-prime selection; ``primes`` are resolved eagerly."""
    rs = RootSystem([p if isinstance(p, IntPoly) else IntPoly.parse(p) for p in polys], mode, precision_policy)
    for p in primes:
        for i in range(len(rs.polys)):
            rs.root(i, int(p))
    return rs


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

@dataclass
class SystemProfile:
    polys: list[IntPoly]
    l1: int
    l2: int
    l3: int
    degrees: list[int]
    sparsity: list[int]
    D: Fraction
    D_prime: Fraction

    @property
    def k(self) -> int:
        return math.prod(self.degrees)

    @property
    def log2_K(self) -> int:
        return 10 * self.k

    @property
    def K(self) -> int:
        return 2 ** (10 * self.k)

    @property
    def rho(self) -> Fraction:
        return Fraction(1, self.K)

    def to_json(self) -> dict:
        return {
            "polys": [str(h) for h in self.polys],
            "partition": [self.l1, self.l2, self.l3],
            "degrees": self.degrees,
            "sparsity": self.sparsity,
            "D": str(self.D),
            "D_prime": str(self.D_prime),
            "k": self.k,
            "log2_K": self.log2_K,
        }


def compute_profile(polys, partition=None) -> SystemProfile:
    polys = [p if isinstance(p, IntPoly) else IntPoly.parse(p) for p in polys]
    if partition is None:
        partition = (len(polys), 0, 0)
    l1, l2, l3 = partition
    if min(l1, l2, l3) < 0 or l1 + l2 + l3 != len(polys):
        raise InvalidPartition(0, f"partition {partition} does not cover {len(polys)} polynomials")
    for i, h in enumerate(polys, start=1):
        if h.degree < 1:
            raise InvalidPartition(i, "constant polynomial")
        if l1 < i <= l1 + l2 and not h.is_monomial():
            raise InvalidPartition(i, f"{h} is not a monomial")
        if i > l1 + l2:
            if h.is_monomial():
                raise InvalidPartition(i, f"{h} is a monomial")
            if h(0) != 0:
                raise InvalidPartition(i, f"{h} does not vanish at 0")
    degrees = [h.degree for h in polys]
    sparsity = [h.nonzero_count() for h in polys]
    total = sum((Fraction(1, k) for k in degrees[:l1]), Fraction(0))
    total += Fraction(l2, 2)
    total += sum((Fraction(1, r) for r in sparsity[l1 + l2 :]), Fraction(0))
    D = 1 / total
    D_prime = 1 / sum(Fraction(1, k) for k in degrees)
    return SystemProfile(polys, l1, l2, l3, degrees, sparsity, D, D_prime)
