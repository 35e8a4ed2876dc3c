"""Forbidden difference sets, avoidance checks and extremal avoiding sets.

Graphs are stored as Python-int bitsets: bit v of adj[v'] is set when v and v'
differ by a forbidden amount.  Maximum independent sets come from a
branch-and-bound with degree-0/1 reductions and a greedy clique-cover bound.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve

from .auxpoly import AuxiliaryFamily
from .certify import INTEGER, PRIME, build_root_system
from .poly import IntPoly, as_poly
from .primes import is_prime

DEFAULT_WINDOW_CAP = 10**7
DEFAULT_RESIDUE_CAP = 400


class ConstructionRejected(RuntimeError):
    pass


class BudgetExhausted(RuntimeError):
    def __init__(self, result):
        super().__init__(f"node budget exhausted; best size {result.size}")
        self.result = result


class CapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class ForbiddenSet:
    N: int
    D: tuple[int, ...]
    provenance: dict = field(default_factory=dict, compare=False)

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["d"])
            w.writerows([d] for d in self.D)

    def to_json(self) -> dict:
        return {"N": self.N, "D": list(self.D), "provenance": self.provenance}


@dataclass
class ExtremalResult:
    witness: tuple[int, ...]
    optimal: bool
    nodes: int = 0
    elapsed_ms: float = 0.0
    verified: bool = False

    @property
    def size(self) -> int:
        return len(self.witness)

    @property
    def lower_bound(self) -> bool:
        return not self.optimal

    def to_json(self) -> dict:
        return {"witness": list(self.witness), "size": self.size, "optimal": self.optimal,
                "lower_bound": self.lower_bound, "nodes": self.nodes, "ms": self.elapsed_ms,
                "verified": self.verified}


# -- forbidden differences ---------------------------------------------------------

def _family(system, mode: str) -> AuxiliaryFamily:
    if isinstance(system, AuxiliaryFamily):
        return system
    if isinstance(system, (str, IntPoly)):
        system = [system]
    return AuxiliaryFamily(build_root_system([as_poly(h) for h in system], mode))


def _term_values(g: IntPoly, lo: int, hi: int, fiber=None) -> list[int]:
    """Values g(n) in [lo, hi], g(n) != 0, for n >= 1 (and fiber(n) when given)."""
    b = g.leading
    # past this point g is monotone in the direction of its leading coefficient
    gp = g.derivative()
    bound = 1
    if gp.degree >= 1:
        bound = 2 + max(abs(c) for c in gp.coeffs[:-1]) // abs(gp.leading)
    out = []
    n = 1
    while True:
        v = g(n)
        if v != 0 and lo <= v <= hi and (fiber is None or fiber(n)):
            out.append(v)
        if n > bound and ((b > 0 and v > hi) or (b < 0 and v < lo)):
            break
        n += 1
    return out


def forbidden_differences(system, N: int, mode: str = INTEGER, shifts=None,
                          cap: int = DEFAULT_WINDOW_CAP) -> ForbiddenSet:
    """All sums of nonzero terms h_i^{d_i}(n_i) landing in [1, N-1]."""
    if N > cap:
        raise CapExceeded(f"window {N} exceeds cap {cap}")
    fam = _family(system, mode)
    ell = len(fam.polys)
    shifts = [1] * ell if shifts is None else [int(d) for d in shifts]
    if len(shifts) != ell:
        raise ValueError("need one shift per polynomial")
    gs = [fam.aux_polynomial(i, shifts[i]) for i in range(ell)]
    signs = {g.leading > 0 for g in gs if g.degree >= 1}
    if len(signs) > 1:
        raise ValueError("mixed-sign leading coefficients are not supported")
    if N < 2:
        return ForbiddenSet(N, (), {"polys": [str(h) for h in fam.polys], "mode": mode, "shifts": shifts})
    positive = signs != {False}

    fibers = []
    for i in range(ell):
        if mode == PRIME:
            r, d = fam.shift(i, shifts[i]), shifts[i]
            fibers.append(lambda n, r=r, d=d: is_prime(r + d * n))
        else:
            fibers.append(None)

    # first pass: extreme values each term can take (bounded on one side)
    vals = []
    if positive:
        lows = []
        for i, g in enumerate(gs):
            v = _term_values(g, -(10**18), 0, fibers[i]) if g.degree >= 1 else []
            lows.append(min(v, default=min(0, g(1))))
        for i, g in enumerate(gs):
            hi = N - 1 - sum(lows[:i] + lows[i + 1 :])
            vals.append(_term_values(g, -(10**18), hi, fibers[i]))
    else:
        highs = []
        for i, g in enumerate(gs):
            v = _term_values(g, 0, 10**18, fibers[i])
            highs.append(max(v, default=0))
        for i, g in enumerate(gs):
            lo = 1 - sum(highs[:i] + highs[i + 1 :])
            vals.append(_term_values(g, lo, 10**18, fibers[i]))
    if any(not v for v in vals):
        return ForbiddenSet(N, (), {"polys": [str(h) for h in fam.polys], "mode": mode, "shifts": shifts})

    # sumset by convolution of indicator arrays
    base = 0
    acc = np.ones(1)
    for v in vals:
        lo = min(v)
        ind = np.zeros(max(v) - lo + 1)
        ind[np.array(v) - lo] = 1.0
        acc = fftconvolve(acc, ind) > 0.5
        acc = acc.astype(np.float64)
        base += lo
    idx = np.nonzero(acc > 0.5)[0] + base
    D = tuple(int(d) for d in idx if 1 <= d <= N - 1)
    return ForbiddenSet(N, D, {"polys": [str(h) for h in fam.polys], "mode": mode, "shifts": shifts})


# -- avoidance -----------------------------------------------------------------

def _mask(A) -> int:
    m = 0
    for a in A:
        m |= 1 << int(a)
    return m


def verify_avoiding_bitset(A, D) -> tuple[bool, tuple[int, int] | None]:
    m = _mask(A)
    for d in sorted(D):
        hit = m & (m >> d)
        if hit:
            lo = (hit & -hit).bit_length() - 1
            return False, (lo + d, lo)
    return True, None


def verify_avoiding_loop(A, D) -> tuple[bool, tuple[int, int] | None]:
    Dset = set(D)
    els = sorted(set(A))
    for a in els:
        for b in els:
            if a - b in Dset:
                return False, (a, b)
    return True, None


def verify_avoiding(A, F, cross_check: bool = False) -> tuple[bool, tuple[int, int] | None]:
    """(True, None) when no a - a' lies in F.D; otherwise (False, first violating pair)."""
    D = F.D if isinstance(F, ForbiddenSet) else tuple(F)
    ok, pair = verify_avoiding_bitset(A, D)
    if cross_check and verify_avoiding_loop(A, D)[0] != ok:
        raise AssertionError("bitset and double-loop avoidance checks disagree")
    return ok, pair


# -- maximum independent set ----------------------------------------------------

def _window_graph(N: int, D) -> list[int]:
    """Vertices 0..N-1 stand for 1..N; edges join vertices differing by d in D."""
    full = (1 << N) - 1
    adj = [0] * N
    for d in D:
        if 1 <= d < N:
            for v in range(N):
                if v + d < N:
                    adj[v] |= 1 << (v + d)
                if v - d >= 0:
                    adj[v] |= 1 << (v - d)
    return [a & full for a in adj]


def _circulant_graph(q: int, F) -> list[int]:
    adj = [0] * q
    for v in range(q):
        for f in F:
            adj[v] |= 1 << ((v + f) % q)
            adj[v] |= 1 << ((v - f) % q)
        adj[v] &= ~(1 << v)
    return adj


def _bits(m: int):
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


class _MIS:
    def __init__(self, adj: list[int], budget: int):
        self.adj = adj
        self.budget = budget
        self.nodes = 0
        self.best = 0
        self.best_set = 0
        self.exhausted = False

    def _cover_bound(self, P: int) -> int:
        """Number of cliques in a greedy clique cover of P (upper bound on any independent set)."""
        cliques: list[int] = []
        for v in _bits(P):
            for k, c in enumerate(cliques):
                if c & ~self.adj[v] == 0:
                    cliques[k] = c | (1 << v)
                    break
            else:
                cliques.append(1 << v)
        return len(cliques)

    def run(self, P: int, chosen: int, size: int) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            self.exhausted = True
            return
        adj = self.adj
        # reductions: a vertex of degree <= 1 in P belongs to some maximum independent set
        changed = True
        while changed and P:
            changed = False
            for v in _bits(P):
                nb = adj[v] & P
                if nb & (nb - 1) == 0:
                    chosen |= 1 << v
                    size += 1
                    P &= ~(nb | (1 << v))
                    changed = True
                    break
        if not P:
            if size > self.best:
                self.best, self.best_set = size, chosen
            return
        if size + self._cover_bound(P) <= self.best:
            return
        # branch on the highest-degree vertex, smallest index on ties
        v = max(_bits(P), key=lambda u: (bin(adj[u] & P).count("1"), -u))
        self.run(P & ~(adj[v] | (1 << v)), chosen | (1 << v), size + 1)
        if self.exhausted:
            return
        self.run(P & ~(1 << v), chosen, size)


def _greedy_mask(adj: list[int], n: int) -> int:
    chosen, blocked = 0, 0
    for v in range(n):
        if not blocked >> v & 1:
            chosen |= 1 << v
            blocked |= adj[v] | (1 << v)
    return chosen


def _mis(adj: list[int], P: int, budget: int, seed: int = 0) -> _MIS:
    s = _MIS(adj, budget)
    s.best_set = seed
    s.best = bin(seed).count("1")
    s.run(P, 0, 0)
    return s


def _lex_min(adj: list[int], n: int, size: int, budget: int) -> tuple[int, int]:
    """Lexicographically smallest independent set of the given (maximum) size."""
    P = (1 << n) - 1
    chosen, need, nodes = 0, size, 0
    for v in range(n):
        if not P >> v & 1 or need == 0:
            continue
        rest = P & ~(adj[v] | (1 << v)) & ~((1 << (v + 1)) - 1)
        s = _MIS(adj, budget)
        s.best = need - 2  # only need to know whether need - 1 is reachable
        s.run(rest, 0, 0)
        nodes += s.nodes
        if s.best >= need - 1:
            chosen |= 1 << v
            need -= 1
            P = rest
        else:
            P &= ~(1 << v)
    return chosen, nodes


def _solve(adj: list[int], n: int, budget: int, canonical: bool = True):
    t0 = time.perf_counter()
    seed = _greedy_mask(adj, n)
    s = _mis(adj, (1 << n) - 1, budget, seed)
    best, nodes, optimal = s.best_set, s.nodes, not s.exhausted
    if optimal and canonical:
        lex, extra = _lex_min(adj, n, s.best, budget)
        nodes += extra
        if bin(lex).count("1") == s.best:
            best = lex
    return best, optimal, nodes, (time.perf_counter() - t0) * 1e3


def greedy_avoiding(F: ForbiddenSet) -> ExtremalResult:
    """First-fit ascending scan of [1, N]."""
    t0 = time.perf_counter()
    D = sorted(d for d in F.D if 1 <= d < F.N)
    chosen, blocked = [], 0
    for x in range(1, F.N + 1):
        if not blocked >> x & 1:
            chosen.append(x)
            for d in D:
                if x + d <= F.N:
                    blocked |= 1 << (x + d)
    res = ExtremalResult(tuple(chosen), False, len(chosen), (time.perf_counter() - t0) * 1e3)
    res.verified = verify_avoiding(res.witness, F)[0]
    if not res.verified:
        raise AssertionError("greedy set failed verification")
    return res


def max_avoiding_exact(F: ForbiddenSet, budget: int = 5_000_000, strict: bool = False,
                       max_n: int = 2000) -> ExtremalResult:
    """Maximum subset of [1, N] with no difference in F.D."""
    if F.N > max_n:
        raise CapExceeded(f"N = {F.N} exceeds exact-search range {max_n}")
    if F.N < 1:
        return ExtremalResult((), True, 0, 0.0, True)
    adj = _window_graph(F.N, F.D)
    best, optimal, nodes, ms = _solve(adj, F.N, budget)
    res = ExtremalResult(tuple(v + 1 for v in _bits(best)), optimal, nodes, ms)
    res.verified = verify_avoiding(res.witness, F)[0]
    if not res.verified:
        raise AssertionError("exact search returned an invalid set")
    if strict and not optimal:
        raise BudgetExhausted(res)
    return res


# -- residues mod q -------------------------------------------------------------

def forbidden_residues(system, q: int) -> list[int]:
    """Nonzero residues of sums h_1(n_1) + ... + h_l(n_l) mod q."""
    polys = [as_poly(h) for h in ([system] if isinstance(system, (str, IntPoly)) else system)]
    acc = {0}
    for h in polys:
        vals = {h(n) % q for n in range(1, q + 1)}
        acc = {(a + v) % q for a in acc for v in vals}
    return sorted(acc - {0})


def residue_avoiding_search(system, q: int, budget: int = 50_000_000,
                            cap: int = DEFAULT_RESIDUE_CAP) -> ExtremalResult:
    """Largest B in Z_q with no difference of distinct elements in the forbidden residues."""
    if q > cap:
        raise CapExceeded(f"q = {q} exceeds cap {cap}")
    F = forbidden_residues(system, q)
    adj = _circulant_graph(q, F)
    best, optimal, nodes, ms = _solve(adj, q, budget)
    res = ExtremalResult(tuple(_bits(best)), optimal, nodes, ms)
    Fs = set(F)
    res.verified = all((a - b) % q not in Fs for a in res.witness for b in res.witness if a != b)
    if not res.verified:
        raise AssertionError("residue search returned an invalid set")
    return res


# -- digit lifting --------------------------------------------------------------

def digit_construction(q: int, B, k: int, system="x^2", free_range: str = "full",
                       mode: str = INTEGER) -> tuple[ExtremalResult, dict]:
    """Base-q digit lift of a residue set B into [1, q^(2k)].

    Even digit positions take values in B, odd positions are free
    ([0, q) for free_range="full", [0, q//2) for "half").  The set is shifted by
    one into [1, N] and always verified against the full forbidden set.
    """
    t0 = time.perf_counter()
    B = sorted({int(b) % q for b in B})
    if not B:
        raise ValueError("B must be nonempty")
    Fq = set(forbidden_residues(system, q))
    if any((a - b) % q in Fq for a in B for b in B if a != b):
        raise ConstructionRejected("B itself has a forbidden difference mod q")
    free = list(range(q if free_range == "full" else q // 2))
    N = q ** (2 * k)
    nums = [0]
    for pos in range(2 * k):
        digits = B if pos % 2 == 0 else free
        nums = [x + d * q**pos for x in nums for d in digits]
    A = tuple(sorted(x + 1 for x in nums))
    F = forbidden_differences(system, N, mode)
    ok, pair = verify_avoiding(A, F)
    if not ok:
        raise ConstructionRejected(f"lifted set has difference {pair[0] - pair[1]} = {pair[0]} - {pair[1]}")
    res = ExtremalResult(A, False, 0, (time.perf_counter() - t0) * 1e3, True)
    exponent = math.log(len(A)) / math.log(N) if N > 1 else 0.0
    target = (1 + math.log(len(B)) / math.log(q)) / 2
    return res, {"N": N, "size": len(A), "exponent": exponent, "target_exponent": target,
                 "q": q, "B": B, "k": k, "free_range": free_range}
