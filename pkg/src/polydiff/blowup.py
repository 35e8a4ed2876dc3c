"""One step of the inner (frequency blow-up) iteration on Z_L, and the rational-sum count.

Given B in [1, L], B1 = B cap [1, L/2] and a set P of large frequencies of
B1, each s in P yields a set P_s of frequencies t (one per major arc of a
dyadic class) with |B1^(s + t)| large.  Pooling the s sharing a class and
adding the underlying fractions gives the new set P'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arcs import _arc_members, circ
from .auxpoly import AuxiliaryFamily
from .certify import INTEGER, PRIME, build_root_system, compute_profile
from .expsum import default_moment_exponent, moment_sum, weighted_spectrum
from .poly import as_poly
from .primes import primorial
from .spectrum import SetInWindow, set_dft


class EmptySelection(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


class BlowupPrecondition(ValueError):
    pass


class BlowupCapExceeded(RuntimeError):
    """The sum-set enumeration would exceed the configured work cap."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class BlowupConfig:
    c0: float = 0.5
    eps: float = 0.1
    c1: float | None = None
    Q_cap: int = 64
    sieve_cap: int = 50
    max_work: int = 5_000_000


@dataclass
class BlowupResult:
    P_prime: list[int]
    U_prime: int
    V_prime: int
    K_prime: int
    growth: float
    p1_ok: bool
    p2_ok: bool
    cr: dict
    P_tilde: list[int]
    P_s: dict[int, list[int]]
    triple: tuple[int, int, int]
    eta: float
    c1: float
    moment: float
    y_size: int
    x_size: int
    failures: list[str] = field(default_factory=list)
    r_size: int = 0
    disjoint_hypothesis: bool = False

    def to_json(self) -> dict:
        return {"P_prime": self.P_prime, "U_prime": self.U_prime, "V_prime": self.V_prime,
                "K_prime": self.K_prime, "growth": self.growth, "p1_ok": self.p1_ok, "p2_ok": self.p2_ok,
                "cr": self.cr, "P_tilde": self.P_tilde,
                "P_s": {str(k): v for k, v in self.P_s.items()}, "triple": list(self.triple),
                "eta": self.eta, "c1": self.c1, "moment": self.moment,
                "y_size": self.y_size, "x_size": self.x_size, "failures": self.failures,
                "r_size": self.r_size, "disjoint_hypothesis": self.disjoint_hypothesis}


def _reduced(Q: int):
    for q in range(1, Q + 1):
        for a in range(q):
            if math.gcd(a, q) == 1:
                yield a, q


def _near(t: int, L: int, Q: int, width) -> list[tuple[int, int]]:
    """(a, q) reduced, q <= Q, with |t/L - a/q| < width/L on the circle; t = 0 gives []."""
    t %= L
    if t == 0:
        return []
    w = Fraction(width)
    wn, wd = w.numerator, w.denominator
    out = []
    seen = set()
    for q in range(1, Q + 1):
        # |t q - a L| < w q in integers: |t q - a L| * wd < wn * q
        lim = wn * q
        c = t * q
        span = (wn * q) // (wd * L) + 1
        a0 = c // L
        for a in range(a0 - span, a0 + span + 2):
            if abs(c - a * L) * wd < lim:
                r = a % q
                if math.gcd(r, q) == 1 and (r, q) not in seen:
                    seen.add((r, q))
                    out.append((r, q))
    return out


def fractions_near(t: int, L: int, Q: int, width) -> list[Fraction]:
    """Reduced a/q with q <= Q and |t/L - a/q| < width/L (circular), excluding t = 0."""
    return [Fraction(a, q) for a, q in _near(t, L, Q, width)]


def _add(x: tuple[int, int], y: tuple[int, int]) -> tuple[int, int]:
    """(a/q + b/r) mod 1 as a reduced pair."""
    n, d = x[0] * y[1] + y[0] * x[1], x[1] * y[1]
    g = math.gcd(n, d)
    n, d = n // g, d // g
    return n % d, d


def _max_tau(n: int) -> int:
    if n < 1:
        return 1
    tau = np.zeros(n + 1, dtype=np.int64)
    for d in range(1, n + 1):
        tau[d::d] += 1
    return int(tau[1:].max())


def cr_count(P_tilde, P_s: dict, V: int, V_tilde: int, K, eta: float, L: int) -> dict:
    """|R| for R = {a/q + b/r} and the lower bound |P~| (min |P_s|)^2 / (V~ E tau^8 (1 + log V))."""
    Kq = Fraction(K).limit_denominator(10**9)
    We = Fraction(1 / eta).limit_denominator(10**9)
    R: set[tuple[int, int]] = set()
    hit: dict[int, set[int]] = {}
    for s in P_tilde:
        s_fr = [(0, 1)] if s % L == 0 else _near(s, L, V, Kq)
        for t in P_s.get(s, []):
            t_fr = _near(t, L, V_tilde, We)
            for b, r in t_fr:
                hit.setdefault(r, set()).add(b)
            for x in s_fr:
                for y in t_fr:
                    R.add(_add(x, y))
    E = max((len(v) for v in hit.values()), default=0)
    tau = _max_tau(V * V_tilde)
    sizes = [len(P_s.get(s, [])) for s in P_tilde]
    mn = min(sizes, default=0)
    denom = V_tilde * E * tau**8 * (1 + math.log(V)) if E else 0
    rhs = len(P_tilde) * mn * mn / denom if denom else 0.0
    return {"lhs": len(R), "rhs": rhs, "E": E, "tau": tau, "min_P_s": mn, "ok": len(R) >= rhs,
            "R": [str(Fraction(n, d)) for n, d in sorted(R, key=lambda p: Fraction(*p))]}


def _check_p(P, Bh1, sigma: float, U: int, V: int, K: int, L: int) -> list[str]:
    """Violations of: P in the arcs M_q(K), q <= V, or {0}; |B1^(t)| >= sigma/U; one point per arc."""
    bad = []
    owners: dict[Fraction, int] = {}
    for t in P:
        if abs(Bh1[t % L]) < sigma / U * (1 - 1e-12):
            bad.append(f"|B1^({t})| below sigma/U")
        if t % L == 0:
            continue
        frs = fractions_near(t, L, V, Fraction(K))
        if not frs:
            bad.append(f"frequency {t} lies on no arc with q <= {V}")
        for fr in frs:
            if fr in owners and owners[fr] != t:
                bad.append(f"arc around {fr} holds {owners[fr]} and {t}")
            owners.setdefault(fr, t)
    return bad


def blowup_step(B: SetInWindow, P, U: int, V: int, K: int, polys, shifts=None, mode: str = INTEGER,
                config: BlowupConfig | None = None, family: AuxiliaryFamily | None = None) -> BlowupResult:
    cfg = config or BlowupConfig()
    polys = [as_poly(h) for h in ([polys] if isinstance(polys, str) else polys)]
    fam = family or AuxiliaryFamily(build_root_system(polys, mode))
    ell = len(polys)
    shifts = [1] * ell if shifts is None else list(shifts)
    prof = compute_profile(polys)
    D, Dp = float(prof.D), float(prof.D_prime)
    L = B.N
    sigma = float(B.delta)
    B1 = SetInWindow(L, tuple(b for b in B.elements if 2 * b <= L))
    Bh = set_dft(B).values
    Bh1 = set_dft(B1).values
    P = sorted({int(t) % L for t in P})
    bad = _check_p(P, Bh1, sigma, U, V, K, L)
    if bad:
        raise BlowupPrecondition("; ".join(bad))

    # weighted spectrum T of the auxiliary polynomials on Z_L
    eta = cfg.c0 * sigma / U
    W = None
    if mode == PRIME:
        W = primorial(min(eta ** -(Dp + cfg.eps), cfg.sieve_cap))
    T = np.ones(L, dtype=complex)
    degrees = []
    for i, d in enumerate(shifts):
        g = fam.aux_polynomial(i, d)
        if g.leading < 0:
            g = -g
        Mi = int((L / (3 * ell * abs(g.leading))) ** (1.0 / g.degree))
        T *= weighted_spectrum(g, L, max(Mi, 1), W)
        degrees.append(g.degree)
    m = default_moment_exponent(degrees)
    C = moment_sum(T, m)
    c1 = cfg.c1 if cfg.c1 is not None else 0.5 * ((40 * ell) ** ell * C ** (1 / m)) ** (-m / 2)
    thr = c1 * sigma ** ((m + 1) / 2) * U ** (-m / 2)

    Qeta = max(1, min(cfg.Q_cap, int(eta ** -(D + cfg.eps))))
    width = Fraction(1 / eta).limit_denominator(10**9)
    arcs = []
    for a, q in _reduced(Qeta):
        mem = [t for t in _arc_members(L, a, q, width / L) if t != 0]
        if mem:
            arcs.append((Fraction(a, q), np.array(mem, dtype=np.int64)))
    absB, absB1, absT = np.abs(Bh), np.abs(Bh1), np.abs(T)

    P_s: dict[int, list[int]] = {}
    triples: dict[int, tuple[int, int, int]] = {}
    y_total, x_total = 0, 0
    for s in P:
        classes: dict[tuple[int, int, int], list] = {}
        for fr, mem in arcs:
            b_vals = absB[mem]
            b1_vals = absB1[(s + mem) % L]
            in_y = np.minimum(b_vals, b1_vals) > thr
            y_total += int(in_y.sum())
            x_total += int((~in_y).sum())
            if not in_y.any():
                continue
            mb, mb1 = float(b_vals.max()), float(b1_vals.max())
            if mb <= 0 or mb1 <= 0:
                continue
            i = max(0, math.ceil(math.log2(fr.denominator)))
            j = max(1, math.ceil(math.log2(sigma / mb)))
            k = max(1, math.ceil(math.log2(sigma / mb1)))
            contrib = float(np.sum(b_vals * b1_vals * absT[mem]))
            best_t = int(mem[int(np.argmax(b1_vals))])
            classes.setdefault((i, j, k), []).append((contrib, best_t))
        if not classes:
            P_s[s] = []
            continue
        key = max(classes, key=lambda c: (sum(x[0] for x in classes[c]), tuple(-v for v in c)))
        i, j, k = key
        P_s[s] = sorted(t for _, t in classes[key])
        triples[s] = (2**k, 2**j, 2**i)  # (U_s, W_s, V_s)

    groups: dict[tuple[int, int, int], list[int]] = {}
    for s, tr in triples.items():
        if P_s[s]:
            groups.setdefault(tr, []).append(s)
    if not groups:
        raise EmptySelection("every frequency class is empty at this scale",
                             {"y_size": y_total, "x_size": x_total, "threshold": thr, "Q_eta": Qeta})
    triple = max(groups, key=lambda tr: (len(groups[tr]), tuple(-v for v in tr)))
    P_tilde = sorted(groups[triple])
    U_t, W_t, V_t = triple
    U2, V2, K2 = U_t, V_t * V, K + math.ceil(1 / eta)

    # one frequency s + t per sum a/q + b/r
    Kq = Fraction(K)
    s_frs = {s: [(0, 1)] if s == 0 else _near(s, L, V, Kq) for s in P_tilde}
    # a priori bound: at most Q + 2 w Q^2 / L fractions with q <= Q lie within w/L of a point
    per_t = V_t + 2 * float(width) * V_t * V_t / L
    bound = sum(len(s_frs[s]) * len(P_s[s]) * per_t for s in P_tilde)
    if bound > cfg.max_work:
        raise BlowupCapExceeded(f"up to {int(bound)} fraction sums exceed max_work = {cfg.max_work}",
                                {"work": int(bound), "P_tilde": len(P_tilde), "V_prime": V2, "K_prime": K2})
    t_frs = {t: _near(t, L, V_t, width) for s in P_tilde for t in P_s[s]}
    work = sum(len(s_frs[s]) * len(t_frs[t]) for s in P_tilde for t in P_s[s])
    if work > cfg.max_work:
        raise BlowupCapExceeded(f"{work} fraction sums exceed max_work = {cfg.max_work}",
                                {"work": work, "P_tilde": len(P_tilde), "V_prime": V2, "K_prime": K2})
    rep: dict[tuple[int, int], int] = {}
    for s in P_tilde:
        for t in P_s[s]:
            for x in s_frs[s]:
                for y in t_frs[t]:
                    rep.setdefault(_add(x, y), (s + t) % L)
    if len(rep) * V2 > cfg.max_work:
        raise BlowupCapExceeded(f"thinning {len(rep)} sums against q <= {V2} exceeds max_work",
                                {"work": len(rep) * V2, "P_tilde": len(P_tilde), "V_prime": V2, "K_prime": K2})
    # keep a representative only if no K'-arc with q <= V' already holds one; with disjoint
    # arcs (2 K' V'^2 < L) nothing is dropped and |P'| = |R|
    P2, taken = [], set()
    for rho in sorted(rep, key=lambda p: Fraction(*p)):
        t2 = rep[rho]
        frs = set(_near(t2, L, V2, Fraction(K2)))
        if t2 in P2 or frs & taken:
            continue
        P2.append(t2)
        taken |= frs
    P2.sort()

    fails = _check_p(P2, Bh1, sigma, U2, V2, K2, L)
    p1 = not any(("below" in f) or ("no arc" in f) for f in fails)
    p2 = not any("holds" in f for f in fails)
    cr = cr_count(P_tilde, P_s, V, V_t, K, eta, L)
    growth = (len(P2) / U2**2) / (len(P) / U**2) if P else 0.0
    return BlowupResult(P2, U2, V2, K2, growth, p1, p2, cr, P_tilde, P_s, triple, eta, c1, C,
                        y_total, x_total, fails, len(rep), 2 * K2 * V2 * V2 < L)
