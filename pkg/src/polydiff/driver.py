"""Desk-scale density-increment iteration for sets avoiding polynomial differences.

Each step either moves to an edge interval (when the middle of the window is
thin) or finds a major-arc progression with the L^2 increment and passes to a
subprogression of step lambda(q), multiplying the shifts by lambda~_i(q).
After every step the new set is checked exactly against the forbidden
differences of the new auxiliary polynomials.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .auxpoly import AuxiliaryFamily
from .certify import INTEGER, PRIME, UncertifiedPrime, build_root_system, compute_profile
from .expsum import poly_mod
from .extremal import forbidden_differences, verify_avoiding
from .poly import as_poly
from .primes import is_prime, primes_up_to
from .serialize import dumps
from .spectrum import (NoIncrementFound, SetInWindow, arc_l2_mass, balanced_dft,
                       density_increment)


class ValidationFailure(RuntimeError):
    def __init__(self, message: str, trace):
        super().__init__(message)
        self.trace = trace


@dataclass
class DriverConfig:
    c0: float = 0.5
    eps: float = 0.1
    Q_max: int = 12
    n_min: int = 48
    max_steps: int = 25
    c_len: float = 0.25
    refine: int = 4
    sieve_cap: int = 10**4

    @classmethod
    def from_mapping(cls, m) -> "DriverConfig":
        kw = {}
        for k, f in cls.__dataclass_fields__.items():
            if k in m:
                kw[k] = type(f.default)(m[k])
        return cls(**kw)


@dataclass
class Step:
    m: int
    N: int
    size: int
    delta: float
    shifts: list[int]
    branch: str
    q: int | None = None
    lambda_q: int | None = None
    tilde: list[int] = field(default_factory=list)
    theta: float | None = None
    gamma: float | None = None
    Q: int | None = None
    arc_masses: dict = field(default_factory=dict)
    progression: dict | None = None
    windows: list[int] = field(default_factory=list)
    sieve_primes: int = 0
    weighted_major_mass: float | None = None
    minor_sup_ratio: float | None = None
    minor_threshold_violated: bool | None = None
    validated: bool = False


@dataclass
class IterationTrace:
    polys: list[str]
    mode: str
    steps: list[Step] = field(default_factory=list)
    status: str = "running"
    detail: str = ""
    final: SetInWindow | None = None

    def append(self, step: Step) -> None:
        self.steps.append(step)

    def to_jsonl(self) -> str:
        head = {"polys": self.polys, "mode": self.mode, "status": self.status, "detail": self.detail}
        lines = [dumps(x, indent=0).rstrip("\n") for x in [head] + [asdict(s) for s in self.steps]]
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_jsonl())

    def to_json(self) -> dict:
        return {"polys": self.polys, "mode": self.mode, "status": self.status, "detail": self.detail,
                "steps": [asdict(s) for s in self.steps]}

    def invariant_violations(self) -> list[str]:
        bad = []
        for a, b in zip(self.steps, self.steps[1:]):
            if Fraction(b.size, b.N) < Fraction(a.size, a.N):
                bad.append(f"density decreased at step {b.m}")
            if b.N >= a.N:
                bad.append(f"window did not shrink at step {b.m}")
            if b.tilde and b.shifts != [t * d for t, d in zip(b.tilde, a.shifts)]:
                bad.append(f"shifts at step {b.m} are not lambda~(q) times the previous shifts")
            if b.branch == "edge" and b.shifts != a.shifts:
                bad.append(f"edge step {b.m} changed the shifts")
        for s in self.steps:
            if not s.validated:
                bad.append(f"step {s.m} was not validated")
        return bad


def _validate(fam: AuxiliaryFamily, A: SetInWindow, shifts, mode: str):
    F = forbidden_differences(fam, A.N, mode, shifts)
    return verify_avoiding(A.elements, F)


def _windows(fam: AuxiliaryFamily, shifts, N: int) -> list[int]:
    ell = len(fam.polys)
    out = []
    for i, d in enumerate(shifts):
        g = fam.aux_polynomial(i, d)
        out.append(int((N / (9 * ell * abs(g.leading))) ** (1.0 / g.degree)))
    return out


def _s_diagnostics(fam, shifts, mode, A: SetInWindow, S, gamma, Q, windows):
    """Weighted major-arc mass of |f^|^2 |S| and sup |S| / M~ on the minor arcs."""
    M = S.grid
    prod = np.ones(M, dtype=complex)
    total = 1.0
    for i, d in enumerate(shifts):
        g = fam.aux_polynomial(i, d)
        n = np.arange(1, max(windows[i], 1) + 1, dtype=np.int64)
        if mode == PRIME:
            r = fam.shift(i, d)
            n = np.array([k for k in n if is_prime(r + d * int(k))], dtype=np.int64)
        if len(n) == 0:
            return None, None
        v = poly_mod(g, n, M)
        # S_i(t/M) = sum_n e(g(n) t / M)
        prod *= np.fft.ifft(np.bincount(v, minlength=M)) * M
        total *= len(n)
    from .arcs import _arc_members

    major = set()
    for q in range(1, Q + 1):
        for a in range(q):
            if math.gcd(a, q) == 1:
                major.update(_arc_members(M, a, q, Fraction(gamma).limit_denominator(10**12)))
    mask = np.zeros(M, dtype=bool)
    mask[list(major)] = True
    sq = np.abs(S.values) ** 2
    wmass = float(np.sum(sq[mask] * np.abs(prod[mask]))) / M
    minor = np.abs(prod[~mask])
    return wmass, (float(minor.max()) / total if minor.size else 0.0)


def sarkozy_driver(A0, polys, N: int | None = None, mode: str = INTEGER,
                   config: DriverConfig | None = None, family: AuxiliaryFamily | None = None) -> IterationTrace:
    cfg = config or DriverConfig()
    polys = [as_poly(h) for h in ([polys] if isinstance(polys, str) else polys)]
    fam = family or AuxiliaryFamily(build_root_system(polys, mode))
    prof = compute_profile(polys)
    D, Dp = float(prof.D), float(prof.D_prime)
    A = A0 if isinstance(A0, SetInWindow) else SetInWindow(N, tuple(A0))
    shifts = [1] * len(polys)
    trace = IterationTrace([str(h) for h in polys], mode)

    ok, pair = _validate(fam, A, shifts, mode)
    first = Step(0, A.N, A.size, float(A.delta), list(shifts), "start", validated=ok)
    trace.append(first)
    if not ok:
        trace.status = "precondition_failed"
        trace.detail = f"difference {pair[0] - pair[1]} = {pair[0]} - {pair[1]} is forbidden"
        trace.final = A
        return trace

    for m in range(1, cfg.max_steps + 1):
        N, delta = A.N, A.delta
        if N < cfg.n_min:
            trace.status, trace.detail = "floor", f"window {N} below floor {cfg.n_min}"
            break
        if A.size == 0 or delta == 1:
            trace.status, trace.detail = "saturated", f"density {float(delta)}"
            break
        eta = cfg.c0 * float(delta)
        Q = max(1, min(cfg.Q_max, int(eta ** -(D + cfg.eps))))
        gamma = min(eta ** -(Dp + cfg.eps) / N, 1.0 / (4 * Q * Q))
        mid = sum(1 for a in A.elements if 9 * a > N and 9 * a < 8 * N)
        # fields N, size, delta and shifts are overwritten with the state after this step
        step = Step(m, N, A.size, float(delta), list(shifts), "arc", Q=Q, gamma=gamma)
        step.windows = _windows(fam, shifts, N)
        step.sieve_primes = len(primes_up_to(min(int(eta ** -(Dp + cfg.eps)), cfg.sieve_cap)))

        if 4 * mid < 3 * delta * N:
            lo_end, hi_start = N // 9, -(-8 * N // 9)
            left, right = A.count(1, lo_end), A.count(hi_start, N)
            newA = A.restrict(1, lo_end) if left >= right else A.restrict(hi_start, N)
            step.branch = "edge"
            step.q, step.lambda_q = 1, 1
        else:
            S = balanced_dft(A, refine=cfg.refine)
            masses = {q: arc_l2_mass(S, q, gamma)["M_prime_q"] for q in range(1, Q + 1)}
            step.arc_masses = masses
            step.weighted_major_mass, ratio = _s_diagnostics(fam, shifts, mode, A, S, gamma, Q, step.windows)
            step.minor_sup_ratio = ratio
            if ratio is not None:
                step.minor_threshold_violated = ratio > float(delta) / 16
            # M'_q grows with the divisors of q, so near-ties go to the smallest q
            top = max(masses.values())
            near = sorted(q for q in masses if masses[q] >= 0.99 * top)
            rest = sorted((q for q in masses if q not in near), key=lambda q: (-masses[q], q))
            # first candidate whose step-lambda(q) fiber stays above the floor, else the first success
            inc, fallback = None, None
            for q in near + rest:
                theta = min(1.0, masses[q] / (float(delta) ** 2 * N))
                try:
                    cand = density_increment(A, q, gamma, theta, cfg.c_len)
                except NoIncrementFound:
                    continue
                fallback = fallback or cand
                try:
                    fiber = -(-cand.length * q // fam.lambda_total(q))
                except UncertifiedPrime:
                    fiber = cand.length
                if fiber >= cfg.n_min:
                    inc = cand
                    break
            inc = inc or fallback
            if inc is None:
                trace.status, trace.detail = "no_increment", "no progression met the increment target"
                break
            step.q, step.theta = inc.step, inc.theta
            step.progression = inc.to_json()
            try:
                lam = fam.lambda_total(inc.step)
            except UncertifiedPrime as exc:
                # no root at p: keep step q and validate against the pulled-back forbidden set
                newA = inc.A_prime
                parent = set(forbidden_differences(fam, N, mode, shifts).D)
                pulled = [e for e in range(1, newA.N) if inc.step * e in parent]
                ok, _ = verify_avoiding(newA.elements, pulled)
                step.branch, step.validated = "obstruction", ok
                step.N, step.size, step.delta = newA.N, newA.size, float(newA.delta)
                trace.append(step)
                trace.status = "obstruction"
                trace.detail = (f"no p-adic root of polynomial {exc.i} at p = {exc.p}; "
                                f"progression of step {inc.step} reached density {float(newA.delta):.6g}")
                trace.final = newA
                if not ok:
                    raise ValidationFailure("pulled-back avoidance failed", trace)
                return trace
            step.lambda_q = lam
            step.tilde = [fam.lambda_tilde(i, inc.step) for i in range(len(shifts))]
            newA = _subprogression(A, inc, lam)
            shifts = [t * d for t, d in zip(step.tilde, shifts)]
        step.N, step.size, step.delta, step.shifts = newA.N, newA.size, float(newA.delta), list(shifts)
        ok, pair = _validate(fam, newA, shifts, mode)
        step.validated = ok
        trace.append(step)
        if newA.N >= N or newA.delta < delta:
            trace.status = "validation_failed"
            raise ValidationFailure(f"step {m} did not shrink the window or lost density", trace)
        if not ok:
            trace.status = "validation_failed"
            raise ValidationFailure(f"step {m}: inherited avoidance failed at {pair}", trace)
        A = newA
    else:
        trace.status, trace.detail = "max_steps", f"stopped after {cfg.max_steps} steps"
    trace.final = A
    return trace


def _subprogression(A: SetInWindow, inc, lam: int) -> SetInWindow:
    """Densest subprogression of step lambda inside {start + j q : 0 <= j < L}, re-indexed to [1, N']."""
    q, L = inc.step, inc.length
    s = lam // q
    els = set(A.elements)
    best = None
    for l0 in range(min(s, L)):
        idx = list(range(l0, L, s))
        cnt = sum(1 for j in idx if inc.start + j * q in els)
        key = (Fraction(cnt, len(idx)), len(idx), -l0)
        if best is None or key > best[0]:
            best = (key, l0, idx)
    _, l0, idx = best
    sub = tuple(k + 1 for k, j in enumerate(idx) if inc.start + j * q in els)
    return SetInWindow(len(idx), sub)
