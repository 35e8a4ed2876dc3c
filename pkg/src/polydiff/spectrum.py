"""Transforms of sets, arc masses, the counting identity and the L^2 density increment.

Convention: hat f(t) = sum_x f(x) e(-x t / M) on a grid of M points.  The
normalized transform (M = N, divided by N) is the Z_N setting; the refined
transform (M = 4N, not divided) samples the Z-transform at t/M and is the
discrete surrogate for integrals over the circle, with d(alpha) -> 1/M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arcs import _arc_members, circ, to_fraction

DEFAULT_FFT_CAP = 1 << 24
REFINE = 4


class WeightContractViolated(ValueError):
    def __init__(self, q: int, r: int, lhs: float, rhs: float):
        super().__init__(f"b({q}*{r}) = {lhs} < b({r})/{q} = {rhs}")
        self.pair = (q, r)


class NoIncrementFound(RuntimeError):
    def __init__(self, best, target: Fraction):
        super().__init__(f"best progression density {float(best.density) if best else 0:.6g} "
                         f"is below the target {float(target):.6g}")
        self.best = best
        self.target = target


@dataclass(frozen=True)
class SetInWindow:
    N: int
    elements: tuple[int, ...]

    def __post_init__(self):
        els = tuple(sorted(set(int(a) for a in self.elements)))
        if els and (els[0] < 1 or els[-1] > self.N):
            raise ValueError("elements must lie in [1, N]")
        object.__setattr__(self, "elements", els)

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def delta(self) -> Fraction:
        return Fraction(len(self.elements), self.N) if self.N else Fraction(0)

    def indicator(self) -> np.ndarray:
        """Array of length N + 1 with ind[x] = 1_A(x)."""
        ind = np.zeros(self.N + 1, dtype=np.int64)
        ind[list(self.elements)] = 1
        return ind

    def restrict(self, lo: int, hi: int) -> "SetInWindow":
        """A intersected with [lo, hi], translated to [1, hi - lo + 1]."""
        return SetInWindow(hi - lo + 1, tuple(a - lo + 1 for a in self.elements if lo <= a <= hi))

    def count(self, lo: int, hi: int) -> int:
        return sum(1 for a in self.elements if lo <= a <= hi)


@dataclass
class SpectrumReport:
    values: np.ndarray
    N: int
    grid: int
    normalized: bool
    balanced: bool
    delta: float
    parseval: float
    expected: float

    @property
    def parseval_ok(self) -> bool:
        return abs(self.parseval - self.expected) <= 1e-9 * max(abs(self.expected), 1e-300) or \
            abs(self.parseval - self.expected) < 1e-15

    def weight(self) -> float:
        """Measure of one grid point: 1 in Z_N, 1/M on the circle."""
        return 1.0 if self.normalized else 1.0 / self.grid

    def width_on_circle(self, width) -> Fraction:
        """Arc radius on the circle: K/N in Z_N, gamma itself on T."""
        w = to_fraction(width)
        return w / self.N if self.normalized else w

    def to_rows(self):
        for t, v in enumerate(self.values):
            yield t, float(v.real), float(v.imag), float(abs(v))


def _transform(A: SetInWindow, refine: int, balanced: bool, cap: int) -> SpectrumReport:
    N = A.N
    M = N * refine
    if M > cap:
        raise ValueError(f"transform size {M} exceeds cap {cap}")
    delta = float(A.delta)
    f = np.zeros(M, dtype=np.float64)
    xs = np.arange(1, N + 1)
    ind = A.indicator()[1:].astype(np.float64)
    vals = ind - delta if balanced else ind
    np.add.at(f, xs % M, vals)
    v = np.fft.fft(f)
    sq = float(np.sum(vals * vals))
    if refine == 1:
        v = v / N
        parseval = float(np.sum(np.abs(v) ** 2))
        expected = sq / N
    else:
        parseval = float(np.sum(np.abs(v) ** 2)) / M
        expected = sq
    if balanced and refine == 1:
        v[0] = 0.0 if abs(v[0]) < 1e-12 else v[0]
    return SpectrumReport(v, N, M, refine == 1, balanced, delta, parseval, expected)


def balanced_dft(A: SetInWindow, refine: int = 1, cap: int = DEFAULT_FFT_CAP) -> SpectrumReport:
    """Transform of f_A = 1_A - delta 1_[1,N].  refine=1: normalized on Z_N; refine=4: circle surrogate."""
    return _transform(A, refine, True, cap)


def set_dft(A: SetInWindow, refine: int = 1, cap: int = DEFAULT_FFT_CAP) -> SpectrumReport:
    """Transform of the indicator 1_A itself."""
    return _transform(A, refine, False, cap)


# -- counting identity -----------------------------------------------------------

def difference_count_direct(A: SetInWindow, D) -> int:
    els = set(A.elements)
    ds = {d for d in D if 1 <= d < A.N}
    return sum(1 for a in A.elements for d in ds if a - d in els)


def difference_count_fft(A: SetInWindow, D) -> int:
    N = A.N
    ind = A.indicator()[1:].astype(np.float64)
    size = 1 << (2 * N).bit_length()
    fa = np.fft.rfft(ind, size)
    # r[m] = #{(a, a') : a - a' = m} from the correlation of 1_A with itself
    corr = np.fft.irfft(fa * np.conj(fa), size)
    r = np.rint(corr[:N]).astype(np.int64)
    if np.max(np.abs(corr[:N] - r), initial=0.0) > 0.25:
        raise ArithmeticError("FFT correlation is not close to integers")
    ds = [d for d in set(D) if 1 <= d < N]
    return int(r[ds].sum()) if ds else 0


def difference_count(A: SetInWindow, D) -> int:
    """#{(a, a') in A^2 : a - a' in D}, by FFT correlation, checked against the direct count."""
    D = [int(d) for d in D]
    fast = difference_count_fft(A, D)
    slow = difference_count_direct(A, D)
    if fast != slow:
        raise ArithmeticError(f"FFT count {fast} != direct count {slow}")
    return fast


# -- arc masses ----------------------------------------------------------------

def _arc_set(S: SpectrumReport, q: int, radius: Fraction) -> set[int]:
    out: set[int] = set()
    for a in range(q):
        if math.gcd(a, q) == 1:
            out.update(_arc_members(S.grid, a, q, radius))
    if S.normalized:
        out.discard(0)
    return out


def arc_l2_mass(S: SpectrumReport, q: int, width) -> dict:
    """Mass of |hat f|^2 on M_q and on M'_q = union of M_r over r | q."""
    radius = S.width_on_circle(width)
    sq = np.abs(S.values) ** 2
    mq = _arc_set(S, q, radius)
    mpq: set[int] = set()
    for r in range(1, q + 1):
        if q % r == 0:
            mpq |= _arc_set(S, r, radius)
    w = S.weight()
    return {"M_q": float(sq[sorted(mq)].sum()) * w if mq else 0.0,
            "M_prime_q": float(sq[sorted(mpq)].sum()) * w if mpq else 0.0,
            "points_q": len(mq), "points_prime_q": len(mpq)}


def arc_partition_masses(S: SpectrumReport, width, Q: int) -> dict:
    """Split the Parseval total into zero, major arcs by denominator, and minor arcs.

    Each grid point goes to the closest fraction whose arc contains it.
    """
    radius = S.width_on_circle(width)
    M = S.grid
    owner: dict[int, tuple[Fraction, int]] = {}
    for q in range(1, Q + 1):
        for a in range(q):
            if math.gcd(a, q) != 1:
                continue
            c = Fraction(a, q)
            for t in _arc_members(M, a, q, radius):
                dist = abs(circ(Fraction(t, M) - c))
                prev = owner.get(t)
                if prev is None or dist < prev[0]:
                    owner[t] = (dist, q)
    sq = np.abs(S.values) ** 2 * S.weight()
    out = {"zero": 0.0, "major": {q: 0.0 for q in range(1, Q + 1)}, "minor": 0.0}
    for t in range(M):
        if S.normalized and t == 0:
            out["zero"] += float(sq[t])
        elif t in owner:
            out["major"][owner[t][1]] += float(sq[t])
        else:
            out["minor"] += float(sq[t])
    out["total"] = out["zero"] + sum(out["major"].values()) + out["minor"]
    return out


# -- density increment ---------------------------------------------------------

@dataclass
class IncrementResult:
    start: int
    step: int
    length: int
    count: int
    A_prime: SetInWindow
    theta: float
    target: Fraction = field(default=Fraction(0))

    @property
    def density(self) -> Fraction:
        return Fraction(self.count, self.length)

    @property
    def x(self) -> int:
        """The progression is {x + l*step : 1 <= l <= length}."""
        return self.start - self.step

    def to_json(self) -> dict:
        return {"x": self.x, "step": self.step, "length": self.length, "count": self.count,
                "density": float(self.density), "theta": self.theta, "target": float(self.target)}


def progression_length(N: int, q: int, gamma, theta: float, c: float = 0.25) -> int:
    g = float(to_fraction(gamma))
    scale = min(theta * N, 1.0 / g if g > 0 else math.inf)
    # at least one term: then q L >= (c/2) min(theta N, 1/gamma) even when c scale < q
    L = max(1, int(math.floor(c * scale / q)))
    return min(L, (N - 1) // q + 1)


def densest_progression(A: SetInWindow, q: int, L: int) -> tuple[int, int]:
    """(start, count) maximizing |A cap {start + j q : 0 <= j < L}| inside [1, N]; smallest start on ties."""
    N = A.N
    if L < 1 or (L - 1) * q >= N:
        raise ValueError("progression does not fit in the window")
    ind = A.indicator()[1:]
    rows = -(-N // q)
    pad = np.zeros(rows * q, dtype=np.int64)
    pad[:N] = ind
    grid = pad.reshape(rows, q)
    cs = np.vstack([np.zeros((1, q), dtype=np.int64), np.cumsum(grid, axis=0)])
    counts = cs[L:] - cs[:-L]  # counts[row, col] for start - 1 = row*q + col
    flat = counts.reshape(-1)
    last = N - (L - 1) * q  # largest admissible start
    flat = flat[:last]
    k = int(np.argmax(flat))
    return k + 1, int(flat[k])


def measure_theta(A: SetInWindow, q: int, gamma, refine: int = REFINE) -> float:
    """theta with mass(M'_q(gamma)) = theta delta^2 N on the circle surrogate, capped at 1."""
    if A.size == 0:
        return 0.0
    S = balanced_dft(A, refine=refine)
    mass = arc_l2_mass(S, q, gamma)["M_prime_q"]
    d = float(A.delta)
    return min(1.0, mass / (d * d * A.N))


def density_increment(A: SetInWindow, q: int, gamma, theta: float, c: float = 0.25) -> IncrementResult:
    """Densest progression of step q and length floor(c min(theta N, 1/gamma)/q).

    Raises NoIncrementFound (carrying the best progression seen) when its density
    is below delta (1 + theta/32).
    """
    th = Fraction(theta).limit_denominator(10**12) if theta > 0 else Fraction(0)
    target = A.delta * (1 + th / 32)
    L = progression_length(A.N, q, gamma, theta, c) if theta > 0 else 0
    if L < 1 or A.size == 0:
        raise NoIncrementFound(None, target)
    start, cnt = densest_progression(A, q, L)
    els = set(A.elements)
    sub = tuple(j for j in range(1, L + 1) if start + (j - 1) * q in els)
    res = IncrementResult(start, q, L, cnt, SetInWindow(L, sub), float(theta), target)
    if res.density < target:
        raise NoIncrementFound(res, target)
    return res


# -- the weight-function trick ---------------------------------------------------

def check_weight_contract(b, Q: int, rel: float = 1e-12) -> None:
    for q in range(1, Q + 1):
        for r in range(1, Q + 1):
            lhs, rhs = float(b(q * r)), float(b(r)) / q
            if lhs < rhs * (1 - rel) - 1e-300:
                raise WeightContractViolated(q, r, lhs, rhs)


def rstrick_max(S: SpectrumReport, width, Q: int, b) -> dict:
    """Largest M'_q mass versus the weighted average of M_r masses; the inequality is checked."""
    radius = S.width_on_circle(width)
    if not 2 * radius * Q * Q < 1:
        raise ValueError("arcs are not known to be disjoint: need 2 gamma Q^2 < 1")
    check_weight_contract(b, Q)
    m = {r: arc_l2_mass(S, r, width)["M_q"] for r in range(1, Q + 1)}
    mp = {q: sum(m[r] for r in range(1, q + 1) if q % r == 0) for q in range(1, Q + 1)}
    q_star = max(range(1, Q + 1), key=lambda q: (mp[q], -q))
    norm = 2 * sum(q * float(b(q)) for q in range(1, Q + 1))
    rhs = Q / norm * sum(float(b(r)) * m[r] for r in range(1, Q + 1)) if norm > 0 else 0.0
    lhs = mp[q_star]
    return {"q_star": q_star, "mass": lhs, "rhs": rhs, "ok": lhs >= rhs * (1 - 1e-12),
            "masses_M": m, "masses_M_prime": mp}
