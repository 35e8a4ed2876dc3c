"""Rational approximation and major/minor arc classification.

Two ambients are supported.  On the circle T an arc around a/q has radius
gamma; on Z_N the frequency t is major for a/q when |t/N - a/q| < K/N.
Distances are circular and all comparisons are exact when the input is
rational (t/N, "a/q" strings or floats, which are exact binary rationals).
Boundary cases |beta| = width are minor: the arc is an open interval.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

ZERO, MAJOR, MINOR = "Zero", "Major", "Minor"
TORUS, ZN = "T", "Z_N"
DEFAULT_CELL_CAP = 50_000_000


class OverlapDetected(ValueError):
    """Two distinct major arcs share a point.  Carries the offending fractions."""

    def __init__(self, first: Fraction, second: Fraction, decomposition=None):
        super().__init__(f"arcs around {first} and {second} overlap")
        self.first = first
        self.second = second
        self.decomposition = decomposition


@dataclass(frozen=True)
class ArcLabel:
    kind: str
    a: int
    q: int
    beta: Fraction
    width: Fraction
    Q: int
    ambient: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "a": self.a, "q": self.q, "beta": float(self.beta),
                "width": float(self.width), "Q": self.Q, "ambient": self.ambient}


def to_fraction(alpha) -> Fraction:
    if isinstance(alpha, Fraction):
        return alpha
    if isinstance(alpha, tuple):
        return Fraction(alpha[0], alpha[1])
    if isinstance(alpha, str):
        return Fraction(alpha.strip())
    return Fraction(alpha)


def circ(x: Fraction) -> Fraction:
    """Signed representative of x mod 1 in [-1/2, 1/2)."""
    y = x - math.floor(x)
    return y - 1 if y >= Fraction(1, 2) else y


def best_rational(alpha, Q: int) -> tuple[Fraction, Fraction]:
    """Closest reduced a/q (0 <= a < q <= Q) to alpha on the circle, with beta = alpha - a/q.

    Ties go to the smaller q, then the smaller a.
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    x = to_fraction(alpha)
    x = x - math.floor(x)
    best = x.limit_denominator(Q)
    cands = {best}
    # the mirror point at the same distance, if it is also admissible
    other = 2 * x - best
    if other.denominator <= Q:
        cands.add(other)
    # 0/1 and 1/1 are the same point of the circle
    if best in (0, 1):
        cands.update({Fraction(0), Fraction(1)})

    def key(c: Fraction):
        return (abs(circ(x - c)), c.denominator, c.numerator % c.denominator)

    a_q = min(cands, key=key)
    beta = circ(x - a_q)
    a_q = Fraction(a_q.numerator % a_q.denominator, a_q.denominator)
    return a_q, beta


def classify_torus(alpha, gamma, Q: int) -> ArcLabel:
    g = to_fraction(gamma)
    a_q, beta = best_rational(alpha, Q)
    kind = MAJOR if abs(beta) < g else MINOR
    return ArcLabel(kind, a_q.numerator, a_q.denominator, beta, g, Q, TORUS)


def classify(t: int, N: int, K, Q: int) -> ArcLabel:
    """Label of frequency t in Z_N for the arcs M_q(K), q <= Q."""
    if not 0 <= t < N:
        raise ValueError("need 0 <= t < N")
    Kq = to_fraction(K)
    if t == 0:
        return ArcLabel(ZERO, 0, 1, Fraction(0), Kq, Q, ZN)
    a_q, beta = best_rational(Fraction(t, N), Q)
    kind = MAJOR if abs(beta) < Kq / N else MINOR
    return ArcLabel(kind, a_q.numerator, a_q.denominator, beta, Kq, Q, ZN)


def reduced_fractions(Q: int):
    for q in range(1, Q + 1):
        for a in range(q):
            if math.gcd(a, q) == 1:
                yield Fraction(a, q)


def _arc_members(N: int, a: int, q: int, width: Fraction) -> list[int]:
    """All t in Z_N with |t/N - a/q| < width, circularly (width measured on T)."""
    # |t q - a N| < width q N, i.e. t in an open interval around a N / q
    centre = Fraction(a * N, q)
    radius = width * N
    lo = math.floor(centre - radius) + 1
    hi = math.ceil(centre + radius) - 1
    if hi - lo + 1 >= N:
        return list(range(N))
    return sorted({t % N for t in range(lo, hi + 1)})


@dataclass
class ArcDecomposition:
    N: int | None
    width: Fraction
    Q: int
    ambient: str
    labels: list[ArcLabel] = field(default_factory=list)
    hypothesis: bool = False
    disjoint: bool = True
    overlaps: list[tuple[Fraction, Fraction]] = field(default_factory=list)
    union_identity: bool = True

    def major_q(self, q: int) -> list[int]:
        """Frequencies in M_q (reduced denominator exactly q)."""
        return [t for t, lab in enumerate(self.labels) if lab.kind == MAJOR and lab.q == q]

    def major_prime_q(self, q: int) -> list[int]:
        """Frequencies in M'_q, the union of M_r over r | q (by divisor enumeration)."""
        return [t for t, lab in enumerate(self.labels) if lab.kind == MAJOR and q % lab.q == 0]

    def rows(self):
        for t, lab in enumerate(self.labels):
            yield t, lab.kind, lab.a, lab.q

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "kind", "a", "q"])
            w.writerows(self.rows())

    def to_json(self) -> dict:
        return {"N": self.N, "width": float(self.width), "Q": self.Q, "ambient": self.ambient,
                "hypothesis": self.hypothesis, "disjoint": self.disjoint,
                "overlaps": [[str(x), str(y)] for x, y in self.overlaps],
                "union_identity": self.union_identity,
                "counts": {k: sum(lab.kind == k for lab in self.labels) for k in (ZERO, MAJOR, MINOR)}}


def _pairwise_overlaps(width: Fraction, Q: int) -> list[tuple[Fraction, Fraction]]:
    """Pairs of distinct reduced fractions whose open arcs of radius width meet on T."""
    fr = sorted(reduced_fractions(Q))
    n = len(fr)
    ext = fr + [x + 1 for x in fr]
    out = []
    for i in range(n):
        for j in range(i + 1, i + n):
            if ext[j] - ext[i] >= 2 * width:
                break
            out.append((fr[i], fr[j % n]))
    return out


def decompose(N: int | None = None, K=None, Q: int = 1, gamma=None,
              raise_on_overlap: bool = True, cap: int = DEFAULT_CELL_CAP) -> ArcDecomposition:
    """Label every frequency of Z_N (or only the arc family on T when N is None).

    Pass K for Z_N widths (radius K/N) or gamma for T widths.  Overlaps are
    searched exactly both pairwise and, on Z_N, frequency by frequency.
    """
    if (K is None) == (gamma is None):
        raise ValueError("give exactly one of K or gamma")
    if gamma is not None:
        width = to_fraction(gamma)
        ambient = TORUS
    else:
        if N is None:
            raise ValueError("K widths need N")
        width = to_fraction(K) / N
        ambient = ZN
    if N is not None and N * Q > cap:
        raise ValueError(f"N*Q = {N * Q} exceeds cap {cap}")
    dec = ArcDecomposition(N, width if gamma is not None else to_fraction(K), Q, ambient)
    dec.hypothesis = 2 * width * Q * Q < 1
    dec.overlaps = _pairwise_overlaps(width, Q)

    if N is not None:
        owner: dict[int, Fraction] = {}
        for fr in reduced_fractions(Q):
            for t in _arc_members(N, fr.numerator, fr.denominator, width):
                if t == 0 and ambient == ZN:
                    continue
                prev = owner.get(t)
                if prev is not None and (prev, fr) not in dec.overlaps:
                    dec.overlaps.append((prev, fr))
                owner.setdefault(t, fr)
        for t in range(N):
            if ambient == ZN:
                dec.labels.append(classify(t, N, dec.width, Q))
            else:
                lab = classify_torus(Fraction(t, N), width, Q)
                dec.labels.append(lab)
        # union over r | q of M_r equals the union of the arcs around all a/q, a = 1..q
        for q in range(1, Q + 1):
            via_div = {t for t, lab in enumerate(dec.labels) if lab.kind == MAJOR and q % lab.q == 0}
            direct = set()
            for a in range(1, q + 1):
                direct.update(_arc_members(N, a, q, width))
            if ambient == ZN:
                direct.discard(0)
            if not dec.overlaps and via_div != direct:
                dec.union_identity = False

    dec.disjoint = not dec.overlaps
    if dec.overlaps and raise_on_overlap:
        x, y = dec.overlaps[0]
        raise OverlapDetected(x, y, dec)
    return dec
