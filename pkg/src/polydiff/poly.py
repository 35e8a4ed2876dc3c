"""Exact dense integer polynomials.

Coefficients are stored lowest degree first, ``coeffs[i]`` multiplying ``x**i``.
Nothing in this module touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence


class PolySyntaxError(ValueError):
    """Raised by :func:`parse_poly`; ``position`` is a 0-based column."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NonIntegralDivision(ArithmeticError):
    def __init__(self, index: int, coefficient: int, divisor: int):
        super().__init__(
            f"coefficient {coefficient} at index {index} is not divisible by {divisor}"
        )
        self.index = index
        self.coefficient = coefficient
        self.divisor = divisor


def _strip(coeffs: Iterable[int]) -> tuple[int, ...]:
    out = [int(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class IntPoly:
    """Integer polynomial in normal form (no trailing zero coefficients).

    The zero polynomial has ``coeffs == ()`` and degree ``-1``.
    """

    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        for c in self.coeffs:
            if isinstance(c, float) or (isinstance(c, Fraction) and c.denominator != 1):
                raise TypeError(f"non-integer coefficient {c!r}")
        object.__setattr__(self, "coeffs", _strip(self.coeffs))

    # -- construction -----------------------------------------------------
    @classmethod
    def x(cls) -> "IntPoly":
        return cls((0, 1))

    @classmethod
    def const(cls, c: int) -> "IntPoly":
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c: int = 1) -> "IntPoly":
        return cls((0,) * k + (c,))

    @classmethod
    def parse(cls, text: str) -> "IntPoly":
        return parse_poly(text)

    # -- basic data -------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def nonzero_count(self) -> int:
        """Number of nonzero coefficients (the sparsity ``r``)."""
        return sum(1 for c in self.coeffs if c)

    def is_monomial(self) -> bool:
        return self.nonzero_count() == 1 and self.degree >= 1

    def coefficient_l1(self) -> int:
        """``J = |a_0| + ... + |a_j|``."""
        return sum(abs(c) for c in self.coeffs)

    def __call__(self, x):
        return eval_poly(self, x)

    def __iter__(self):
        return iter(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    # -- arithmetic -------------------------------------------------------
    def __neg__(self):
        return IntPoly(tuple(-c for c in self.coeffs))

    def __add__(self, other):
        other = _coerce(other)
        n = max(len(self), len(other))
        return IntPoly(tuple(self[i] + other[i] for i in range(n)))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        if self.is_zero() or other.is_zero():
            return IntPoly()
        out = [0] * (len(self) + len(other) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result, base = IntPoly((1,)), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self) -> "IntPoly":
        return IntPoly(tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def compose_affine(self, r: int, d: int) -> "IntPoly":
        return compose_affine(self, r, d)

    def exact_div(self, c: int) -> "IntPoly":
        return exact_div_scalar(self, c)

    def content(self) -> int:
        return content(self)

    def discriminant(self):
        return discriminant(self)

    def reduce_mod(self, q: int) -> tuple[int, ...]:
        return tuple(c % q for c in self.coeffs)

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"IntPoly({format_poly(self)!r})"


def _coerce(p) -> IntPoly:
    if isinstance(p, IntPoly):
        return p
    if isinstance(p, int):
        return IntPoly((p,))
    if isinstance(p, str):
        return parse_poly(p)
    raise TypeError(f"cannot use {type(p).__name__} as a polynomial")


def as_poly(p) -> IntPoly:
    """Accept an IntPoly, an int, a coefficient sequence or an expression string."""
    if isinstance(p, (list, tuple)):
        return IntPoly(tuple(p))
    return _coerce(p)


# ---------------------------------------------------------------------------
# parsing and formatting
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise PolySyntaxError(msg, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def integer(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected integer")
        return int(self.text[start:self.pos])

    def parse(self) -> IntPoly:
        if not self.text.strip():
            self.error("empty expression")
        p = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return p

    def expr(self) -> IntPoly:
        # a leading sign is accepted so that formatted output re-parses
        sign = 1
        if self.peek() in "+-" and self.peek():
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
        acc = self.term() * sign
        while self.peek() and self.peek() in "+-":
            op = self.text[self.pos]
            self.pos += 1
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> IntPoly:
        acc = self.factor()
        while self.peek() == "*":
            self.pos += 1
            acc = acc * self.factor()
        return acc

    def factor(self) -> IntPoly:
        c = self.peek()
        if c.isdigit():
            n = self.integer()
            nxt = self.peek()
            if nxt == "x" or nxt == "(":
                return IntPoly((n,)) * self.factor()
            return IntPoly((n,))
        if c == "x":
            self.pos += 1
            if self.peek() == "^":
                self.pos += 1
                return IntPoly.monomial(self.integer())
            return IntPoly.x()
        if c == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            if self.peek() == "^":
                self.pos += 1
                return inner ** self.integer()
            return inner
        if not c:
            self.error("unexpected end of input")
        self.error(f"unexpected {c!r}")


def parse_poly(text: str) -> IntPoly:
    """Parse ``text`` (integers, ``x``, ``+ - *``, ``x^k``, parentheses)."""
    return _Parser(text).parse()


def format_poly(p: IntPoly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        c = p.coeffs[k]
        if not c:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = "x" if k == 1 else f"x^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


# ---------------------------------------------------------------------------
# evaluation, content and exact division
# ---------------------------------------------------------------------------

def eval_poly(h: IntPoly, x):
    acc = 0
    for c in reversed(h.coeffs):
        acc = acc * x + c
    return acc


def content(h: IntPoly) -> int:
    """gcd of the non-constant coefficients ``a_1, ..., a_j``."""
    if h.degree < 1:
        raise ValueError("content is defined for polynomials of degree >= 1")
    g = 0
    for c in h.coeffs[1:]:
        g = gcd(g, c)
    return g


def compose_affine(h: IntPoly, r: int, d: int) -> IntPoly:
    """Expand ``h(r + d*x)``."""
    out = IntPoly()
    lin = IntPoly((r, d))
    for c in reversed(h.coeffs):
        out = out * lin + c
    return out


def exact_div_scalar(h: IntPoly, c: int) -> IntPoly:
    if c <= 0:
        raise ValueError("divisor must be positive")
    for i, a in enumerate(h.coeffs):
        if a % c:
            raise NonIntegralDivision(i, a, c)
    return IntPoly(tuple(a // c for a in h.coeffs))


# ---------------------------------------------------------------------------
# rational polynomial helpers (lists of Fraction, low degree first)
# ---------------------------------------------------------------------------

def _qnorm(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _qsub(a, b):
    n = max(len(a), len(b))
    return _qnorm([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)])


def _qderiv(a):
    return _qnorm([i * a[i] for i in range(1, len(a))])


def _qdivmod(a, b):
    a = list(a)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lb = b[-1]
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        f = Fraction(a[-1]) / lb
        q[shift] = f
        for i, c in enumerate(b):
            a[i + shift] -= f * c
        a = _qnorm(a)
    return _qnorm(q), a


def _qmonic(a):
    lc = Fraction(a[-1])
    return [Fraction(c) / lc for c in a]


def _qgcd(a, b):
    a, b = _qnorm(a), _qnorm(b)
    while b:
        a, b = b, _qdivmod(a, b)[1]
    return _qmonic(a) if a else []


def _to_primitive(a) -> IntPoly:
    den = 1
    for c in a:
        den = lcm(den, Fraction(c).denominator)
    ints = [int(Fraction(c) * den) for c in a]
    g = 0
    for c in ints:
        g = gcd(g, c)
    ints = [c // g for c in ints]
    if ints[-1] < 0:
        ints = [-c for c in ints]
    return IntPoly(tuple(ints))


def squarefree_decomposition(h: IntPoly) -> list[tuple[IntPoly, int]]:
    """Yun's algorithm over Q.

    Returns ``[(f_e, e), ...]`` with each ``f_e`` primitive, squarefree, of
    positive degree and positive leading coefficient, pairwise coprime, and
    ``h = c * prod f_e**e`` for a rational constant ``c``.
    """
    if h.degree < 1:
        return []
    f = _qmonic([Fraction(c) for c in h.coeffs])
    fp = _qderiv(f)
    a0 = _qgcd(f, fp)
    b = _qdivmod(f, a0)[0]
    c = _qdivmod(fp, a0)[0]
    d = _qsub(c, _qderiv(b))
    out = []
    e = 1
    while len(b) > 1:
        a = _qgcd(b, d)
        if len(a) > 1:
            out.append((_to_primitive(a), e))
        b = _qdivmod(b, a)[0]
        c = _qdivmod(d, a)[0]
        d = _qsub(c, _qderiv(b))
        e += 1
    return out


def squarefree_part(h: IntPoly) -> IntPoly:
    out = IntPoly((1,))
    for f, _ in squarefree_decomposition(h):
        out = out * f
    return out


def resultant(a, b) -> Fraction:
    """Resultant of two polynomials (IntPoly or Fraction lists) by Euclid."""
    a = _qnorm([Fraction(c) for c in (a.coeffs if isinstance(a, IntPoly) else a)])
    b = _qnorm([Fraction(c) for c in (b.coeffs if isinstance(b, IntPoly) else b)])
    if not a or not b:
        return Fraction(0)
    res = Fraction(1)
    while True:
        m, n = len(a) - 1, len(b) - 1
        if n == 0:
            return res * b[0] ** m
        r = _qdivmod(a, b)[1]
        if not r:
            return Fraction(0)
        k = len(r) - 1
        if (m * n) % 2:
            res = -res
        res *= b[-1] ** (m - k)
        a, b = b, r


def _monic_disc(f) -> Fraction:
    n = len(f) - 1
    if n <= 1:
        return Fraction(1)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * resultant(f, _qderiv(f))


def discriminant(h: IntPoly):
    """``a^(2j-2) * prod_{i != i'} (alpha_i - alpha_i')^(e_i e_i')`` over distinct roots.

    Coincides with the classical discriminant when ``h`` is squarefree, and
    equals 1 in degree one (empty product).  The value is returned as ``int``
    when integral (always so far observed) and as ``Fraction`` otherwise.
    """
    if h.is_zero():
        raise ValueError("discriminant of the zero polynomial")
    j = h.degree
    if j < 1:
        raise ValueError("discriminant needs degree >= 1")
    parts = [(_qmonic([Fraction(c) for c in f.coeffs]), e) for f, e in squarefree_decomposition(h)]
    value = Fraction(h.leading) ** (2 * j - 2)
    for f, e in parts:
        value *= _monic_disc(f) ** (e * e)
    for x in range(len(parts)):
        for y in range(x + 1, len(parts)):
            f, e = parts[x]
            g, k = parts[y]
            nf, ng = len(f) - 1, len(g) - 1
            cross = resultant(f, g) ** 2
            if (nf * ng) % 2:
                cross = -cross
            value *= cross ** (e * k)
    return int(value) if value.denominator == 1 else value


def rational_roots(h: IntPoly) -> list[Fraction]:
    """All distinct rational roots (rational root theorem on each squarefree factor)."""
    if h.is_zero():
        raise ValueError("zero polynomial has every number as a root")
    roots = set()
    for f, _ in squarefree_decomposition(h):
        # strip powers of x first so a_0 != 0
        k = 0
        while f.coeffs[k] == 0:
            k += 1
        if k:
            roots.add(Fraction(0))
        g = IntPoly(f.coeffs[k:])
        if g.degree < 1:
            continue
        for p in _divisors(abs(g.coeffs[0])):
            for q in _divisors(abs(g.leading)):
                for cand in (Fraction(p, q), Fraction(-p, q)):
                    if _qeval(g.coeffs, cand) == 0:
                        roots.add(cand)
    return sorted(roots)


def _qeval(coeffs: Sequence[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _divisors(n: int) -> list[int]:
    from sympy import divisors

    return [int(d) for d in divisors(n)]


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer (``inf`` surrogate 10**9 for 0)."""
    if n == 0:
        return 10**9
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v
