import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from polydiff.arcs import (MAJOR, MINOR, ZERO, OverlapDetected, best_rational, circ, classify,
                           classify_torus, decompose)


def brute_best(x: F, Q: int):
    cands = [F(a, q) for q in range(1, Q + 1) for a in range(q + 1) if math.gcd(a, q) == 1]
    return min(abs(circ(x - c)) for c in cands)


def test_best_rational_examples():
    assert best_rational(0.5, 10) == (F(1, 2), 0)
    assert best_rational(F(1, 3), 10) == (F(1, 3), 0)
    a_q, beta = best_rational(0.14159, 10)
    assert a_q == F(1, 7)
    # exact value of 0.14159 - 1/7
    assert abs(float(beta) - (0.14159 - 1 / 7)) < 1e-15
    assert abs(float(beta) + 0.0012671428571) < 1e-12


@settings(max_examples=200)
@given(st.integers(0, 10**6), st.integers(1, 10**6), st.integers(1, 25))
def test_best_rational_is_optimal(t, N, Q):
    x = F(t % N, N)
    a_q, beta = best_rational(x, Q)
    assert a_q.denominator <= Q and 0 <= a_q < 1
    assert abs(beta) == brute_best(x, Q)
    assert circ(x - a_q) == beta


def test_ties_prefer_small_q():
    # 1/4 is equidistant from 0/1 and 1/2; 3/4 from 1/2 and 1 = 0/1 on the circle
    assert best_rational(F(1, 4), 2)[0] == 0
    assert best_rational(F(3, 4), 2)[0] == 0
    # equidistant from 1/3 and 1/2: the smaller q wins
    assert best_rational(F(5, 12), 3)[0] == F(1, 2)


def test_classify_examples():
    assert classify(0, 100, 2, 3).kind == ZERO
    lab = classify(34, 100, 2, 3)
    assert lab.kind == MAJOR and (lab.a, lab.q) == (1, 3)
    assert classify(41, 100, 2, 3).kind == MINOR


def test_boundary_is_minor():
    # |t/N - 0| = K/N exactly
    assert classify(2, 100, 2, 1).kind == MINOR
    assert classify_torus(F(1, 10), F(1, 10), 1).kind == MINOR
    assert classify_torus(F(1, 11), F(1, 10), 1).kind == MAJOR


def test_conjugate_symmetry():
    N, K, Q = 210, 3, 6
    for t in range(1, N):
        a, b = classify(t, N, K, Q), classify(N - t, N, K, Q)
        assert a.kind == b.kind
        if a.kind == MAJOR:
            assert b.q == a.q and b.a == (a.q - a.a) % a.q


def test_decompose_examples():
    dec = decompose(100, 2, 3)
    assert len(dec.labels) == 100 and dec.union_identity and dec.disjoint
    assert sum(lab.kind == MAJOR for lab in dec.labels) == 13
    with pytest.raises(OverlapDetected) as exc:
        decompose(gamma=F(1, 5), Q=3)
    assert {exc.value.first, exc.value.second} <= {F(a, q) for q in (1, 2, 3) for a in range(q)}
    dec = decompose(2, F(2, 5), 1)
    assert [lab.kind for lab in dec.labels] == [ZERO, MINOR]


def test_decompose_major_prime_sets():
    dec = decompose(120, 2, 4)
    for q in range(1, 5):
        assert set(dec.major_q(q)) <= set(dec.major_prime_q(q))
        want = {t for t in range(1, 120) for a in range(1, q + 1) if abs(F(t, 120) - F(a, q)) < F(2, 120)
                or abs(F(t, 120) - F(a, q) + 1) < F(2, 120)}
        assert set(dec.major_prime_q(q)) == want


def test_overlap_reported_without_raising():
    dec = decompose(60, 6, 3, raise_on_overlap=False)
    assert not dec.hypothesis and not dec.disjoint and dec.overlaps


def test_csv_export(tmp_path):
    dec = decompose(30, 1, 2)
    p = tmp_path / "arcs.csv"
    dec.write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "t,kind,a,q" and len(lines) == 31
    assert lines[1] == "0,Zero,0,1"
