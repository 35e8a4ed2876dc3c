from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from polydiff.certify import (INTEGER, PRIME, InvalidPartition, UncertifiedPrime, build_root_system,
                              certify_intersective, compute_profile, padic_roots, roots_mod)
from polydiff.poly import IntPoly, parse_poly as P
from polydiff.primes import primes_up_to

SEXTIC = P("(x^3-19)*(x^2+x+1)")


def test_padic_root_examples():
    (r,) = padic_roots(P("x^2"), 5, 2)
    assert (r.residue, r.precision, r.multiplicity) == (0, 2, 2)
    assert [r.residue for r in padic_roots(P("x^2+x+1"), 7, 1)] == [2, 4]
    assert padic_roots(P("x^2+x+1"), 5, 1) == []


def test_certificate_examples():
    assert certify_intersective(P("x^2-1"), 100).status == "IntersectiveComplete"
    c = certify_intersective(P("x^2+x+1"), 100)
    assert c.status == "NotIntersective"
    # every recorded obstruction is a modulus without roots; 5 is one of them
    assert (5, 5) in c.obstructions
    for _, q in c.obstructions:
        assert roots_mod(P("x^2+x+1"), q) == []
    assert c.witness == 2 and roots_mod(P("x^2+x+1"), 2) == []
    c = certify_intersective(SEXTIC, 10_000, PRIME)
    assert c.status == "PIntersectiveUpTo" and c.prime_bound == 10_000


def test_rational_root_certificates():
    assert certify_intersective(P("x-1"), 50, PRIME).status == "PIntersectiveComplete"
    assert certify_intersective(P("x+1"), 50, PRIME).status == "PIntersectiveComplete"
    # 1/2 and 1/3 together give a root mod every q
    assert certify_intersective(P("(2x-1)*(3x-1)"), 50).status == "IntersectiveComplete"
    c = certify_intersective(P("x"), 50, PRIME)
    assert c.status == "NotPIntersective" and c.witness == 2


def test_not_intersective_witness_is_sound():
    for s in ("x^2-2", "x^3-19", "x^2+1"):
        c = certify_intersective(P(s), 200)
        assert c.status == "NotIntersective"
        assert roots_mod(P(s), c.witness) == []
        assert all(P(s)(x) % c.witness for x in range(c.witness))


def test_sextic_has_unit_root_at_every_small_prime():
    for p in primes_up_to(300):
        p = int(p)
        roots = [r for r in padic_roots(SEXTIC, p) if r.residue % p]
        assert roots, p
        for r in roots:
            assert SEXTIC(r.residue) % p**r.precision == 0


def test_lift_consistency():
    for p in (2, 3, 5, 7, 19):
        for r in padic_roots(SEXTIC, p):
            up = r.lift(r.precision + 1)
            assert up.residue % p**r.precision == r.residue
            assert SEXTIC(up.residue) % p**up.precision == 0


@settings(max_examples=40)
@given(st.lists(st.integers(-6, 6), min_size=2, max_size=4).filter(lambda c: c[-1] != 0),
       st.sampled_from([2, 3, 4, 6, 8, 9, 12, 25]))
def test_roots_mod_matches_brute_force(c, q):
    h = IntPoly(tuple(c))
    assert sorted(roots_mod(h, q)) == [x for x in range(q) if h(x) % q == 0]


def test_root_system_examples():
    rs = build_root_system([P("x^3")])
    for p in (2, 3, 7, 101):
        assert rs.root(0, p).residue == 0 and rs.multiplicity(0, p) == 3
    rs = build_root_system([P("x-1")], PRIME)
    assert all(rs.root(0, p).residue == 1 for p in (2, 3, 5, 7))
    assert build_root_system([P("x^2-2")]).root(0, 7).residue % 7 == 3
    rs = build_root_system([SEXTIC], PRIME)
    assert all(rs.root(0, p).residue % p for p in (2, 3, 5, 7, 11, 13))


def test_root_system_missing_prime():
    rs = build_root_system([P("x^2+x+1")])
    with pytest.raises(UncertifiedPrime) as exc:
        rs.root(0, 2)
    assert (exc.value.p, exc.value.i) == (2, 0)


def test_profile_examples():
    prof = compute_profile(["x^2"], (0, 1, 0))
    assert prof.D == 2 and prof.D_prime == 2
    assert compute_profile(["x^2", "x^5"], (0, 2, 0)).D == 1
    prof = compute_profile(["x+2*x^17+x^31"], (0, 0, 1))
    assert prof.D == 3 and prof.D_prime == 31
    assert compute_profile(["x^3"]).D == 3
    assert compute_profile(["x^2", "x^3"]).D == Fraction(6, 5)
    prof = compute_profile(["x^2", "x^3"])
    assert prof.k == 6 and prof.K == 2**60 and prof.rho == Fraction(1, 2**60)


def test_profile_rejects_bad_partitions():
    with pytest.raises(InvalidPartition, match="slot 1"):
        compute_profile(["x^2+1"], (0, 1, 0))
    with pytest.raises(InvalidPartition):
        compute_profile(["x^2+x+1"], (0, 0, 1))
    with pytest.raises(InvalidPartition):
        compute_profile(["x^2"], (1, 1, 0))
