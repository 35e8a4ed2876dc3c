import random

import pytest

from polydiff.auxpoly import AuxiliaryFamily, PreconditionViolated
from polydiff.certify import INTEGER, PRIME, UncertifiedPrime, build_root_system
from polydiff.poly import parse_poly as P

SEXTIC = "(x^3-19)*(x^2+x+1)"


def family(*polys, mode=INTEGER):
    return AuxiliaryFamily(build_root_system([P(h) for h in polys], mode))


def test_shift_examples():
    assert family("x^2").shift(0, 10) == 0
    assert family("x^2-2").shift(0, 7) == -4
    f = family("x-1", mode=PRIME)
    assert f.shift(0, 6) == -5


def test_lambda_examples():
    f = family("x^2")
    assert all(f.lambda_total(d) == d * d for d in range(1, 60))
    assert family("x^2-2").lambda_total(7) == 7
    f = family("x^2", "x^3")
    for p in (2, 3, 5, 7):
        assert f.lambda_total(p) == p**6
        assert f.lambda_tilde(0, p) == p**3
        assert f.lambda_tilde(1, p) == p**2
    # complete multiplicativity
    assert f.lambda_value(1, 12) == f.lambda_value(1, 4) * f.lambda_value(1, 3)


def test_single_polynomial_tilde_is_identity():
    # the empty composition is the identity map, so lambda~(q) = q
    f = family("x^2")
    assert f.lambda_tilde(0, 12) == 12


def test_aux_examples():
    assert family("x^2").aux_polynomial(0, 10) == P("x^2")
    assert family("x^2-2").aux_polynomial(0, 7) == P("7x^2-8x+2")
    f = family("x")
    assert all(f.aux_polynomial(0, d) == P("x") for d in (1, 2, 9, 100))


def test_content_bound_examples():
    assert family("x^2").check_content_bound(0, 10) == {"lhs": 1, "rhs": 1, "ok": True}
    cb = family("x^2-2").check_content_bound(0, 7)
    assert cb["lhs"] == 1 and cb["rhs"] == 3 and cb["ok"]
    assert family("x").check_content_bound(0, 37)["ok"]


def test_uncertified_prime_is_reported():
    with pytest.raises(UncertifiedPrime):
        family("x^2-2").aux_polynomial(0, 2)


@pytest.mark.parametrize("mode", [INTEGER, PRIME])
def test_invariants_on_grid(mode):
    f = family(SEXTIC, mode=mode)
    for d in range(1, 400):
        assert f.check_invariants(0, d) == []


def test_shift_compatibility():
    f = family(SEXTIC, mode=PRIME)
    for d in range(1, 60):
        for e in range(1, 30):
            assert (f.shift(0, d * e) - f.shift(0, d)) % d == 0


def test_sparsity_preserved_when_zero_at_origin():
    f = family("x+2*x^17+x^31")
    for d in (2, 3, 6, 35, 210):
        assert f.aux_polynomial(0, d).nonzero_count() == 3


def test_inheritance_examples():
    r = family("x").inheritance_pushforward(5, 0, [5], 3, [1])
    assert r["lhs"] == r["rhs"] == 15
    r = family("x^2").inheritance_pushforward(9, 0, [3], 2, [1])
    assert r["lambda_q"] == 4 and r["rhs"] == 36 and r["arguments"] == [6]
    with pytest.raises(PreconditionViolated):
        family("x^2").inheritance_pushforward(10, 0, [3], 2, [1])


def test_inheritance_fuzz():
    rng = random.Random(7)
    f = family("x^2-2")
    # only moduli built from primes where x^2 - 2 has roots: 7, 17, 23, 31, 41
    good = [7, 17, 23, 31, 41]
    done = 0
    while done < 200:
        q = rng.choice(good) ** rng.randint(1, 2)
        d = rng.choice([1, 7, 17])
        n = rng.randint(1, 50)
        g = f.aux_polynomial(0, f.lambda_tilde(0, q) * d)
        v = g(n)
        if v <= 0:
            continue
        r = f.inheritance_pushforward(v, 0, [n], q, [d])
        assert r["lhs"] == r["rhs"]
        done += 1


def test_inheritance_prime_mode_stays_in_fiber():
    f = family("x-1", "x^2-1", mode=PRIME)
    rng = random.Random(3)
    checked = 0
    for _ in range(2000):
        q, d1, d2 = rng.choice([2, 3, 5, 6]), rng.choice([1, 2]), rng.choice([1, 3])
        big = [f.lambda_tilde(0, q) * d1, f.lambda_tilde(1, q) * d2]
        ns = [rng.randint(1, 40), rng.randint(1, 40)]
        if not all(f.in_fiber(i, big[i], ns[i]) for i in range(2)):
            continue
        terms = [f.aux_polynomial(i, big[i])(ns[i]) for i in range(2)]
        if min(terms) <= 0:
            continue
        r = f.inheritance_pushforward(sum(terms), 0, ns, q, [d1, d2])
        assert r["lhs"] == r["rhs"]
        checked += 1
    assert checked > 50


def test_symbig_defect_bounded_independently_of_d():
    f = family(SEXTIC, mode=PRIME)
    xs = [10**3, 10**5, 10**7, 10**9]
    small = max(f.symbig_defect(0, d, x) for d in range(1, 20) for x in xs)
    large = max(f.symbig_defect(0, d, x) for d in (97, 210, 1001, 4199) for x in xs)
    assert small <= 3 and large <= small


def test_cache_roundtrip(tmp_path):
    f = family(SEXTIC, mode=PRIME)
    for d in range(1, 30):
        f.entry(0, d)
    path = tmp_path / "fam.json"
    f.save(path)
    g = family(SEXTIC, mode=PRIME)
    assert g.load(path) == 29
    assert g.rows() == f.rows()
    with pytest.raises(ValueError):
        family("x^2").load(path)
