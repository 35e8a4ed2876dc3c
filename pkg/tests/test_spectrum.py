import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polydiff.spectrum import (NoIncrementFound, SetInWindow, WeightContractViolated, arc_l2_mass,
                               arc_partition_masses, balanced_dft, check_weight_contract, density_increment,
                               difference_count, difference_count_direct, difference_count_fft,
                               measure_theta, rstrick_max, set_dft)


def test_set_in_window_basics():
    A = SetInWindow(10, (3, 1, 3, 7))
    assert A.elements == (1, 3, 7) and A.size == 3 and A.delta == F(3, 10)
    assert A.restrict(3, 7).elements == (1, 5)
    with pytest.raises(ValueError):
        SetInWindow(5, (6,))


def test_balanced_dft_examples():
    S = balanced_dft(SetInWindow(16, range(1, 17)))
    assert np.allclose(S.values, 0)
    S = balanced_dft(SetInWindow(4, (1,)))
    assert abs(S.parseval - 3 / 16) < 1e-15 and S.parseval_ok
    assert abs(S.values[0]) < 1e-12
    assert np.allclose(np.abs(S.values[1:]), 1 / 4)
    S = balanced_dft(SetInWindow(8, (2, 4, 6, 8)))
    mass = np.abs(S.values) ** 2
    assert abs(mass[4] - S.parseval) < 1e-15 and abs(mass[4] - 0.25) < 1e-15


@settings(max_examples=40)
@given(st.integers(1, 300), st.sampled_from([1, 2, 4]), st.data())
def test_parseval_everywhere(N, refine, data):
    els = data.draw(st.sets(st.integers(1, N)))
    A = SetInWindow(N, tuple(els))
    assert balanced_dft(A, refine).parseval_ok
    assert set_dft(A, refine).parseval_ok


def test_difference_count_examples():
    A = SetInWindow(3, (1, 2, 3))
    assert difference_count(A, {1}) == 2
    assert difference_count(A, {5}) == 0
    rng = random.Random(1)
    A = SetInWindow(512, tuple(rng.sample(range(1, 513), 200)))
    sq = {n * n for n in range(1, 23)}
    assert difference_count_direct(A, sq) == difference_count_fft(A, sq)


def test_arc_masses_examples():
    S = balanced_dft(SetInWindow(8, (2, 4, 6, 8)))
    m = arc_l2_mass(S, 2, F(1, 2))
    assert abs(m["M_q"] - 0.25) < 1e-15 and m["points_q"] == 1
    # q = 3 has no points of Z_8 within 1/2 of a third
    assert arc_l2_mass(S, 3, F(1, 4))["M_q"] == 0
    rng = np.random.default_rng(2)
    A = SetInWindow(300, tuple(np.flatnonzero(rng.random(300) < 0.3) + 1))
    for refine, width in ((1, F(2)), (4, F(1, 200))):
        S = balanced_dft(A, refine)
        part = arc_partition_masses(S, width, 5)
        assert abs(part["total"] - S.parseval) < 1e-9 * S.parseval


def test_increment_examples():
    N = 600
    A = SetInWindow(N, tuple(range(2, N + 1, 2)))
    theta = measure_theta(A, 2, F(1, 100))
    assert theta > 0.9
    inc = density_increment(A, 2, F(1, 100), theta)
    assert inc.step == 2 and inc.density == 1 and inc.density >= inc.target
    assert inc.A_prime.delta == 1
    with pytest.raises(NoIncrementFound):
        density_increment(SetInWindow(N, tuple(range(1, N + 1))), 3, F(1, 100),
                          measure_theta(SetInWindow(N, tuple(range(1, N + 1))), 3, F(1, 100)))


def test_increment_on_union_of_progressions():
    rng = random.Random(5)
    N = 720
    for _ in range(20):
        starts = rng.sample(range(1, 7), 3)
        els = [x for s in starts for x in range(s, N + 1, 6) if rng.random() < 0.8]
        A = SetInWindow(N, tuple(els))
        theta = measure_theta(A, 6, F(1, 200))
        inc = density_increment(A, 6, F(1, 200), theta)
        assert inc.density >= A.delta * (1 + F(theta).limit_denominator(10**12) / 32)
        # the fiber re-indexes the progression to [1, L]
        assert all(inc.start + (j - 1) * 6 in A.elements for j in inc.A_prime.elements)


def test_weight_contract_examples():
    check_weight_contract(lambda q: 1 / q, 20)
    check_weight_contract(lambda q: q, 20)
    with pytest.raises(WeightContractViolated) as exc:
        check_weight_contract(lambda q: q**-2.0, 3)
    q, r = exc.value.pair
    assert (q * r) ** -2.0 < r**-2.0 / q


def test_rstrick_example():
    A = SetInWindow(256, tuple(range(2, 257, 2)))
    S = balanced_dft(A)
    out = rstrick_max(S, 1, 4, lambda q: q**-0.5)
    assert out["q_star"] == 2 and out["ok"]
    assert out["masses_M"][4] == 0 and out["masses_M_prime"][4] == out["masses_M_prime"][2]
    # on the refined circle grid the arcs at 1/4 pick up leakage, yet the inequality still holds
    assert rstrick_max(balanced_dft(A, 4), F(1, 64), 4, lambda q: q**-0.5)["ok"]
    with pytest.raises(ValueError):
        rstrick_max(balanced_dft(A, 4), F(1, 16), 4, lambda q: 1 / q)


def test_rstrick_random_sets():
    rng = np.random.default_rng(11)
    for _ in range(10):
        A = SetInWindow(400, tuple(np.flatnonzero(rng.random(400) < 0.4) + 1))
        out = rstrick_max(balanced_dft(A, 4), F(1, 100), 6, lambda q: 1 / q)
        assert out["ok"]
