"""Shared inputs for the driver regression suite and the blow-up harness."""

import random

from polydiff.certify import INTEGER, PRIME
from polydiff.extremal import digit_construction, forbidden_differences, greedy_avoiding
from polydiff.spectrum import SetInWindow


def shuffled_first_fit(system, N: int, seed: int, mode: str = INTEGER) -> SetInWindow:
    """First-fit avoiding set built in a random order."""
    D = set(forbidden_differences(system, N, mode).D)
    order = list(range(1, N + 1))
    random.Random(seed).shuffle(order)
    chosen: set[int] = set()
    for x in order:
        if all(abs(x - y) not in D for y in chosen):
            chosen.add(x)
    return SetInWindow(N, tuple(chosen))


def driver_cases():
    """(name, A0, polys, mode) for the regression suite."""
    cases = []
    N = 2**14
    F = forbidden_differences("x^2", N)
    cases.append(("greedy squares 2^14", SetInWindow(N, greedy_avoiding(F).witness), ["x^2"], INTEGER))
    res, info = digit_construction(65, (0, 2, 5, 22, 24, 43, 46), 1)
    cases.append(("digit lift q=65", SetInWindow(info["N"], res.witness), ["x^2"], INTEGER))
    for seed in range(3):
        cases.append((f"shuffled squares seed {seed}", shuffled_first_fit("x^2", 4096, seed), ["x^2"], INTEGER))
    cases.append(("shuffled cubes", shuffled_first_fit("x^3", 4096, 0), ["x^3"], INTEGER))
    cases.append(("shuffled x^2+x^3", shuffled_first_fit(["x^2", "x^3"], 4096, 1), ["x^2", "x^3"], INTEGER))
    cases.append(("shuffled p-1", shuffled_first_fit("x-1", 2048, 2, PRIME), ["x-1"], PRIME))
    cases.append(("evens, x^2+x+1", SetInWindow(2000, tuple(range(2, 2001, 2))), ["x^2+x+1"], INTEGER))
    return cases


def structured_b(L: int, mod: int, residues) -> SetInWindow:
    return SetInWindow(L, tuple(x for x in range(1, L + 1) if x % mod in residues))


def blowup_cases():
    """(name, B, P, U, V, K) synthetic instances on Z_L."""
    L = 2**12
    out = [
        ("x mod 6 in {0,2}", structured_b(L, 6, {0, 2}), [0], 3, 1, 1),
        ("x mod 4 in {0}", structured_b(L, 4, {0}), [0], 4, 1, 1),
        ("x mod 10 in {0,3,7}", structured_b(L, 10, {0, 3, 7}), [0], 4, 1, 1),
        ("x mod 12 in {1,5}", structured_b(L, 12, {1, 5}), [0], 6, 1, 1),
    ]
    for seed in range(2):
        rng = random.Random(seed)
        out.append((f"random half seed {seed}", SetInWindow(L, tuple(rng.sample(range(1, L + 1), L // 2))),
                    [0], 3, 1, 1))
    return out
