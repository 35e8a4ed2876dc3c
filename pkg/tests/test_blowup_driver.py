import json
from fractions import Fraction as F
from pathlib import Path

import jsonschema
import pytest

from polydiff.blowup import (BlowupCapExceeded, BlowupConfig, BlowupPrecondition, blowup_step, cr_count,
                             fractions_near)
from polydiff.driver import sarkozy_driver
from polydiff.spectrum import SetInWindow

from harness import blowup_cases, driver_cases, structured_b

SCHEMAS = Path(__file__).resolve().parent.parent / "docs" / "schemas"


def test_driver_precondition_failed():
    # the full interval [1, 100] contains the difference 1 = 1^2
    tr = sarkozy_driver(range(1, 101), ["x^2"], N=100)
    assert tr.status == "precondition_failed"
    assert "is forbidden" in tr.detail
    assert len(tr.steps) == 1 and not tr.steps[0].validated


def test_driver_obstruction_on_evens():
    # x^2 + x + 1 only takes odd values, so the evens avoid it at every scale
    tr = sarkozy_driver(SetInWindow(2000, tuple(range(2, 2001, 2))), ["x^2+x+1"])
    assert tr.status == "obstruction"
    assert tr.invariant_violations() == []


@pytest.mark.parametrize("case", driver_cases(), ids=lambda c: c[0])
def test_driver_regression_suite(case):
    name, A0, polys, mode = case
    tr = sarkozy_driver(A0, polys, mode=mode)
    assert tr.status in {"floor", "no_increment", "obstruction", "saturated"}, (name, tr.status, tr.detail)
    assert tr.invariant_violations() == []


def test_trace_jsonl_schema():
    schema = json.loads((SCHEMAS / "trace_step.v1.json").read_text())
    name, A0, polys, mode = driver_cases()[2]
    tr = sarkozy_driver(A0, polys, mode=mode)
    lines = tr.to_jsonl().splitlines()
    head = json.loads(lines[0])
    assert head["status"] == tr.status and head["polys"] == ["x^2"]
    assert len(lines) == len(tr.steps) + 1
    for line in lines[1:]:
        jsonschema.validate(json.loads(line), schema)
    assert tr.to_jsonl() == sarkozy_driver(A0, polys, mode=mode).to_jsonl()


def test_fractions_near():
    assert fractions_near(0, 100, 5, 3) == []
    # 50/100 is 1/2 exactly; 1/3 is at distance 1/6
    assert F(1, 2) in fractions_near(50, 100, 3, 1)
    assert F(1, 3) not in fractions_near(50, 100, 3, 1)
    assert F(1, 3) in fractions_near(50, 100, 3, 17)
    # circular distance: 99/100 is near 0/1
    assert F(0, 1) in fractions_near(99, 100, 1, 2)


def test_cr_count_examples():
    empty = cr_count([0], {0: []}, 1, 1, 1, 0.25, 64)
    assert empty["lhs"] == 0 and empty["rhs"] == 0.0 and empty["E"] == 0
    # one s at 0 and frequencies on distinct fractions with q <= 4: every sum is new
    L = 1024
    P_s = {0: [256, 512, 341]}
    r = cr_count([0], P_s, 1, 4, 1, 0.5, L)
    assert r["lhs"] == 3 and set(r["R"]) == {"1/4", "1/2", "1/3"}
    assert r["ok"]


def test_blowup_precondition():
    B = structured_b(2**12, 4, {0})
    # both frequencies sit on the arc around 1/4 with K = 8
    with pytest.raises(BlowupPrecondition):
        blowup_step(B, [1024, 1025], 4, 4, 8, ["x^2"])
    # a frequency where B1^ is tiny
    with pytest.raises(BlowupPrecondition):
        blowup_step(B, [3], 4, 4, 8, ["x^2"])


@pytest.mark.parametrize("case", blowup_cases(), ids=lambda c: c[0])
def test_blowup_first_step(case):
    name, B, P, U, V, K = case
    r = blowup_step(B, P, U, V, K, ["x^2"])
    assert r.p1_ok and r.p2_ok and r.cr["ok"], (name, r.failures, r.cr)
    assert r.K_prime > K and r.V_prime >= V
    assert r.r_size >= len(r.P_prime)


def test_blowup_work_cap():
    B = structured_b(2**12, 12, {1, 5})
    r = blowup_step(B, [0], 6, 1, 1, ["x^2"])
    with pytest.raises(BlowupCapExceeded) as exc:
        blowup_step(B, r.P_prime, r.U_prime, r.V_prime, r.K_prime, ["x^2"], config=BlowupConfig(max_work=10**4))
    assert exc.value.diagnostics["V_prime"] >= r.V_prime
