import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bitbudget.regimes import (
    RegimeCase,
    RegimeParams,
    attaining_case,
    c3_lower_bound,
    choose_resolution,
    classify,
    classify_listed,
    k0,
    listed_cases,
    log2_n_ess,
    log2_n_ess_piecewise,
    n_ess,
    plan,
)

from oracles import attaining_term, interior_tuples


def test_params_validation():
    with pytest.raises(ValueError):
        RegimeParams(0, 1, 1, 0.8)
    with pytest.raises(ValueError):
        RegimeParams(1, 1, 1.5, 0.8)
    with pytest.raises(ValueError):
        RegimeParams(1, 1, 4, 2.0).require_protocol_range()
    with pytest.raises(ValueError):
        RegimeParams(1, 1, 3, 0.8).require_protocol_range()


def test_n_ess_arithmetic_example():
    assert n_ess(RegimeParams(2**12, 1, 1, 1.0)) == pytest.approx(2**9.75)


def test_n_ess_saturates_at_mn():
    p = RegimeParams(2**10, 2**4, 2**10, 0.8)
    assert n_ess(p) == pytest.approx(p.m * p.n)
    assert classify(p) is RegimeCase.CASE5


@settings(max_examples=300, deadline=None)
@given(
    lm=st.floats(0, 40),
    ln_=st.floats(0, 40),
    l=st.integers(1, 4096),
    r=st.floats(0.51, 0.99),
)
def test_n_ess_bounded_by_mn(lm, ln_, l, r):
    p = RegimeParams(max(1, round(2**lm)), max(1, round(2**ln_)), l, r)
    assert log2_n_ess(p) <= math.log2(p.m * p.n) + 1e-12
    assert log2_n_ess(p) == pytest.approx(log2_n_ess_piecewise(p), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(lm=st.floats(0, 30), ln_=st.floats(0, 30), l=st.integers(1, 64), r=st.floats(0.51, 0.99))
def test_n_ess_monotone_in_l(lm, ln_, l, r):
    m, n = max(1, round(2**lm)), max(1, round(2**ln_))
    assert n_ess(RegimeParams(m, n, l + 1, r)) >= n_ess(RegimeParams(m, n, l, r)) * (1 - 1e-12)


def test_piecewise_agrees_on_interior_tuples():
    for p in interior_tuples(400, np.random.default_rng(0)):
        assert log2_n_ess(p) == pytest.approx(log2_n_ess_piecewise(p), abs=1e-9)
        case, val, _ = attaining_term(p.m, p.n, p.l, p.r)
        assert val == pytest.approx(log2_n_ess(p), abs=1e-9)
        assert classify(p) is case


def test_classify_examples():
    assert classify(RegimeParams(2**20, 1, 4, 0.8)) is RegimeCase.CASE1
    assert classify(RegimeParams(4, 2**20, 4, 0.8)) is RegimeCase.CASE3
    assert classify_listed(RegimeParams(2**20, 1, 4, 0.8)) is RegimeCase.CASE1
    assert classify_listed(RegimeParams(4, 2**20, 4, 0.8)) is RegimeCase.CASE3
    p = RegimeParams(64, 16, 32, 0.8)  # l >= n
    assert RegimeCase.CASE5 in listed_cases(p)
    assert classify(p) is RegimeCase.CASE5


def test_attaining_case_tie_goes_to_structure():
    # l = n makes lm equal mn, but lm is only selected inside the max when it beats the left term
    p = RegimeParams(2**16, 1, 1, 0.8)
    assert attaining_case(p) in (RegimeCase.CASE1, RegimeCase.CASE2)


def test_choose_resolution_examples():
    assert choose_resolution(RegimeParams(2**20, 1, 4, 0.8)) == (3, 8)
    assert choose_resolution(RegimeParams(4, 4, 4, 0.8), case=RegimeCase.CASE2) == (0, 1)


def test_choose_resolution_theory_constants_shrinks_K():
    p = RegimeParams(2**20, 2**20, 8, 0.8)
    case = RegimeCase.CASE4
    assert choose_resolution(p, case, theory_constants=True)[0] <= choose_resolution(p, case)[0]


def test_k0():
    assert k0(4, math.e**2, 1.0) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        k0(4, 1)
    assert c3_lower_bound(1.0, 0.5) == pytest.approx(600.0)


def test_plan_smoke_minimal():
    pl = plan(RegimeParams(1, 1, 4, 0.8))
    assert pl.K == 1 and pl.K0 > 0
