import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from gwcantor.params import (
    SurvivalParams,
    extinction_probability,
    extinction_recursion,
    format_prob,
    parse_prob,
    subcritical_extinction,
    subcritical_reach_prob,
)

exact_p = st.fractions(min_value=F(1, 2), max_value=1, max_denominator=30).filter(
    lambda p: p > F(1, 2)
)


def test_from_gamma_symbolic_is_exact():
    params = SurvivalParams.from_gamma("log2(3/2)")
    assert params.p == F(2, 3) and params.exact
    assert params.e == F(1, 2) and params.e_root == F(1, 4)
    assert params.p_bar == F(1, 3)
    assert math.isclose(params.gamma, math.log2(1.5))


def test_from_gamma_float():
    params = SurvivalParams.from_gamma(0.5)
    assert not params.exact
    assert params.p == 2**-0.5


@pytest.mark.parametrize("bad", ["log2(1/2)", "1.5", -0.1, "log2(0/1)"])
def test_from_gamma_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        SurvivalParams.from_gamma(bad)


def test_extinction_examples():
    assert extinction_probability(F(2, 3)) == F(1, 2)
    assert extinction_probability(F(1)) == 0
    assert extinction_probability(F(3, 4)) == F(1, 3)


@pytest.mark.parametrize("p", [F(1, 2), F(1, 3), 0.4])
def test_extinction_rejects_subcritical(p):
    with pytest.raises(ValueError):
        extinction_probability(p)


def test_extinction_recursion_examples():
    assert extinction_recursion(F(2, 3), 0) == F(1, 3)
    assert extinction_recursion(F(2, 3), 1) == F(11, 27)
    assert extinction_recursion(F(2, 3), 2) == F(971, 2187)
    assert extinction_recursion(F(2, 3), -1) == 0
    assert abs(extinction_recursion(2 / 3, 100) - 0.5) <= 1e-15


def test_float_recursion_cross_checks_p_three_quarters():
    assert abs(extinction_recursion(0.75, 200) - 1 / 3) < 1e-14


def test_exact_horizon_is_capped():
    with pytest.raises(ValueError):
        extinction_recursion(F(2, 3), 17)


def test_subcritical_examples():
    assert subcritical_extinction(F(2, 3), 0) == F(2, 3)
    assert subcritical_extinction(F(1), 5) == 1
    assert subcritical_extinction(F(2, 3), 3) >= subcritical_extinction(F(2, 3), 2)
    assert subcritical_reach_prob(F(2, 3), 0) == 1
    assert subcritical_reach_prob(F(2, 3), 1) == F(1, 3)


def test_subcritical_reach_decays_to_zero():
    r = [subcritical_reach_prob(2 / 3, k) for k in range(60)]
    assert all(b <= a for a, b in zip(r, r[1:]))
    assert r[-1] < 1e-9  # rate 2(1-p) = 2/3


@given(exact_p)
def test_fixed_point_identity(p):
    e = extinction_probability(p)
    assert (1 - p) + p * e**2 == e


@given(exact_p)
def test_recursion_is_monotone_and_below_e(p):
    e = extinction_probability(p)
    vals = [extinction_recursion(p, L) for L in range(8)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= e


@given(st.floats(0.55, 0.99))
def test_recursion_converges_geometrically(p):
    e = extinction_probability(p)
    ratio = 2 * p * e
    errs = [e - extinction_recursion(p, L) for L in range(0, 40)]
    C = errs[0] if errs[0] > 0 else 1.0
    assert all(err <= C * ratio**L + 1e-12 for L, err in enumerate(errs))


@given(st.floats(0.55, 0.95))
def test_root_conditioned_limit_is_e_squared(p):
    e = extinction_probability(p)
    ext = extinction_recursion(p, 400)
    assert abs((ext - (1 - p)) / p - e**2) < 1e-9


@given(st.floats(0.55, 0.95))
def test_subcritical_monotone_limits(p):
    ext = [subcritical_extinction(p, L) for L in range(0, 200, 10)]
    assert all(a <= b for a, b in zip(ext, ext[1:]))
    assert 1 - ext[-1] < 1e-6


def test_format_and_parse():
    assert format_prob(F(1, 2)) == "1/2"
    assert format_prob(1 / 3) == "0.333333333333333"
    assert parse_prob("2/3") == F(2, 3)
    assert parse_prob("0.25") == 0.25
    assert parse_prob("1") == 1


def test_describe():
    d = SurvivalParams.from_gamma("log2(3/2)").describe()
    assert d["p"] == "2/3" and d["e"] == "1/2" and d["e_root"] == "1/4" and d["exact"]
