import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from gwcantor.cli import random_string_sets
from gwcantor.mltests import (
    change_counts,
    cumulative_bound,
    fce_cover,
    guess_trace,
    hitting_bound_check,
    m_schedule,
    phi_horizon,
    synthetic_change_log,
    weight_gamma,
    xn_violation_estimate,
    xn_violation_table,
)
from gwcantor.params import SurvivalParams
from gwcantor.sampling import SampleConfig
from gwcantor.strings import enumerate_level, omega

P23 = SurvivalParams.from_gamma("log2(3/2)")
P34 = SurvivalParams.from_p(F(3, 4))
word_sets = st.frozensets(st.text(alphabet="01", max_size=6), max_size=12)


def test_weight_examples():
    assert weight_gamma(enumerate_level(2), 0.5) == 2
    assert weight_gamma([], 0.3) == 0
    assert weight_gamma([""], 0.7) == 1


@given(word_sets, word_sets, st.floats(0, 1))
def test_weight_additive_on_disjoint_sets(a, b, g):
    b = b - a
    assert math.isclose(weight_gamma(a | b, g), weight_gamma(a, g) + weight_gamma(b, g), abs_tol=1e-12)


@given(word_sets, st.floats(0, 0.9), st.floats(0, 0.1))
def test_weight_monotone_in_gamma(a, g, dg):
    assert weight_gamma(a, g + dg) <= weight_gamma(a, g) + 1e-12


def test_m_schedule_examples():
    assert m_schedule(1, 1, P23) == 3
    assert m_schedule(4, 2, P23) == 8
    assert m_schedule(1, 0, P34) == 1


def test_m_schedule_closed_form_at_half():
    assert all(m_schedule(n, l, P23) == n + 2 * l for n in range(17) for l in range(17))


@given(st.integers(0, 12), st.integers(0, 6))
def test_m_schedule_is_least(n, l):
    e = P34.e
    m = m_schedule(n, l, P34)
    target = F(1, 2 ** (n + 2 * l))
    assert e**m <= target and (m == 0 or e ** (m - 1) > target)


def test_phi_horizon_examples():
    D = 8
    full = omega(D)
    m = m_schedule(1, 1, P23)
    L = phi_horizon(full, D, 1, 1, P23)
    assert L == min(L2 for L2 in range(2, D) if 2 ** (L2 - 1) >= m)
    assert phi_horizon([], D, 1, 1, P23) == 2
    assert guess_trace(full, 1, 3) == {"0", "1"}


def test_hitting_examples():
    cfg = SampleConfig(P23.as_float(), depth=6, seed=2, replicates=40_000)
    r = hitting_bound_check({"010"}, cfg)
    assert r["bound"] == pytest.approx((2 / 3) ** 3)
    assert abs(r["estimate_given_root"] - (2 / 3) ** 3) <= 3 * r["stderr_given_root"]
    r2 = hitting_bound_check({"0", "1"}, cfg)
    assert r2["bound"] == pytest.approx(2 * 2 / 3)
    assert abs(r2["estimate_given_root"] - (1 - (1 / 3) ** 2)) <= 3 * r2["stderr_given_root"]
    r3 = hitting_bound_check({"0", "1", "01", "011"}, cfg)
    assert r3["estimate"] == r2["estimate"] and r3["prefix_free"] == ["0", "1"]


def test_hitting_bound_over_random_sets():
    cfg = SampleConfig(P23.as_float(), depth=8, seed=13, replicates=5_000)
    sets = random_string_sets(50, 8, 13)
    assert len(sets) == 50
    assert all(hitting_bound_check(U, cfg)["pass"] for U in sets)


def test_xn_violations_within_bounds():
    cfg = SampleConfig(P23.as_float(), depth=14, seed=7, replicates=4_000)
    for r in xn_violation_table(range(1, 5), cfg):
        assert r["pass"]
        assert all(x["pass"] for x in r["per_ell"])
    big = xn_violation_estimate(10, cfg)
    assert big["estimate"] == 0


def test_undefined_horizon_decays_with_depth():
    rates = []
    for D in (8, 12, 16):
        cfg = SampleConfig(P23.as_float(), depth=D, seed=3, replicates=3_000)
        rates.append(xn_violation_estimate(1, cfg, ells=[2])["undefined"])
    assert rates[0] >= rates[1] >= rates[2]


def test_fce_cover_examples():
    f = lambda n: n  # noqa: E731
    log = synthetic_change_log(f, 24, 150, seed=0)
    fam = fce_cover(log, f, 0.5)
    assert cumulative_bound(f, 16) == 120
    assert fam.bounds[16] == 0.46875
    for n, cover in fam.levels.items():
        assert len(cover) <= cumulative_bound(f, n) + 1
        assert fam.weights[n] <= fam.sound_bounds[n] + 1e-12
    ks = [k for k, _, _ in fam.selection]
    assert ks == list(range(11))
    assert all(b <= 2.0**-k for k, _, b in fam.selection)


def test_fce_cover_zero_budget():
    zero = lambda n: 0  # noqa: E731
    log = synthetic_change_log(zero, 10, 5)
    assert len(log) == 1
    fam = fce_cover(log, zero, 0.5, k_max=3)
    assert all(b == 0 for b in fam.bounds.values())


def test_fce_cover_rejects_budget_violation():
    with pytest.raises(ValueError, match="position 0"):
        fce_cover(["00", "10", "00"], lambda n: 1, 0.5)


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_synthetic_logs_respect_budget(seed):
    f = lambda n: n // 2  # noqa: E731
    log = synthetic_change_log(f, 20, 60, seed)
    assert all(c <= f(j) for j, c in enumerate(change_counts(log)))
