"""Acceptance criteria 1-11 at their stated tolerances and runtime budgets."""

import math
import time
from fractions import Fraction

import pytest
from scipy import stats

from gwcantor import acceptance as acc
from gwcantor import dimension as dm
from gwcantor.cli import run
from gwcantor.measures import conditional_child_distribution
from gwcantor.params import SurvivalParams, extinction_probability, extinction_recursion

criterion = pytest.mark.criterion


def best_time(fn, repeats=5):
    """Minimum wall time over a few calls, plus the last result."""
    best, result = math.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


@criterion(1)
def test_extinction():
    params = SurvivalParams.from_gamma(acc.CENTRAL_GAMMA)
    elapsed, e = best_time(lambda: extinction_probability(params))
    assert e == Fraction(1, 2)
    rec_time, deep = best_time(lambda: extinction_recursion(2 / 3, 100))
    assert abs(deep - 0.5) <= 1e-9
    assert elapsed < 1e-3 and rec_time < 1e-3
    assert acc.check_extinction()["pass"]


@criterion(2)
def test_child_distribution():
    params = SurvivalParams.from_gamma(acc.CENTRAL_GAMMA).as_float()
    elapsed, dist = best_time(lambda: conditional_child_distribution(params, 100))
    assert all(abs(x - 1 / 3) <= 1e-9 for x in dist)
    p = Fraction(2, 3)
    assert [1 - p, 1 - p, 2 * p - 1] == [Fraction(1, 3)] * 3
    assert elapsed < 1e-3
    assert acc.check_child_distribution()["pass"]


@criterion(3)
def test_measure_preservation():
    t0 = time.perf_counter()
    res = acc.check_measure_preservation()
    elapsed = time.perf_counter() - t0
    levels = res["details"]["levels"]
    for n in ("1", "2", "3"):
        assert levels[n]["mismatches"] == 0
        assert levels[n]["lhs_total"] == levels[n]["rhs_total"] == "1/1"
    assert res["details"]["example"] == {"lhs": "2/9", "rhs": "2/9"}
    assert res["pass"] and elapsed < 10


@criterion(4)
def test_law_equivalence():
    t0 = time.perf_counter()
    res = acc.check_law_equivalence()
    assert time.perf_counter() - t0 < 5
    # 2 + 5 + 26 distinct trees at top levels 0, 1, 2.
    assert res["details"]["patterns_checked"] == 33
    assert res["details"]["mismatches"] == [] and res["pass"]


@criterion(5)
def test_sampling_consistency():
    t0 = time.perf_counter()
    res = acc.check_sampling(seed=42)
    assert time.perf_counter() - t0 < 30
    rows = res["details"]["survival_probes"]
    assert len(rows) == 20
    for r in rows:
        assert abs(r["observed"] - r["expected"]) <= 3 * r["stderr"], r["probe"]
    chi = res["details"]["florida_chi_square"]
    assert chi["statistic"] < stats.chi2.ppf(0.999, chi["df"])
    assert res["pass"]


@criterion(6)
def test_extendible_guess():
    t0 = time.perf_counter()
    res = acc.check_extendible_guess(seed=42)
    assert time.perf_counter() - t0 < 60
    assert res["details"]["schedule_mismatches"] == []
    for r in res["details"]["violations"]:
        assert r["estimate"] <= 2.0 ** -r["n"] + 3 * r["stderr"], r["n"]
    assert res["pass"]


@criterion(7)
def test_energy_plain_linear():
    assert acc.check_energy()["details"]["plain_linear_mismatches"] == []


@criterion(7)
def test_energy_geometric_limit_by_200():
    # Only the even levels below 200 carry mass, so 100 terms of a ratio
    # 2^-0.2 series remain; the tail after them is about 3.7e-6.
    t0 = time.perf_counter()
    partial = dm.gamma_energy_partial(dm.hope_measure(), 0.4, 200)
    assert time.perf_counter() - t0 < 5
    limit = 0.5 / (1 - 2.0**-0.2)
    assert abs(limit - partial) <= 1e-6, f"partial {partial!r}, limit {limit!r}, gap {limit - partial:.3e}"


@criterion(7)
def test_energy_modified_tail():
    t0 = time.perf_counter()
    lower, upper = dm.modified_tail_bounds(0.5, 10_000)
    tails = [dm.modified_tail_bounds(0.5, k)[1] for k in (10**3, 10**4, 10**5)]
    assert time.perf_counter() - t0 < 5
    assert tails == sorted(tails, reverse=True)
    assert upper < 1e-3, f"tail after k=1e4 lies in [{lower:.5f}, {upper:.5f}]"


@criterion(8)
def test_tz():
    t0 = time.perf_counter()
    res = acc.check_tz()
    assert time.perf_counter() - t0 < 5
    assert all(a == b == 4 ** int(m) for m, (a, b) in res["details"]["counts"].items())
    assert res["details"]["support_mismatches"] == []
    below = res["details"]["increments"]["below"]["block_ratios"]
    above = res["details"]["increments"]["above"]["block_ratios"]
    assert max(below) < 1 < min(above)
    assert res["pass"]


@criterion(9)
def test_bernoulli_interval():
    gamma = math.log2(1.5)
    elapsed, r = best_time(lambda: dm.bernoulli_member_interval(gamma))
    assert abs(r["p_lo"] - 0.140276506997464) <= 1e-9
    assert abs(r["p_hi"] - 0.859723493002535) <= 1e-9
    assert abs(r["p_lo"] + r["p_hi"] - 1) <= 1e-10
    assert abs(dm.bernoulli_entropy(r["p_lo"]) - gamma) < 1e-10
    assert abs(dm.bernoulli_entropy(r["p_hi"]) - gamma) < 1e-10
    assert elapsed < 1e-2


@criterion(10)
def test_fce_cover():
    t0 = time.perf_counter()
    res = acc.check_fce_cover(seed=42)
    assert time.perf_counter() - t0 < 1
    assert res["details"]["bound_16"] == 0.46875
    sel = res["details"]["selection"]
    assert [s["k"] for s in sel] == list(range(11))
    assert all(a["n"] < b["n"] for a, b in zip(sel, sel[1:]))
    assert all(s["bound"] <= 2.0 ** -s["k"] for s in sel)
    assert res["pass"]


@criterion(11)
def test_repro_all_is_byte_identical(tmp_path):
    outs = []
    for i, workers in enumerate((8, 8, 1)):
        path = tmp_path / f"report{i}.json"
        code = run(["repro-all", "--seed", "42", "--workers", str(workers), "--out", str(path)])
        # Exit status mirrors the consolidated verdict, which carries the energy failure.
        assert code in (0, 1)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    assert b'"seed": 42' in outs[0]
