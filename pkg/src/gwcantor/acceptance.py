"""The acceptance checks, shared by ``repro-all`` and the test suite.

Each check returns ``{"id", "title", "pass", "details"}``. Details hold only
deterministic quantities (no timings) so consolidated reports are
byte-stable for a fixed seed.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

from . import dimension as dm
from .measures import (
    CylinderPair,
    conditional_child_distribution,
    florida_pattern_prob,
    mu_c_cylinder,
    mu_i_cylinder,
)
from .mltests import fce_cover, m_schedule, synthetic_change_log, xn_violation_table
from .overlay import pushforward_prob, verify_measure_preservation
from .params import SurvivalParams, extinction_probability, extinction_recursion, format_prob
from .sampling import (
    SampleConfig,
    chi_square_report,
    default_probes,
    florida_pattern_counts,
    set_to_mask,
    survival_report,
)
from .strings import all_trees, omega

CENTRAL_GAMMA = "log2(3/2)"
# Reference interval endpoints for gamma = log2(3/2), to 15 digits.
REFERENCE_INTERVAL = (0.140276506997464, 0.859723493002535)


def _central() -> SurvivalParams:
    return SurvivalParams.from_gamma(CENTRAL_GAMMA)


def _result(cid: str, title: str, ok: bool, details: dict) -> dict:
    return {"id": cid, "title": title, "pass": bool(ok), "details": details}


def check_extinction(seed: int = 0, workers: int = 1) -> dict:
    params = _central()
    exact = extinction_probability(params)
    deep = extinction_recursion(2 / 3, 100)
    ok = exact == Fraction(1, 2) and abs(deep - 0.5) <= 1e-9
    return _result(
        "1", "extinction probability", ok,
        {"exact": format_prob(exact), "recursion_L100": deep, "error": abs(deep - 0.5)},
    )


def check_child_distribution(seed: int = 0, workers: int = 1) -> dict:
    params = _central()
    dist = conditional_child_distribution(params.as_float(), 100)
    table = (1 - params.p, 1 - params.p, 2 * params.p - 1)
    err = max(abs(a - float(b)) for a, b in zip(dist, table))
    ok = err <= 1e-9 and max(abs(a - 1 / 3) for a in dist) <= 1e-9
    return _result(
        "2", "conditional child distribution", ok,
        {"distribution": list(dist), "table": [format_prob(t) for t in table], "max_error": err},
    )


def check_measure_preservation(seed: int = 0, workers: int = 1) -> dict:
    params = _central()
    per_n = {}
    ok = True
    for n in (1, 2, 3):
        rep = verify_measure_preservation(n, params)
        ok &= rep.passed
        per_n[str(n)] = {
            "pairs": len(rep.rows),
            "mismatches": len(rep.mismatches()),
            "lhs_total": format_prob(rep.lhs_total),
            "rhs_total": format_prob(rep.rhs_total),
            "pass": rep.passed,
        }
    T = frozenset({"", "0"})
    lhs = mu_c_cylinder(CylinderPair(T, T), 2, params)
    rhs = pushforward_prob(T, T, 2, params)
    ok &= lhs == rhs == Fraction(2, 9)
    return _result(
        "3", "measure preservation of the overlay map", ok,
        {"levels": per_n, "example": {"lhs": format_prob(lhs), "rhs": format_prob(rhs)}},
    )


def check_law_equivalence(seed: int = 0, workers: int = 1) -> dict:
    params = _central()
    checked = 0
    bad = []
    for n in (1, 2, 3):
        for Tp in all_trees(n):
            checked += 1
            if mu_i_cylinder(Tp, n, params) != florida_pattern_prob(Tp, n, params):
                bad.append([n, sorted(Tp)])
    return _result(
        "4", "extendible trace law equals the Florida law", not bad,
        {"patterns_checked": checked, "mismatches": bad},
    )


def check_sampling(seed: int = 0, workers: int = 1) -> dict:
    params = _central().as_float()
    cfg = SampleConfig(params, depth=12, seed=seed, replicates=100_000)
    rows = survival_report(cfg, default_probes(12, 20, seed), workers)
    fcfg = SampleConfig(params, depth=2, seed=seed, replicates=100_000)
    counts = florida_pattern_counts(fcfg, workers)
    exact = _central()
    expected = {set_to_mask(T): florida_pattern_prob(T, 2, exact) for T in all_trees(2)}
    chi = chi_square_report(counts, expected, fcfg.replicates)
    ok = all(r["pass"] for r in rows) and chi["pass"]
    return _result(
        "5", "sampler consistency", ok,
        {"survival_probes": rows, "florida_chi_square": chi},
    )


def check_extendible_guess(seed: int = 0, workers: int = 1) -> dict:
    params = _central()
    schedule_bad = [
        [n, ell] for n in range(17) for ell in range(17)
        if m_schedule(n, ell, params) != n + 2 * ell
    ]
    cfg = SampleConfig(params.as_float(), depth=16, seed=seed, replicates=10_000)
    table = xn_violation_table(range(1, 7), cfg, workers=workers)
    summary = [
        {k: r[k] for k in ("n", "bound", "estimate", "stderr", "undefined", "pass")}
        for r in table
    ]
    ok = not schedule_bad and all(r["pass"] for r in table)
    return _result(
        "6", "extendible-part guessing", ok,
        {"schedule_mismatches": schedule_bad, "violations": summary},
    )


def check_energy(seed: int = 0, workers: int = 1) -> dict:
    plain = dm.hope_measure()
    linear_bad = [
        K for K in range(1, 101) if dm.gamma_energy_partial(plain, 0.5, 2 * K) != K / 2
    ]
    limit = 0.5 / (1 - 2.0**-0.2)
    partial = dm.gamma_energy_partial(plain, 0.4, 200)
    geo_err = abs(limit - partial)

    eps, k = 0.5, 10_000
    modified = dm.hope_measure(eps)
    lower, upper = dm.modified_tail_bounds(eps, k)
    tails = [dm.modified_tail_bounds(eps, j)[1] for j in (10**3, 10**4, 10**5)]
    literal = dm.hope_measure(eps, literal=True)
    literal_sums = [math.fsum(literal.split_terms(0.5, j)) for j in (10**2, 10**3, 10**4)]
    partials = [math.fsum(modified.split_terms(0.5, j)) for j in (10**2, 10**3, 10**4)]
    parts = {
        "plain_linear": not linear_bad,
        "geometric_limit": geo_err <= 1e-6,
        "modified_tail": upper < 1e-3 and tails == sorted(tails, reverse=True),
    }
    return _result(
        "7", "energy of the half-dimensional measures", all(parts.values()),
        {
            "parts": parts,
            "plain_linear_mismatches": linear_bad,
            "gamma_0.4": {"D": 200, "partial": partial, "limit": limit, "error": geo_err},
            "modified": {
                "epsilon": eps,
                "k": k,
                "partial_sums_k_100_1000_10000": partials,
                "tail_lower": lower,
                "tail_upper": upper,
                "tail_upper_k_1e3_1e4_1e5": tails,
                "literal_schedule_partial_sums": literal_sums,
            },
        },
    )


def check_tz(seed: int = 0, workers: int = 1) -> dict:
    z = dm.ZPattern(3, 2)
    counts = {
        str(m): [dm.tz_tree_count(z, m, "enumerate"), dm.tz_tree_count(z, m, "closed")]
        for m in range(5)
    }
    counts_ok = all(a == b == 4**m for m, (a, b) in zip(range(5), counts.values()))
    mu = dm.tz_measure(z)
    support_bad = [s for s in omega(10) if (mu.mass(s) > 0) != z.in_tree(s)]
    growth = {}
    for label, g in (("below", 2 / 3 - 0.1), ("above", 2 / 3 + 0.1)):
        inc = dm.energy_increments(mu, g, 30)
        blocks = [math.fsum(inc[3 * j: 3 * j + 3]) for j in range(10)]
        ratios = [b / a for a, b in zip(blocks, blocks[1:])]
        growth[label] = {"gamma": g, "block_ratios": ratios, "predicted": 2.0 ** (3 * g - 2)}
    below = growth["below"]["block_ratios"]
    above = growth["above"]["block_ratios"]
    pred_b, pred_a = growth["below"]["predicted"], growth["above"]["predicted"]
    ok = (
        counts_ok
        and not support_bad
        and all(abs(r - pred_b) <= 1e-9 and r < 1 for r in below)
        and all(abs(r - pred_a) <= 1e-9 and r > 1 for r in above)
    )
    return _result(
        "8", "T_Z trees", ok,
        {"counts": counts, "support_mismatches": support_bad, "increments": growth},
    )


def check_bernoulli(seed: int = 0, workers: int = 1) -> dict:
    gamma = math.log2(1.5)
    r = dm.bernoulli_member_interval(gamma)
    err = max(abs(r["p_lo"] - REFERENCE_INTERVAL[0]), abs(r["p_hi"] - REFERENCE_INTERVAL[1]))
    sym = abs(r["p_lo"] + r["p_hi"] - 1)
    residual = max(abs(dm.bernoulli_entropy(r[k]) - gamma) for k in ("p_lo", "p_hi"))
    ok = err <= 1e-9 and sym <= 1e-10 and residual < 1e-10
    return _result(
        "9", "Bernoulli membership interval", ok,
        {**r, "reference_error": err, "symmetry_error": sym, "entropy_residual": residual},
    )


def check_fce_cover(seed: int = 0, workers: int = 1) -> dict:
    f = lambda n: n  # noqa: E731
    log = synthetic_change_log(f, 48, 400, seed=seed)
    fam = fce_cover(log, f, 0.5, k_max=10)
    sel = fam.selection
    increasing = all(a[1] < b[1] for a, b in zip(sel, sel[1:]))
    bounded = all(b <= 2.0**-k for k, _, b in sel)
    weights_ok = all(
        fam.weights[n] <= 2.0**-k for k, n, _ in sel if n in fam.weights
    )
    ok = fam.bounds[16] == 0.46875 and increasing and bounded and weights_ok and len(sel) == 11
    return _result(
        "10", "cover from a finite-change approximation", ok,
        {
            "bound_16": fam.bounds[16],
            "sound_bound_16": fam.sound_bounds[16],
            "selection": [{"k": k, "n": n, "bound": b} for k, n, b in sel],
        },
    )


CHECKS: list[Callable[..., dict]] = [
    check_extinction,
    check_child_distribution,
    check_measure_preservation,
    check_law_equivalence,
    check_sampling,
    check_extendible_guess,
    check_energy,
    check_tz,
    check_bernoulli,
    check_fce_cover,
]


def run_all(seed: int = 42, workers: int = 1) -> dict:
    results = [check(seed=seed, workers=workers) for check in CHECKS]
    return {
        "seed": seed,
        "gamma": CENTRAL_GAMMA,
        "criteria": results,
        "pass": all(r["pass"] for r in results),
    }
