"""The overlay map and its finite-depth measure-preservation check.

``psi(live, filler)`` keeps the strings of ``live | filler`` whose prefixes
all lie in that union. Pushing the product of the Florida law (for the
live skeleton) and the filler law forward through ``psi`` should give the
GW law conditioned on survival, jointly with the skeleton's trace.
``verify_measure_preservation`` checks this pattern by pattern against
``mu_c_cylinder``.

Only ``F`` restricted to ``omega(n) - live`` matters for ``psi(live, F)``,
so ``pushforward_prob`` sums over those coordinates alone; the remaining
filler coordinates integrate out to 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Iterable

import numpy as np

from .measures import florida_pattern_prob, gw_pattern_prob, mu_c_cylinder, valid_pairs
from .params import Prob, SurvivalParams, format_prob, is_exact, subcritical_reach_prob
from .sampling import (
    SampleConfig,
    binomial_se,
    florida_levels,
    run_chunks,
    sample_florida,
    sample_lambda_f,
)
from . import rng
from .strings import (
    MAX_ENUM_DEPTH,
    all_trees,
    encode_set,
    extendible_shapes,
    node_index,
    omega,
    top_level,
    truncate_to_tree,
)


@dataclass(frozen=True)
class OverlayInput:
    live: frozenset
    filler: frozenset
    depth: int


def psi(live: Iterable[str], filler: Iterable[str], n: int) -> frozenset:
    """Largest tree inside ``omega(n)`` made of strings from ``live | filler``."""
    return truncate_to_tree(frozenset(live) | frozenset(filler), n)


def psi_input(x: OverlayInput) -> frozenset:
    return psi(x.live, x.filler, x.depth)


def _filler_distribution(live: frozenset, n: int, params: SurvivalParams) -> dict:
    """``{psi(live, F): prob}`` over fillers ``F`` on ``omega(n) - live``."""
    free = [s for s in omega(n, ceiling=MAX_ENUM_DEPTH) if s not in live]
    p = params.p
    q = 1 - p
    out: dict = {}
    m = len(free)
    for mask in range(1 << m):
        chosen = [free[i] for i in range(m) if mask >> i & 1]
        k = len(chosen)
        w = q**k * p ** (m - k)
        T = psi(live, chosen, n)
        out[T] = out.get(T, p * 0) + w
    return out


def pushforward_prob(T, T_prime, n: int, params: SurvivalParams) -> Prob:
    """Product-law probability that ``psi`` gives ``T`` with skeleton ``T_prime``."""
    if n > MAX_ENUM_DEPTH:
        raise ValueError(f"enumeration is limited to depth {MAX_ENUM_DEPTH}")
    T, Tp = frozenset(T), frozenset(T_prime)
    weight = florida_pattern_prob(Tp, n, params)
    if weight == 0:
        return params.p * 0
    return weight * _filler_distribution(Tp, n, params).get(T, params.p * 0)


@dataclass
class PreservationReport:
    n: int
    params: SurvivalParams
    rows: list = field(default_factory=list)
    lhs_total: Prob = 0
    rhs_total: Prob = 0
    marginals: list = field(default_factory=list)
    passed: bool = True

    def mismatches(self) -> list:
        return [r for r in self.rows if not r["equal"]]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "params": self.params.describe(),
            "rows": [
                {
                    "T": encode_set(r["T"]),
                    "T_prime": encode_set(r["T_prime"]),
                    "lhs": format_prob(r["lhs"]),
                    "rhs": format_prob(r["rhs"]),
                    "equal": r["equal"],
                }
                for r in self.rows
            ],
            "marginals": [
                {
                    "T": encode_set(m["T"]),
                    "lhs": format_prob(m["lhs"]),
                    "rhs": format_prob(m["rhs"]),
                    "direct": format_prob(m["direct"]),
                    "equal": m["equal"],
                }
                for m in self.marginals
            ],
            "lhs_total": format_prob(self.lhs_total),
            "rhs_total": format_prob(self.rhs_total),
            "pass": self.passed,
        }


def _close(a: Prob, b: Prob, exact: bool) -> bool:
    return a == b if exact else abs(float(a) - float(b)) <= 1e-12


def verify_measure_preservation(n: int, params: SurvivalParams) -> PreservationReport:
    """Compare the pushforward with the conditioned GW law on every pair.

    ``lhs`` is ``mu_c_cylinder``, ``rhs`` the pushforward. Any pair the
    pushforward charges that is not a valid pair also fails the check.
    Marginals over ``T'`` are compared with the direct formula
    ``P(T) * (1 - e2**|top(T)|) / (1 - e)``.
    """
    if not 1 <= n <= MAX_ENUM_DEPTH:
        raise ValueError(f"n must lie in [1, {MAX_ENUM_DEPTH}]")
    exact = is_exact(params.p)
    zero = params.p * 0
    report = PreservationReport(n=n, params=params, lhs_total=zero, rhs_total=zero)

    pushed: dict = {}
    for Tp in extendible_shapes(n):
        w = florida_pattern_prob(Tp, n, params)
        for T, v in _filler_distribution(Tp, n, params).items():
            pushed[(T, Tp)] = w * v

    seen = set()
    for pair in valid_pairs(n):
        key = (pair.T, pair.T_prime)
        seen.add(key)
        lhs = mu_c_cylinder(pair, n, params)
        rhs = pushed.get(key, zero)
        report.rows.append(
            {"T": pair.T, "T_prime": pair.T_prime, "lhs": lhs, "rhs": rhs,
             "equal": _close(lhs, rhs, exact)}
        )
    for key, rhs in pushed.items():
        if key not in seen and rhs != 0:
            report.rows.append(
                {"T": key[0], "T_prime": key[1], "lhs": zero, "rhs": rhs, "equal": False}
            )

    for r in report.rows:
        report.lhs_total += r["lhs"]
        report.rhs_total += r["rhs"]

    dead = params.e_root
    for T in all_trees(n):
        lhs = sum((r["lhs"] for r in report.rows if r["T"] == T), zero)
        rhs = sum((r["rhs"] for r in report.rows if r["T"] == T), zero)
        direct = gw_pattern_prob(T, n, params) * (1 - dead ** len(top_level(T, n))) / (
            1 - params.e
        )
        if lhs == 0 and rhs == 0 and direct == 0:
            continue
        report.marginals.append(
            {"T": T, "lhs": lhs, "rhs": rhs, "direct": direct,
             "equal": _close(lhs, rhs, exact) and _close(lhs, direct, exact)}
        )

    report.passed = (
        all(r["equal"] for r in report.rows)
        and all(m["equal"] for m in report.marginals)
        and _close(report.lhs_total, 1, exact)
        and _close(report.rhs_total, 1, exact)
    )
    return report


# --- sampler side ----------------------------------------------------------


def overlay_sampler(cfg: SampleConfig, replicate: int = 0):
    """Draw a Florida skeleton ``H`` and filler ``S``; return ``(H, S, psi(H, S))``."""
    H = sample_florida(cfg, replicate)
    S = sample_lambda_f(cfg, replicate)
    return H, S, psi(H, S, cfg.depth)


def overlay_masks(cfg: SampleConfig, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    """Bitmasks of ``H`` and ``G = psi(H, S)`` for a batch (depth <= 6)."""
    count = stop - start
    nodes = omega(cfg.depth)
    ids = np.array([node_index(s) for s in nodes], dtype=np.int64)
    parents = np.array([node_index(s[:-1]) if s else -1 for s in nodes])
    keys = rng.replicate_keys(cfg.seed, rng.STREAM_FILLER, np.arange(start, stop))
    u = rng.uniforms(keys[:, None], ids[None, :])
    filler = u < (1.0 - cfg.p)

    H = np.zeros((count, len(nodes)), dtype=bool)
    for k, (rep, pos) in enumerate(florida_levels(cfg, start, stop)):
        H[rep, pos + (1 << k) - 1] = True
    union = H | filler
    G = np.zeros_like(union)
    for j in range(len(nodes)):
        G[:, j] = union[:, j] if parents[j] < 0 else union[:, j] & G[:, parents[j]]
    weights = np.left_shift(1, ids)
    return (H * weights).sum(axis=1), (G * weights).sum(axis=1)


def _overlay_counts(cfg: SampleConfig, start: int, stop: int) -> np.ndarray:
    _, g = overlay_masks(cfg, start, stop)
    return np.bincount(g, minlength=1 << ((1 << cfg.depth) - 1))


def overlay_pattern_report(cfg: SampleConfig, workers: int = 1) -> list[dict]:
    """Empirical law of ``psi(H, S)`` vs the conditioned GW marginal."""
    if cfg.depth > 3:
        raise ValueError("overlay pattern tables are limited to depth <= 3")
    counts = run_chunks(partial(_overlay_counts, cfg), cfg.replicates, workers)
    params = cfg.params
    rows = []
    marg: dict = {}
    for pair in valid_pairs(cfg.depth):
        marg[pair.T] = marg.get(pair.T, 0) + float(mu_c_cylinder(pair, cfg.depth, params))
    for T in all_trees(cfg.depth):
        mask = sum(1 << node_index(s) for s in T)
        c = int(counts[mask])
        expected = marg.get(T, 0.0)
        se = binomial_se(expected, cfg.replicates)
        observed = c / cfg.replicates
        rows.append(
            {"probe": encode_set(T), "expected": expected, "observed": observed,
             "stderr": se, "pass": abs(observed - expected) <= 3 * se + 1e-15}
        )
    return rows


def _escape_counts(cfg: SampleConfig, start: int, stop: int) -> np.ndarray:
    h, g = overlay_masks(cfg, start, stop)
    top = 0
    for s in omega(cfg.depth):
        if len(s) == cfg.depth - 1:
            top |= 1 << node_index(s)
    escaped = ((g & ~h) & top) != 0
    return np.array([np.count_nonzero(escaped)], dtype=np.int64)


def escape_union_bound(params: SurvivalParams, n: int) -> float:
    """Union bound on a top-level filler node outside the skeleton."""
    p = float(params.p)
    return sum(2**ell * subcritical_reach_prob(p, n - ell) for ell in range(n))


def escape_report(cfg: SampleConfig, workers: int = 1) -> dict:
    counts = run_chunks(partial(_escape_counts, cfg), cfg.replicates, workers)
    est = int(counts[0]) / cfg.replicates
    bound = escape_union_bound(cfg.params, cfg.depth)
    se = binomial_se(est, cfg.replicates)
    return {
        "depth": cfg.depth,
        "estimate": est,
        "bound": bound,
        "stderr": se,
        "pass": est <= min(bound, 1.0) + 3 * se,
    }
