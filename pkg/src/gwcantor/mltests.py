"""Finite-scale machinery behind randomness tests on GW trees.

* ``weight_gamma`` and ``hitting_bound_check``: a GW tree hits a string set
  only through its shortlex-minimal members, and hits ``sigma`` with
  probability ``p**|sigma| = 2**(-gamma*|sigma|)``, so the gamma-weight of
  the minimal prefix-free part bounds the hitting probability.
* ``m_schedule``, ``phi_horizon`` and ``xn_violation_estimate``: guess the
  extendible part of a tree at level ``l`` by looking ahead to the first
  level ``L`` where every level-``l`` node is absent, dead, or has at least
  ``m`` descendants; the guess is wrong with probability at most
  ``2**-n * 2**-l``.
* ``fce_cover``: covers built from a finite-change approximation log.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from .params import SurvivalParams
from .sampling import SampleConfig, binomial_se, gw_levels, run_chunks
from .strings import enumerate_level, is_binary, minimal_prefix_free


def weight_gamma(C: Iterable[str], gamma: float) -> float:
    """Sum of ``2**(-|w|*gamma)`` over ``C``."""
    return math.fsum(2.0 ** (-len(w) * gamma) for w in C)


# --- hitting probability of a string set -----------------------------------


def _hit_counts(cfg: SampleConfig, by_level: tuple, start: int, stop: int) -> np.ndarray:
    # (hits, replicates with the root present)
    levels = gw_levels(cfg, start, stop)
    hit = np.zeros(stop - start, dtype=bool)
    for k, values in by_level:
        rep, pos = levels[k]
        hit[rep[np.isin(pos, values)]] = True
    return np.array([np.count_nonzero(hit), len(levels[0][0])], dtype=np.int64)


def hitting_bound_check(U: Iterable[str], cfg: SampleConfig, workers: int = 1) -> dict:
    """Monte Carlo ``P(G meets U)`` against the weight of ``U``'s minimal part.

    Reported both unconditionally and given that the root is present; the
    weight bounds each.
    """
    U = frozenset(U)
    if any(len(s) >= cfg.depth for s in U):
        raise ValueError(f"all strings must be shorter than the depth {cfg.depth}")
    minimal = minimal_prefix_free(U)
    bound = weight_gamma(minimal, cfg.params.gamma)
    grouped: dict[int, list[int]] = {}
    for s in minimal:
        grouped.setdefault(len(s), []).append(int(s, 2) if s else 0)
    by_level = tuple((k, np.array(sorted(v), dtype=np.int64)) for k, v in sorted(grouped.items()))
    hits, rooted = run_chunks(partial(_hit_counts, cfg, by_level), cfg.replicates, workers)
    est = int(hits) / cfg.replicates
    se = binomial_se(est, cfg.replicates)
    est_root = int(hits) / int(rooted) if rooted else 0.0
    se_root = binomial_se(est_root, max(int(rooted), 1))
    return {
        "prefix_free": sorted(minimal, key=lambda s: (len(s), s)),
        "bound": bound,
        "estimate": est,
        "stderr": se,
        "estimate_given_root": est_root,
        "stderr_given_root": se_root,
        "pass": est <= bound + 3 * se and est_root <= bound + 3 * se_root,
    }


# --- guessing the extendible part -------------------------------------------


def m_schedule(n: int, ell: int, params: SurvivalParams) -> int:
    """Least ``m >= 0`` with ``e**m <= 2**-(n + 2*ell)``, compared exactly."""
    if n < 0 or ell < 0:
        raise ValueError("n and ell must be non-negative")
    e = Fraction(params.e)
    target = Fraction(1, 1 << (n + 2 * ell))
    if e == 0:
        return 0 if target == 1 else 1
    m = max(0, math.ceil((n + 2 * ell) / -math.log2(e)) - 1)
    while e**m > target:
        m += 1
    while m > 0 and e ** (m - 1) <= target:
        m -= 1
    return m


def _descendant_counts(tree: frozenset, ell: int, L: int) -> dict[str, int]:
    out: dict[str, int] = {}
    for s in tree:
        if len(s) == L:
            out[s[:ell]] = out.get(s[:ell], 0) + 1
    return out


def phi_horizon(G: Iterable[str], D: int, n: int, ell: int, params: SurvivalParams):
    """Least ``L`` in ``(ell, D-1]`` settling every level-``ell`` node, else None.

    A node is settled at ``L`` if it is not in ``G``, has no descendant at
    level ``L``, or has at least ``m_schedule(n, ell)`` of them.
    """
    if not 0 <= ell < D:
        raise ValueError(f"ell must lie in [0, {D})")
    tree = frozenset(G)
    m = m_schedule(n, ell, params)
    nodes = [s for s in enumerate_level(ell) if s in tree]
    for L in range(ell + 1, D):
        counts = _descendant_counts(tree, ell, L)
        if all(counts.get(s, 0) == 0 or counts[s] >= m for s in nodes):
            return L
    return None


def guess_trace(G: Iterable[str], ell: int, L: int) -> frozenset:
    """Level-``ell`` nodes of ``G`` with a descendant at level ``L``."""
    return frozenset(s[:ell] for s in G if len(s) == L)


def _xn_counts(
    cfg: SampleConfig, ns: tuple, ells: tuple, start: int, stop: int
) -> np.ndarray:
    """Counts per ``(n, ell)`` of (violations, undefined horizons).

    The extra last ``ell`` slot counts replicates with a violation (or an
    undefined horizon) at any ``ell``.
    """
    R = stop - start
    D = cfg.depth
    levels = gw_levels(cfg, start, stop)
    per_ell = []
    for ell in ells:
        width = 1 << ell
        present = np.zeros(R * width, dtype=bool)
        rep, pos = levels[ell]
        present[rep * width + pos] = True
        counts = {}
        for L in range(ell + 1, D):
            rep, pos = levels[L]
            counts[L] = np.bincount(
                rep * width + (pos >> (L - ell)), minlength=R * width
            ).reshape(R, width)
        per_ell.append((present.reshape(R, width), counts))

    out = np.zeros((len(ns), len(ells) + 1, 2), dtype=np.int64)
    for i, n in enumerate(ns):
        any_violation = np.zeros(R, dtype=bool)
        any_undefined = np.zeros(R, dtype=bool)
        for j, ell in enumerate(ells):
            present, counts = per_ell[j]
            m = m_schedule(n, ell, cfg.params)
            deep = counts[D - 1] > 0
            horizon = np.full(R, -1, dtype=np.int64)
            violated = np.zeros(R, dtype=bool)
            for L in range(ell + 1, D):
                c = counts[L]
                settled = (~present | (c == 0) | (c >= m)).all(axis=1)
                fresh = settled & (horizon < 0)
                horizon[fresh] = L
                if fresh.any():
                    violated[fresh] = ((c[fresh] > 0) != deep[fresh]).any(axis=1)
            out[i, j] = (np.count_nonzero(violated), np.count_nonzero(horizon < 0))
            any_violation |= violated
            any_undefined |= horizon < 0
        out[i, len(ells)] = (np.count_nonzero(any_violation), np.count_nonzero(any_undefined))
    return out


def xn_violation_table(
    ns: Sequence[int],
    cfg: SampleConfig,
    ells: Sequence[int] | None = None,
    workers: int = 1,
) -> list[dict]:
    """Monte Carlo check that the guessed trace is wrong with chance <= 2**-n.

    The true extendible trace is replaced by the deep-horizon proxy: nodes
    with a descendant at level ``depth - 1``. The same samples are reused
    for every ``n``.
    """
    if ells is None:
        ells = range(0, min(6, cfg.depth - 1))
    ells = tuple(ells)
    ns = tuple(ns)
    if not ells or max(ells) >= cfg.depth - 1:
        raise ValueError("every ell must be below depth - 1")
    counts = run_chunks(partial(_xn_counts, cfg, ns, ells), cfg.replicates, workers)
    N = cfg.replicates
    reports = []
    for i, n in enumerate(ns):
        per_ell = []
        for j, ell in enumerate(ells):
            est = int(counts[i, j, 0]) / N
            se = binomial_se(est, N)
            bound = 2.0 ** (-n - ell)
            per_ell.append(
                {
                    "ell": ell,
                    "m": m_schedule(n, ell, cfg.params),
                    "bound": bound,
                    "estimate": est,
                    "stderr": se,
                    "undefined": int(counts[i, j, 1]) / N,
                    "pass": est <= bound + 3 * se,
                }
            )
        est = int(counts[i, len(ells), 0]) / N
        se = binomial_se(est, N)
        bound = 2.0**-n
        reports.append(
            {
                "n": n,
                "bound": bound,
                "estimate": est,
                "stderr": se,
                "undefined": int(counts[i, len(ells), 1]) / N,
                "per_ell": per_ell,
                "pass": est <= bound + 3 * se and all(r["pass"] for r in per_ell),
            }
        )
    return reports


def xn_violation_estimate(
    n: int, cfg: SampleConfig, ells: Sequence[int] | None = None, workers: int = 1
) -> dict:
    return xn_violation_table([n], cfg, ells, workers)[0]


# --- covers from finite-change approximations -------------------------------


@dataclass
class TestFamily:
    """Covers ``V_n`` with their weights, bounds and the selected subsequence."""

    gamma: float
    levels: dict = field(default_factory=dict)
    weights: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    sound_bounds: dict = field(default_factory=dict)
    selection: list = field(default_factory=list)

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "levels": {
                str(n): {
                    "cones": len(self.levels[n]),
                    "weight": self.weights[n],
                    "bound": self.bounds[n],
                    "sound_bound": self.sound_bounds[n],
                }
                for n in sorted(self.levels)
            },
            "selection": [
                {"k": k, "n": n, "bound": b, "target": 2.0**-k} for k, n, b in self.selection
            ],
        }


def cumulative_bound(f: Callable[[int], int], n: int) -> int:
    return sum(f(j) for j in range(n))


def change_counts(snapshots: Sequence[str]) -> list[int]:
    """Flips per position between successive snapshots."""
    if not snapshots:
        return []
    width = len(snapshots[0])
    counts = [0] * width
    for prev, cur in zip(snapshots, snapshots[1:]):
        for j in range(width):
            if prev[j] != cur[j]:
                counts[j] += 1
    return counts


def fce_cover(
    snapshots: Sequence[str],
    f: Callable[[int], int],
    gamma: float,
    k_max: int = 10,
    n_limit: int = 100_000,
) -> TestFamily:
    """Build ``V_n`` (distinct length-``n`` prefixes of the log) for every ``n``.

    ``snapshots`` are successive approximations of a real, all of one
    length. Position ``j`` may flip at most ``f(j)`` times over the log.
    ``V_n`` then has at most ``F(n) + 1`` cones, ``F(n) = sum_{j<n} f(j)``
    (the first snapshot plus one per flip below ``n``). ``bounds`` records
    ``F(n) * 2**(-n*gamma)`` and ``sound_bounds`` the ``F(n) + 1`` version,
    which is what ``selection`` uses: for each ``k <= k_max`` the least
    ``n_k > n_{k-1}`` with sound bound ``<= 2**-k``.
    """
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    width = len(snapshots[0]) if snapshots else 0
    for s in snapshots:
        if len(s) != width or not is_binary(s):
            raise ValueError("snapshots must be binary strings of one common length")
    for j, c in enumerate(change_counts(snapshots)):
        if c > f(j):
            raise ValueError(f"position {j} flips {c} times, more than f({j}) = {f(j)}")

    family = TestFamily(gamma=gamma)
    for n in range(width + 1):
        cover = frozenset(s[:n] for s in snapshots)
        family.levels[n] = cover
        family.weights[n] = weight_gamma(cover, gamma)
        F = cumulative_bound(f, n)
        family.bounds[n] = F * 2.0 ** (-n * gamma)
        family.sound_bounds[n] = (F + 1) * 2.0 ** (-n * gamma)

    n, F = 0, 0
    for k in range(k_max + 1):
        target = 2.0**-k
        while True:
            n += 1
            F += f(n - 1)
            if n > n_limit:
                raise ValueError(f"no n <= {n_limit} reaches weight bound 2**-{k}")
            bound = (F + 1) * 2.0 ** (-n * gamma)
            if bound <= target:
                break
        family.selection.append((k, n, bound))
    return family


def synthetic_change_log(
    f: Callable[[int], int], width: int, stages: int, seed: int = 0
) -> list[str]:
    """A random approximation log honouring the flip budget ``f``."""
    gen = random.Random(seed)
    cur = [gen.choice("01") for _ in range(width)]
    used = [0] * width
    log = ["".join(cur)]
    for _ in range(stages):
        open_positions = [j for j in range(width) if used[j] < f(j)]
        if not open_positions:
            break
        j = gen.choice(open_positions)
        cur[j] = "1" if cur[j] == "0" else "0"
        used[j] += 1
        log.append("".join(cur))
    return log
