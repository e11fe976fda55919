"""Seeded samplers for the GW, Florida and filler string-set laws.

Batch samplers work level by level on present nodes only and return a
sparse representation: for each level ``k`` a pair of int64 arrays
``(rep, pos)`` listing which replicate (offset into the batch) holds which
node ``pos`` (the string read as a ``k``-bit integer). Because every draw is
keyed by (seed, stream, replicate, node), lazy and eager sampling agree and
results do not depend on batch boundaries or worker counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from . import rng
from .params import SurvivalParams, subcritical_extinction
from .strings import MAX_SAMPLE_DEPTH, node_index, omega, truncate_to_tree

CHUNK = 2000

Levels = list  # list[tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class SampleConfig:
    params: SurvivalParams
    depth: int
    seed: int = 0
    replicates: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.depth <= MAX_SAMPLE_DEPTH:
            raise ValueError(
                f"depth must lie in [0, {MAX_SAMPLE_DEPTH}], got {self.depth}"
            )
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")

    @property
    def p(self) -> float:
        return float(self.params.p)


@dataclass(frozen=True)
class GWSample:
    raw: frozenset  # S restricted to omega(depth)
    tree: frozenset  # the induced tree


def _node_ids(k: int, pos: np.ndarray) -> np.ndarray:
    return pos + ((1 << k) - 1)


def _spawn(rep: np.ndarray, pos: np.ndarray, left: np.ndarray, right: np.ndarray):
    rep_next = np.concatenate([rep[left], rep[right]])
    pos_next = np.concatenate([2 * pos[left], 2 * pos[right] + 1])
    order = np.lexsort((pos_next, rep_next))
    return rep_next[order], pos_next[order]


def percolation_levels(
    keep: float, depth: int, seed: int, reps: np.ndarray, stream: int
) -> Levels:
    """Tree generated by independently keeping each node with prob ``keep``."""
    keys = rng.replicate_keys(seed, stream, reps)
    levels: Levels = []
    if depth == 0:
        return levels
    u = rng.uniforms(keys, np.zeros(len(reps), dtype=np.int64))
    rep = np.flatnonzero(u < keep).astype(np.int64)
    pos = np.zeros(len(rep), dtype=np.int64)
    levels.append((rep, pos))
    for k in range(1, depth):
        crep = np.repeat(rep, 2)
        cpos = np.empty(2 * len(pos), dtype=np.int64)
        cpos[0::2] = 2 * pos
        cpos[1::2] = 2 * pos + 1
        u = rng.uniforms(keys[crep], _node_ids(k, cpos))
        alive = u < keep
        rep, pos = crep[alive], cpos[alive]
        levels.append((rep, pos))
    return levels


def gw_levels(cfg: SampleConfig, start: int, stop: int) -> Levels:
    reps = np.arange(start, stop, dtype=np.int64)
    return percolation_levels(cfg.p, cfg.depth, cfg.seed, reps, rng.STREAM_GW)


def filler_tree_levels(cfg: SampleConfig, start: int, stop: int) -> Levels:
    reps = np.arange(start, stop, dtype=np.int64)
    return percolation_levels(1.0 - cfg.p, cfg.depth, cfg.seed, reps, rng.STREAM_FILLER)


def florida_levels(cfg: SampleConfig, start: int, stop: int) -> Levels:
    """Root always present; each node below the top level draws its child set."""
    reps = np.arange(start, stop, dtype=np.int64)
    keys = rng.replicate_keys(cfg.seed, rng.STREAM_FLORIDA, reps)
    single = 1.0 - cfg.p
    levels: Levels = []
    if cfg.depth == 0:
        return levels
    rep = np.arange(len(reps), dtype=np.int64)
    pos = np.zeros(len(reps), dtype=np.int64)
    levels.append((rep, pos))
    for k in range(1, cfg.depth):
        u = rng.uniforms(keys[rep], _node_ids(k - 1, pos))
        left_only = u < single
        right_only = (u >= single) & (u < 2 * single)
        left = ~right_only
        right = ~left_only
        rep, pos = _spawn(rep, pos, left, right)
        levels.append((rep, pos))
    return levels


def levels_to_sets(levels: Levels, count: int) -> list[frozenset]:
    out: list[set] = [set() for _ in range(count)]
    for k, (rep, pos) in enumerate(levels):
        for r, q in zip(rep.tolist(), pos.tolist()):
            out[r].add(format(q, f"0{k}b") if k else "")
    return [frozenset(s) for s in out]


def _dense_draws(cfg: SampleConfig, replicate: int, stream: int) -> dict[str, float]:
    nodes = omega(cfg.depth)
    key = rng.replicate_keys(cfg.seed, stream, [replicate])
    u = rng.uniforms(key, np.array([node_index(s) for s in nodes], dtype=np.int64))
    return dict(zip(nodes, u.tolist()))


def sample_lambda_1gamma(cfg: SampleConfig, replicate: int = 0) -> GWSample:
    """Raw GW string set on ``omega(depth)`` and the tree it induces."""
    draws = _dense_draws(cfg, replicate, rng.STREAM_GW)
    raw = frozenset(s for s, u in draws.items() if u < cfg.p)
    return GWSample(raw=raw, tree=truncate_to_tree(raw, cfg.depth))


def sample_florida(cfg: SampleConfig, replicate: int = 0) -> frozenset:
    return levels_to_sets(florida_levels(cfg, replicate, replicate + 1), 1)[0]


def sample_lambda_f(cfg: SampleConfig, replicate: int = 0) -> frozenset:
    draws = _dense_draws(cfg, replicate, rng.STREAM_FILLER)
    keep = 1.0 - cfg.p
    return frozenset(s for s, u in draws.items() if u < keep)


def chunk_bounds(total: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    return [(a, min(a + chunk, total)) for a in range(0, total, chunk)]


def run_chunks(
    func: Callable[[int, int], np.ndarray],
    total: int,
    workers: int = 1,
    chunk: int = CHUNK,
) -> np.ndarray:
    """Sum integer count arrays over fixed replicate chunks.

    ``func(start, stop)`` must be picklable when ``workers > 1``. Chunk
    boundaries never depend on ``workers``.
    """
    bounds = chunk_bounds(total, chunk)
    starts = [a for a, _ in bounds]
    stops = [b for _, b in bounds]
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(func, starts, stops))
    else:
        parts = [func(a, b) for a, b in bounds]
    total_counts = np.zeros_like(parts[0])
    for part in parts:
        total_counts = total_counts + part
    return total_counts


def binomial_se(prob: float, n: int) -> float:
    return math.sqrt(max(prob * (1.0 - prob), 0.0) / n)


# --- survival probes under the GW law -------------------------------------


def _probe_counts(cfg: SampleConfig, probes: tuple, start: int, stop: int) -> np.ndarray:
    # Last slot: replicates whose root is present.
    levels = gw_levels(cfg, start, stop)
    out = np.zeros(len(probes) + 1, dtype=np.int64)
    for i, s in enumerate(probes):
        pos = levels[len(s)][1]
        out[i] = np.count_nonzero(pos == (int(s, 2) if s else 0))
    out[-1] = len(levels[0][0]) if levels else 0
    return out


def default_probes(depth: int, count: int = 20, seed: int = 0) -> list[str]:
    """``count`` probe strings spread over lengths 0..depth-1, reproducibly."""
    gen = np.random.default_rng(seed)
    out = []
    for i in range(count):
        k = i % depth
        bits = gen.integers(0, 2, size=k)
        out.append("".join(str(b) for b in bits))
    return out


def _band(observed: float, expected: float, n: int) -> tuple[float, bool]:
    se = binomial_se(expected, n)
    return se, abs(observed - expected) <= 3 * se + 1e-15


def survival_report(
    cfg: SampleConfig, probes: Sequence[str], workers: int = 1
) -> list[dict]:
    """Empirical survival of each probe under the GW law.

    The root itself is drawn with probability ``p``, so
    ``P(sigma in G) = p**(|sigma|+1)`` and, given the root,
    ``P(sigma in G | root in G) = p**|sigma|``. ``pass`` judges the
    conditional version (the ``expected``/``observed`` columns);
    ``unconditional_pass`` judges the other.
    """
    probes = tuple(probes)
    for s in probes:
        if len(s) >= cfg.depth:
            raise ValueError(f"probe {s!r} is not inside omega({cfg.depth})")
    counts = run_chunks(partial(_probe_counts, cfg, probes), cfg.replicates, workers)
    N = cfg.replicates
    rooted = int(counts[-1])
    p = cfg.params.p
    rows = []
    for s, c in zip(probes, counts[:-1].tolist()):
        expected = float(p ** len(s))
        observed = c / rooted if rooted else 0.0
        se, ok = _band(observed, expected, max(rooted, 1))
        u_expected = float(p ** (len(s) + 1))
        u_observed = c / N
        u_se, u_ok = _band(u_observed, u_expected, N)
        rows.append(
            {
                "probe": s,
                "expected": expected,
                "observed": observed,
                "stderr": se,
                "rooted": rooted,
                "unconditional_expected": u_expected,
                "unconditional_observed": u_observed,
                "unconditional_stderr": u_se,
                "unconditional_pass": u_ok,
                "pass": ok,
            }
        )
    return rows


# --- small-depth pattern frequencies --------------------------------------


def pattern_masks(levels: Levels, count: int) -> np.ndarray:
    """Bitmask over shortlex node ids for each replicate (depth <= 6)."""
    masks = np.zeros(count, dtype=np.int64)
    for k, (rep, pos) in enumerate(levels):
        np.bitwise_or.at(masks, rep, np.left_shift(1, _node_ids(k, pos)))
    return masks


def mask_to_set(mask: int, depth: int) -> frozenset:
    return frozenset(s for s in omega(depth) if mask >> node_index(s) & 1)


def set_to_mask(strings: Iterable[str]) -> int:
    return sum(1 << node_index(s) for s in strings)


def _pattern_counts(
    sampler: Callable, cfg: SampleConfig, start: int, stop: int
) -> np.ndarray:
    masks = pattern_masks(sampler(cfg, start, stop), stop - start)
    return np.bincount(masks, minlength=1 << ((1 << cfg.depth) - 1))


def florida_pattern_counts(cfg: SampleConfig, workers: int = 1) -> np.ndarray:
    if cfg.depth > 4:
        raise ValueError("pattern tables are limited to depth <= 4")
    return run_chunks(
        partial(_pattern_counts, florida_levels, cfg), cfg.replicates, workers
    )


def chi_square_report(counts: np.ndarray, expected_probs: dict, total: int) -> dict:
    """Pearson statistic of mask counts against exact pattern probabilities."""
    stat = 0.0
    cells = 0
    outside = 0
    for mask, c in enumerate(counts.tolist()):
        prob = float(expected_probs.get(mask, 0))
        if prob > 0:
            e = prob * total
            stat += (c - e) ** 2 / e
            cells += 1
        else:
            outside += c
    df = max(cells - 1, 1)
    quantile = float(stats.chi2.ppf(0.999, df))
    return {
        "statistic": stat,
        "df": df,
        "quantile_0.999": quantile,
        "impossible_patterns_seen": outside,
        "pass": stat < quantile and outside == 0,
    }


# --- filler reach frequencies ---------------------------------------------


def _reach_counts(cfg: SampleConfig, start: int, stop: int) -> np.ndarray:
    levels = filler_tree_levels(cfg, start, stop)
    return np.array([len(np.unique(rep)) for rep, _ in levels], dtype=np.int64)


def filler_reach_report(cfg: SampleConfig, workers: int = 1) -> list[dict]:
    """Chance the filler tree reaches level ``k`` against ``1 - ext'_k``."""
    counts = run_chunks(partial(_reach_counts, cfg), cfg.replicates, workers)
    p = cfg.params.as_float().p
    rows = []
    for k, c in enumerate(counts.tolist()):
        expected = 1.0 - subcritical_extinction(p, k)
        se = binomial_se(expected, cfg.replicates)
        observed = c / cfg.replicates
        rows.append(
            {
                "probe": k,
                "expected": expected,
                "observed": observed,
                "stderr": se,
                "pass": abs(observed - expected) <= 3 * se + 1e-15,
            }
        )
    return rows
