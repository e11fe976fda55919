"""Exact depth-n cylinder probabilities.

Laws covered, all on patterns inside ``omega(n)``:

* ``gw_pattern_prob``: the GW tree cut at depth n.
* ``florida_pattern_prob``: the Florida tree cut at depth n.
* ``mu_c_cylinder``: the GW law conditioned on survival, jointly with the
  depth-n trace ``T'`` of its extendible part.
* ``mu_i_cylinder``: the marginal law of ``T'`` under that conditioning.

Why ``mu_c_cylinder`` has its product form: given that the GW tree cut at
depth n equals ``T``, the subtrees hanging below distinct top-level nodes
are independent, and a present node's subtree is finite with probability
``e**2`` (both of its child subtrees must die). The extendible trace is the
down-closure of the surviving top nodes, so with ``a`` surviving and ``b``
dying top nodes the joint probability is
``P(T) * (1 - e**2)**a * (e**2)**b``; dividing by ``P(survival) = 1 - e``
conditions. Replacing the infinite-horizon ``e**2`` by the finite-horizon
``ext_{L-n-1}**2`` gives the oracle ``mu_c_oracle``, which converges to the
closed form geometrically with ratio ``2*p*e``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .params import Prob, SurvivalParams, extinction_recursion
from .strings import (
    MAX_ENUM_DEPTH,
    all_trees,
    boundary,
    children,
    down_closure,
    extendible_shapes,
    is_prefix_closed,
    node_index,
    omega,
    top_level,
)


def _check_tree(T: frozenset, n: int) -> None:
    if any(len(s) >= n for s in T):
        raise ValueError(f"pattern is not inside omega({n})")
    if not is_prefix_closed(T):
        raise ValueError("pattern is not prefix-closed")


def gw_pattern_prob(T, n: int, params: SurvivalParams) -> Prob:
    """``P(G cut at depth n == T)`` under the GW law."""
    T = frozenset(T)
    _check_tree(T, n)
    p = params.p
    return p ** len(T) * (1 - p) ** len(boundary(T, n))


def florida_pattern_prob(T, n: int, params: SurvivalParams) -> Prob:
    """``P(Florida tree cut at depth n == T)``; 0 for impossible shapes."""
    T = frozenset(T)
    p = params.p
    zero = p * 0
    if n <= 0 or "" not in T or not is_prefix_closed(T):
        return zero
    if any(len(s) >= n for s in T):
        return zero
    prob = zero + 1
    for s in T:
        if len(s) >= n - 1:
            continue
        kids = sum(c in T for c in children(s))
        if kids == 0:
            return zero
        prob *= (2 * p - 1) if kids == 2 else (1 - p)
    return prob


@dataclass(frozen=True)
class CylinderPair:
    """A depth-n tree ``T`` together with a candidate extendible trace ``T_prime``."""

    T: frozenset
    T_prime: frozenset

    def is_valid(self, n: int) -> bool:
        T, Tp = self.T, self.T_prime
        if not Tp or not Tp <= T:
            return False
        if any(len(s) >= n for s in T) or not is_prefix_closed(T):
            return False
        # The trace must be the down-closure of its own top level.
        return down_closure(top_level(Tp, n)) == Tp


def valid_pairs(n: int) -> list[CylinderPair]:
    """All valid pairs at depth ``n``, deterministically ordered."""
    out = []
    for Tp in extendible_shapes(n):
        for T in all_trees(n):
            if Tp <= T:
                out.append(CylinderPair(T, Tp))
    return out


def _split_top(pair: CylinderPair, n: int) -> tuple[int, int]:
    a = len(top_level(pair.T_prime, n))
    b = len(top_level(pair.T, n)) - a
    return a, b


def mu_c_cylinder(pair: CylinderPair, n: int, params: SurvivalParams) -> Prob:
    """Conditioned-on-survival probability of the pair, in closed form."""
    zero = params.p * 0
    if not pair.is_valid(n):
        return zero
    a, b = _split_top(pair, n)
    dead = params.e_root
    return gw_pattern_prob(pair.T, n, params) * (1 - dead) ** a * dead**b / (1 - params.e)


def mu_c_oracle(
    pair: CylinderPair,
    n: int,
    L: int,
    params: SurvivalParams,
    method: str = "recursion",
) -> Prob:
    """Finite-horizon version of ``mu_c_cylinder``.

    Extendibility is replaced by having a descendant at level ``L - 1`` and
    survival by reaching level ``L - 1``. ``method="recursion"`` uses the
    finite extinction recursion per top node; ``method="enumerate"`` sums
    over every subset of ``omega(L)`` (``L <= 4``).
    """
    if L < n:
        raise ValueError(f"horizon L={L} must be >= n={n}")
    if method == "enumerate":
        return _oracle_table(n, L, params).get((pair.T, pair.T_prime), params.p * 0)
    if method != "recursion":
        raise ValueError(f"unknown method {method!r}")
    if not pair.is_valid(n):
        return params.p * 0
    a, b = _split_top(pair, n)
    dead = extinction_recursion(params.p, L - n - 1) ** 2
    reach = 1 - extinction_recursion(params.p, L - 1)
    return gw_pattern_prob(pair.T, n, params) * (1 - dead) ** a * dead**b / reach


def mu_c_oracle_table(n: int, L: int, params: SurvivalParams) -> dict:
    """Brute-force ``{(T, T'): prob}`` over all subsets of ``omega(L)``."""
    return dict(_oracle_table(n, L, params))


@lru_cache(maxsize=32)
def _oracle_table(n: int, L: int, params: SurvivalParams) -> dict:
    if not 1 <= n <= L <= MAX_ENUM_DEPTH:
        raise ValueError(f"enumeration needs 1 <= n <= L <= {MAX_ENUM_DEPTH}")
    p = params.p
    size = (1 << L) - 1
    keep_pow = [p**k for k in range(size + 1)]
    drop_pow = [(1 - p) ** k for k in range(size + 1)]
    low = (1 << ((1 << n) - 1)) - 1
    top_first = (1 << (n - 1)) - 1
    deep_first = (1 << (L - 1)) - 1
    strings = omega(L, ceiling=MAX_ENUM_DEPTH)
    by_index = {node_index(s): s for s in strings}

    acc: dict = {}
    reach_total = p * 0
    for raw in range(1 << size):
        tree = raw & 1
        for i in range(1, size):
            if raw >> i & 1 and tree >> ((i - 1) // 2) & 1:
                tree |= 1 << i
        deep = [i for i in range(deep_first, size) if tree >> i & 1]
        if not deep:
            continue
        k = bin(raw).count("1")
        w = keep_pow[k] * drop_pow[size - k]
        reach_total += w
        live_top = {
            top_first + ((i - deep_first) >> (L - n)) for i in deep
        }
        T = frozenset(by_index[i] for i in range(size) if (tree & low) >> i & 1)
        Tp = down_closure(by_index[i] for i in live_top)
        acc[(T, Tp)] = acc.get((T, Tp), p * 0) + w
    return {key: w / reach_total for key, w in acc.items()}


def mu_i_cylinder(T_prime, n: int, params: SurvivalParams) -> Prob:
    """Law of the extendible trace: sum of ``mu_c_cylinder`` over ``T``."""
    Tp = frozenset(T_prime)
    total = params.p * 0
    if not Tp:
        return total
    for T in all_trees(n):
        if Tp <= T:
            total += mu_c_cylinder(CylinderPair(T, Tp), n, params)
    return total


def conditional_child_distribution(
    params: SurvivalParams, L: int
) -> tuple[Prob, Prob, Prob]:
    """Surviving child set ``({0}, {1}, {0,1})`` given survival, at horizon ``L``.

    A child survives if its subtree reaches level ``L``; its failure chance
    is ``x = ext_{L-1}``. Given the root is present and at least one child
    survives, both survive with probability ``(1-x)**2 / (1-x**2)`` and
    each single child with ``x*(1-x) / (1-x**2)``.
    """
    if L < 0:
        raise ValueError("horizon must be >= 0")
    x = extinction_recursion(params.p, L - 1)
    single = x / (1 + x)
    both = (1 - x) / (1 + x)
    return single, single, both


def total_mass(values) -> Prob:
    vals = list(values)
    out = vals[0] * 0 if vals else Fraction(0)
    for v in vals:
        out += v
    return out
