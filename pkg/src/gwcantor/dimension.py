"""Ultrametric energy of cylinder measures, T_Z trees and Bernoulli entropy.

Energy is computed from the neighbour-cylinder expansion: for ``a`` drawn
from ``mu`` the inner integral is ``sum_n 2**(n*gamma) * mu(neighbour of
a|n+1)``, so integrating in ``a`` gives the level sums

    E_n = sum_{|s| = n+1} mu(s) * mu(s*)

and ``I_gamma(mu) = sum_n 2**(n*gamma) * E_n``. For measures whose split
ratio depends only on the level, ``E_n = 2 s_n (1 - s_n) Q_n`` where
``Q_n = sum_{|t| = n} mu(t)**2`` obeys ``Q_{n+1} = Q_n (s_n**2 + (1-s_n)**2)``;
this runs in ``O(D)`` and is evaluated in log space so deep horizons
neither overflow nor underflow. Other measures fall back to enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from scipy import optimize

from .params import Prob
from .strings import enumerate_level, neighbor

BRUTE_FORCE_DEPTH = 18


def ultrametric(x: str, y: str) -> float:
    """``2**-k`` where ``k`` is the first index at which ``x`` and ``y`` differ."""
    if len(x) != len(y):
        raise ValueError("ultrametric needs strings of equal length")
    for k, (a, b) in enumerate(zip(x, y)):
        if a != b:
            return 2.0**-k
    raise ValueError("ultrametric is undefined on the diagonal")


class CylinderMeasure:
    """A probability measure given by its mass on every cylinder."""

    def __init__(self, mass: Callable[[str], Prob], tag: str, horizon: Optional[int] = None):
        self._mass = mass
        self.tag = tag
        self.horizon = horizon

    def mass(self, s: str) -> Prob:
        if self.horizon is not None and len(s) > self.horizon:
            raise ValueError(f"{self.tag} is only defined up to length {self.horizon}")
        return self._mass(s)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.tag!r})"


class LevelSplitMeasure(CylinderMeasure):
    """Measure where a cylinder at level ``n`` sends ``split(n)`` of its mass to the 0-child."""

    def __init__(self, split: Callable[[int], Prob], tag: str, horizon: Optional[int] = None):
        self.split = split
        super().__init__(self._product_mass, tag, horizon)

    def _product_mass(self, s: str) -> Prob:
        m = Fraction(1)
        for n, bit in enumerate(s):
            share = self.split(n)
            m *= share if bit == "0" else 1 - share
            if m == 0:
                break
        return m


def check_conservation(mu: CylinderMeasure, depth: int) -> Optional[str]:
    """First string violating ``mu(s) = mu(s0) + mu(s1)``, or None."""
    if mu.mass("") != 1:
        return ""
    for n in range(depth):
        for s in enumerate_level(n):
            if mu.mass(s) != mu.mass(s + "0") + mu.mass(s + "1"):
                return s
    return None


def support(mu: CylinderMeasure, n: int) -> list[str]:
    """Strings of length ``n`` with positive mass, by pruned search."""
    frontier = [""]
    for _ in range(n):
        frontier = [c for s in frontier for c in (s + "0", s + "1") if mu.mass(c) > 0]
    return frontier


def uniform_measure() -> LevelSplitMeasure:
    return LevelSplitMeasure(lambda n: Fraction(1, 2), "uniform")


def bernoulli_measure(p: Prob) -> LevelSplitMeasure:
    """i.i.d. bits with ``P(bit = 1) = p``."""
    p = Fraction(p) if not isinstance(p, float) else p
    return LevelSplitMeasure(lambda n: 1 - p, f"bernoulli({p})")


# --- energy ----------------------------------------------------------------


def _level_terms_split(mu: LevelSplitMeasure, gamma: float, D: int) -> list[float]:
    terms = []
    log_q = 0.0  # log2 of the sum of squared masses at the current level
    for n in range(D):
        s = float(mu.split(n))
        if 0.0 < s < 1.0:
            terms.append(2.0 ** (n * gamma + math.log2(2.0 * s * (1.0 - s)) + log_q))
            log_q += math.log2(s * s + (1.0 - s) * (1.0 - s))
        else:
            terms.append(0.0)
    return terms


def _level_terms_brute(mu: CylinderMeasure, gamma: float, D: int) -> list[float]:
    if D > BRUTE_FORCE_DEPTH:
        raise ValueError(f"enumeration is limited to D <= {BRUTE_FORCE_DEPTH}")
    terms = []
    for n in range(D):
        e_n = sum(float(mu.mass(s)) * float(mu.mass(neighbor(s))) for s in enumerate_level(n + 1))
        terms.append(2.0 ** (n * gamma) * e_n)
    return terms


def energy_increments(
    mu: CylinderMeasure, gamma: float, D: int, method: str = "auto"
) -> list[float]:
    """The level terms ``2**(n*gamma) * E_n`` for ``n < D``."""
    if method == "auto":
        method = "split" if isinstance(mu, LevelSplitMeasure) else "brute"
    if method == "split":
        if not isinstance(mu, LevelSplitMeasure):
            raise ValueError("split method needs a LevelSplitMeasure")
        return _level_terms_split(mu, gamma, D)
    if method == "brute":
        return _level_terms_brute(mu, gamma, D)
    raise ValueError(f"unknown method {method!r}")


def gamma_energy_partial(
    mu: CylinderMeasure, gamma: float, D: int, method: str = "auto"
) -> float:
    """Truncation of the gamma-energy at ``D`` levels."""
    return math.fsum(energy_increments(mu, gamma, D, method))


def energy_table(mu: CylinderMeasure, gamma: float, D: int) -> list[tuple[int, float, float]]:
    """``(D', partial sum, increment)`` rows for ``D' = 1..D``."""
    rows = []
    acc: list[float] = []
    for n, t in enumerate(energy_increments(mu, gamma, D)):
        acc.append(t)
        rows.append((n + 1, math.fsum(acc), t))
    return rows


# --- the half-dimensional measure and its modification ---------------------


def schedule_value(epsilon: float, k: int, literal: bool = False) -> float:
    """``f(k) = 2k - 2(1+eps)log2 k``; ``literal=True`` uses ``1-eps`` instead.

    Only the ``1+eps`` form makes ``sum 2**(f(k)/2 - k - 1)`` converge; the
    other gives terms of order ``k**-(1-eps)``.
    """
    if k == 0:
        return 0.0
    c = 1 - epsilon if literal else 1 + epsilon
    return 2 * k - 2 * c * math.log2(k)


def modified_split_levels(epsilon: float, count: int, literal: bool = False) -> list[int]:
    """Levels of the first ``count`` splits of the modified schedule.

    Split ``k`` goes to ``ceil(f(k))``, pushed up to one past the previous
    split when that is not larger (split 0 sits at the root).
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    out = []
    prev = -1
    for k in range(count):
        target = math.ceil(schedule_value(epsilon, k, literal))
        lvl = max(target, prev + 1)
        out.append(lvl)
        prev = lvl
    return out


class HopeMeasure(LevelSplitMeasure):
    """Fair splits at the scheduled levels, forced 0-children everywhere else.

    The plain variant splits at every even level. The modified variant
    splits slightly more often (see ``modified_split_levels``), which keeps
    dimension 1/2 but makes the 1/2-energy finite.
    """

    def __init__(self, epsilon: Optional[float] = None, literal: bool = False):
        self.epsilon = epsilon
        self.literal = literal
        self._levels: list[int] = []
        self._level_set: set[int] = set()
        if epsilon is None:
            tag = "hope"
        else:
            tag = f"hope-modified({epsilon}{', literal' if literal else ''})"
        super().__init__(self._split, tag)

    def split_levels(self, count: int) -> list[int]:
        if len(self._levels) < count:
            if self.epsilon is None:
                self._levels = [2 * k for k in range(count)]
            else:
                self._levels = modified_split_levels(self.epsilon, count, self.literal)
            self._level_set = set(self._levels)
        return self._levels[:count]

    def _split(self, n: int) -> Fraction:
        while not self._levels or self._levels[-1] < n:
            self.split_levels(max(16, 2 * len(self._levels)))
        return Fraction(1, 2) if n in self._level_set else Fraction(1)

    def split_terms(self, gamma: float, count: int) -> list[float]:
        """Energy term of each split: ``2**(level_k * gamma) * 2**-(k+1)``."""
        return [
            2.0 ** (lvl * gamma - (k + 1)) for k, lvl in enumerate(self.split_levels(count))
        ]


def hope_measure(epsilon: Optional[float] = None, literal: bool = False) -> HopeMeasure:
    return HopeMeasure(epsilon, literal)


def modified_tail_bounds(epsilon: float, k: int, gamma: float = 0.5) -> tuple[float, float]:
    """Bounds on the energy remainder after the first ``k`` splits of the modified measure.

    Valid once the schedule has caught up with ``ceil(f(j))`` for ``j >= k``
    (checked): then ``f(j) <= level_j < f(j) + 1`` and the ``j``-th term lies
    between ``2**(f(j)/2 - j - 1)`` and ``sqrt 2`` times that, i.e.
    ``c * j**-(1+eps)`` with ``c`` in ``[1/2, sqrt(2)/2]``.
    """
    if gamma != 0.5:
        raise ValueError("tail bounds are derived for gamma = 1/2")
    levels = modified_split_levels(epsilon, k + 2)
    for j in (k, k + 1):
        f = schedule_value(epsilon, j)
        if not f <= levels[j] < f + 1:
            raise ValueError(f"schedule at split {j} has not reached its ceiling regime")
    lower = 0.5 * (k + 1) ** -epsilon / epsilon
    upper = math.sqrt(2) / 2 * k**-epsilon / epsilon
    return lower, upper


def energy_bound_check(
    mu: CylinderMeasure,
    gamma: float,
    penalty: Callable[[int], float],
    c_R: float,
    horizon: int = 12,
    max_terms: int = 100_000,
) -> dict:
    """Check ``mu(s) <= c_R 2**(-|s| gamma - penalty(|s|))`` and the energy bound.

    ``c_hat = c_R * sum_n 2**(-gamma - penalty(n+1))`` must dominate every
    partial energy. Raises ``ValueError`` naming the first bad string if
    the mass hypothesis fails.
    """
    tol = 1e-12
    for n in range(horizon + 1):
        cap = c_R * 2.0 ** (-n * gamma - penalty(n))
        for s in support(mu, n):
            if float(mu.mass(s)) > cap * (1 + tol):
                raise ValueError(
                    f"mass bound fails at {s or 'e'}: {float(mu.mass(s))} > {cap}"
                )
    terms = []
    running = 0.0
    for n in range(max_terms):
        t = c_R * 2.0 ** (-gamma - penalty(n + 1))
        terms.append(t)
        running += t
        if n > 8 and t < 1e-17 * running:
            break
    else:
        raise ValueError("penalty series does not converge; c_hat is infinite")
    c_hat = math.fsum(terms)
    partials = [row[1] for row in energy_table(mu, gamma, horizon)]
    return {
        "c_hat": c_hat,
        "partials": partials,
        "max_partial": max(partials) if partials else 0.0,
        "pass": all(v <= c_hat for v in partials),
    }


# --- T_Z trees --------------------------------------------------------------


@dataclass(frozen=True)
class ZPattern:
    """``Z = {n : n mod q < r}``; outside ``Z`` the tree forces a 0 bit."""

    q: int
    r: int

    def __post_init__(self) -> None:
        if not 0 < self.r < self.q:
            raise ValueError(f"need 0 < r < q, got q={self.q}, r={self.r}")

    def __call__(self, n: int) -> bool:
        return n % self.q < self.r

    def in_tree(self, s: str) -> bool:
        return all(self(n) or bit == "0" for n, bit in enumerate(s))

    def free_count(self, n: int) -> int:
        """``#{j < n : j in Z}``."""
        return (n // self.q) * self.r + min(n % self.q, self.r)


ENUMERATION_LENGTH = 16


def tz_tree_count(z: ZPattern, m: int, method: str = "both") -> int:
    """Number of strings of length ``m*q`` in ``T_Z``.

    ``"enumerate"`` walks the tree, ``"closed"`` returns ``2**(m*r)``;
    ``"both"`` (the default) computes each when the length permits
    enumeration and insists that they agree.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    closed = 2 ** (m * z.r)
    if method == "closed":
        return closed
    length = m * z.q
    if length > ENUMERATION_LENGTH:
        if method == "enumerate":
            raise ValueError(f"enumeration is limited to length {ENUMERATION_LENGTH}")
        return closed
    frontier = [""]
    for n in range(length):
        frontier = [s + b for s in frontier for b in ("01" if z(n) else "0")]
    counted = len(frontier)
    if method == "enumerate":
        return counted
    if counted != closed:
        raise AssertionError(f"enumeration {counted} != closed form {closed}")
    return counted


def tz_measure(z: ZPattern) -> LevelSplitMeasure:
    """Fair split on ``Z``, forced 0 off ``Z``; supported exactly on ``[T_Z]``."""
    return LevelSplitMeasure(
        lambda n: Fraction(1, 2) if z(n) else Fraction(1), f"tz(q={z.q},r={z.r})"
    )


def tz_increment(z: ZPattern, gamma: float, n: int) -> float:
    """Closed-form energy term at level ``n``: ``2**(n gamma - F(n+1))`` on ``Z``."""
    return 2.0 ** (n * gamma - z.free_count(n + 1)) if z(n) else 0.0


# --- Bernoulli entropy --------------------------------------------------------


def bernoulli_entropy(p: Prob) -> float:
    """Binary entropy in bits, with ``0 log 0 = 0``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return math.fsum(-x * math.log2(x) for x in (p, 1.0 - p) if 0.0 < x < 1.0)


def is_member_bias(p: Prob, gamma: float) -> bool:
    """``p**p * (1-p)**(1-p) < 2**-gamma``, i.e. entropy strictly above ``gamma``."""
    p = float(p)
    return p**p * (1.0 - p) ** (1.0 - p) < 2.0**-gamma


def bernoulli_member_interval(gamma: float, xtol: float = 1e-15) -> dict:
    """Open interval of biases whose entropy exceeds ``gamma``.

    Each endpoint is found by bisection on its own half of ``[0, 1]``.
    """
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")

    def excess(p: float) -> float:
        return bernoulli_entropy(p) - gamma

    lo = optimize.bisect(excess, 0.0, 0.5, xtol=xtol, maxiter=200)
    hi = optimize.bisect(excess, 0.5, 1.0, xtol=xtol, maxiter=200)
    residual = max(abs(excess(lo)), abs(excess(hi)))
    return {"gamma": gamma, "p_lo": lo, "p_hi": hi, "residual": residual}
