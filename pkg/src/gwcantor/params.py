"""Survival parameters and extinction quantities.

Probabilities are either ``fractions.Fraction`` (exact mode) or ``float``.
Every function here computes in the arithmetic of its input, so an exact
``p`` yields exact results and a float ``p`` yields floats.

Extinction given that the root is present is ``e**2``: the root's subtree
dies out exactly when both child subtrees do, and each child subtree is an
independent copy of the whole process. Substituting ``e = (1-p)/p`` into
``e = (1-p) + p*e**2`` confirms the fixed point.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Prob = Union[Fraction, float]

# Exact iterates of the extinction recursion have denominators of order
# p_den ** (2 ** L); past this horizon the caller should switch to floats.
MAX_EXACT_HORIZON = 16

_LOG2_FORM = re.compile(r"^\s*log2\(\s*(\d+)\s*/\s*(\d+)\s*\)\s*$")


def format_prob(x: Prob) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return format(float(x), ".15g")


def parse_prob(text: str) -> Prob:
    text = text.strip()
    if "/" in text or text.isdigit():
        return Fraction(text)
    return float(text)


def is_exact(x: Prob) -> bool:
    return isinstance(x, Fraction)


def _check_unit(p: Prob, name: str = "p") -> None:
    if not 0 <= p <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {format_prob(p)}")


@dataclass(frozen=True)
class SurvivalParams:
    """Survival parameter ``p = 2**-gamma`` with ``gamma`` in ``[0, 1)``."""

    gamma: float
    p: Prob

    def __post_init__(self) -> None:
        if not (Fraction(1, 2) < self.p <= 1):
            raise ValueError(
                f"survival parameter must lie in (1/2, 1], got {format_prob(self.p)}"
            )

    @classmethod
    def from_p(cls, p: Prob) -> "SurvivalParams":
        return cls(gamma=-math.log2(p), p=p)

    @classmethod
    def from_gamma(cls, gamma: Union[str, float, int]) -> "SurvivalParams":
        """Accept a float, or the text ``"log2(q/r)"`` which gives exact ``p = r/q``."""
        if isinstance(gamma, str):
            m = _LOG2_FORM.match(gamma)
            if m:
                q, r = int(m.group(1)), int(m.group(2))
                if q == 0 or r == 0:
                    raise ValueError(f"degenerate gamma {gamma!r}")
                ratio = Fraction(q, r)
                return cls(gamma=math.log2(ratio), p=1 / ratio)
            gamma = float(gamma)
        gamma = float(gamma)
        if not 0 <= gamma < 1:
            raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
        return cls(gamma=gamma, p=2.0**-gamma)

    @property
    def exact(self) -> bool:
        return is_exact(self.p)

    @property
    def p_bar(self) -> Prob:
        return 1 - self.p

    @property
    def e(self) -> Prob:
        return extinction_probability(self.p)

    @property
    def e_root(self) -> Prob:
        return self.e**2

    def as_float(self) -> "SurvivalParams":
        return SurvivalParams(gamma=self.gamma, p=float(self.p))

    def describe(self) -> dict:
        return {
            "gamma": self.gamma,
            "p": format_prob(self.p),
            "p_bar": format_prob(self.p_bar),
            "e": format_prob(self.e),
            "e_root": format_prob(self.e_root),
            "exact": self.exact,
        }


def _as_p(p: Union[SurvivalParams, Prob]) -> Prob:
    return p.p if isinstance(p, SurvivalParams) else p


def extinction_probability(p: Union[SurvivalParams, Prob]) -> Prob:
    """Extinction probability ``(1-p)/p`` of the supercritical binary process."""
    p = _as_p(p)
    if not p > Fraction(1, 2):
        raise ValueError(
            f"extinction_probability needs p > 1/2, got {format_prob(p)}; "
            "use subcritical_extinction for the subcritical regime"
        )
    _check_unit(p)
    return (1 - p) / p


def _check_horizon(p: Prob, L: int) -> None:
    if is_exact(p) and L > MAX_EXACT_HORIZON:
        raise ValueError(
            f"exact horizon {L} exceeds {MAX_EXACT_HORIZON}; pass float(p) instead"
        )


def _iterate(keep: Prob, L: int) -> Prob:
    # ext_{-1} = 0 reproduces ext_0 = 1 - keep.
    ext = keep * 0
    for _ in range(L + 1):
        ext = (1 - keep) + keep * ext * ext
    return ext


def extinction_recursion(p: Union[SurvivalParams, Prob], L: int) -> Prob:
    """Probability that the tree has no node of length ``L``.

    ``ext_0 = 1 - p`` and ``ext_{k+1} = (1 - p) + p * ext_k**2``.
    ``L = -1`` is accepted and gives 0 (the empty chain always exists).
    """
    p = _as_p(p)
    _check_unit(p)
    if L < -1:
        raise ValueError(f"horizon must be >= 0, got {L}")
    _check_horizon(p, L)
    return _iterate(p, L)


def subcritical_extinction(p: Union[SurvivalParams, Prob], L: int) -> Prob:
    """The same recursion for the filler process, whose keep probability is ``1 - p``."""
    p = _as_p(p)
    _check_unit(p)
    if L < -1:
        raise ValueError(f"horizon must be >= 0, got {L}")
    _check_horizon(p, L)
    return _iterate(1 - p, L)


def subcritical_reach_prob(p: Union[SurvivalParams, Prob], k: int) -> Prob:
    """Chance that a filler tree at a fresh node holds a chain of ``k`` nodes.

    ``r_0 = 1`` and ``r_{k+1} = (1 - p) * (1 - (1 - r_k)**2)``.
    """
    p = _as_p(p)
    _check_unit(p)
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    _check_horizon(p, k)
    q = 1 - p
    r = q * 0 + 1
    for _ in range(k):
        r = q * (1 - (1 - r) ** 2)
    return r
