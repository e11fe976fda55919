"""Finite binary strings, string sets and prefix-closed tree patterns.

A binary string is a plain ``str`` over ``"0"``/``"1"``; the empty string
``""`` is the root. String sets are ``frozenset`` values; ``canonical``
orders them shortlex (by length, then lexicographically) so every
enumeration in the package is deterministic.

``omega(n)`` is the set of strings of length *less than* ``n``; the top
level of a depth-``n`` pattern is therefore level ``n - 1``.
"""

from __future__ import annotations

import json
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator

StringSet = frozenset  # frozenset[str]

MAX_SAMPLE_DEPTH = 24
MAX_ENUM_DEPTH = 4

EMPTY_TOKEN = "e"


def _check_depth(n: int, ceiling: int) -> None:
    if n < 0:
        raise ValueError(f"depth must be non-negative, got {n}")
    if n > ceiling:
        raise ValueError(f"depth {n} exceeds the configured ceiling {ceiling}")


def sort_key(s: str) -> tuple[int, str]:
    return (len(s), s)


def canonical(strings: Iterable[str]) -> list[str]:
    """Shortlex-sorted list of the distinct members of ``strings``."""
    return sorted(set(strings), key=sort_key)


def enumerate_level(n: int, ceiling: int = MAX_SAMPLE_DEPTH) -> list[str]:
    """All ``2**n`` strings of length exactly ``n`` in lexicographic order."""
    _check_depth(n, ceiling)
    return ["".join(bits) for bits in product("01", repeat=n)]


def omega(n: int, ceiling: int = MAX_SAMPLE_DEPTH) -> list[str]:
    """All strings of length < n, shortlex ordered (``2**n - 1`` of them)."""
    _check_depth(n, ceiling)
    return [s for k in range(n) for s in enumerate_level(k, ceiling)]


def is_binary(s: str) -> bool:
    return all(c in "01" for c in s)


def prefixes(s: str) -> Iterator[str]:
    """Every prefix of ``s``, from the empty string up to ``s`` itself."""
    for k in range(len(s) + 1):
        yield s[:k]


def parent(s: str) -> str:
    if not s:
        raise ValueError("the empty string has no parent")
    return s[:-1]


def children(s: str) -> tuple[str, str]:
    return (s + "0", s + "1")


def neighbor(s: str) -> str:
    """The string with the same parent and the opposite last bit."""
    if not s:
        raise ValueError("the empty string has no neighbor")
    return s[:-1] + ("1" if s[-1] == "0" else "0")


def node_index(s: str) -> int:
    """Position of ``s`` in the shortlex enumeration of all strings."""
    return (1 << len(s)) - 1 + (int(s, 2) if s else 0)


def level(strings: Iterable[str], k: int) -> frozenset[str]:
    return frozenset(s for s in strings if len(s) == k)


def restrict(strings: Iterable[str], n: int) -> frozenset[str]:
    """``S`` restricted to ``omega(n)``."""
    return frozenset(s for s in strings if len(s) < n)


def is_prefix_closed(strings: Iterable[str]) -> bool:
    members = set(strings)
    return all(s[:-1] in members for s in members if s)


def truncate_to_tree(S: Iterable[str], n: int) -> frozenset[str]:
    """The strings of length < n all of whose prefixes lie in ``S``."""
    members = set(S)
    tree: set[str] = set()
    if "" not in members or n <= 0:
        return frozenset()
    frontier = [""]
    tree.add("")
    while frontier:
        nxt = []
        for s in frontier:
            if len(s) + 1 >= n:
                continue
            for c in children(s):
                if c in members:
                    tree.add(c)
                    nxt.append(c)
        frontier = nxt
    return frozenset(tree)


def minimal_prefix_free(U: Iterable[str]) -> frozenset[str]:
    """Members of ``U`` with no proper prefix in ``U``."""
    members = set(U)
    return frozenset(
        s for s in members if not any(s[:k] in members for k in range(len(s)))
    )


def is_prefix_free(strings: Iterable[str]) -> bool:
    members = set(strings)
    return all(not any(s[:k] in members for k in range(len(s))) for s in members)


def boundary(T: Iterable[str], n: int) -> frozenset[str]:
    """Strings of ``omega(n)`` outside ``T`` whose parent is in ``T``.

    Together with ``T`` itself these pin down the event that the tree
    generated by a random string set, cut at depth ``n``, equals ``T``.
    """
    tree = frozenset(T)
    if n <= 0:
        return frozenset()
    if not tree:
        return frozenset({""})
    out = set()
    for s in tree:
        if len(s) + 1 < n:
            out.update(c for c in children(s) if c not in tree)
    return frozenset(out)


def top_level(T: Iterable[str], n: int) -> frozenset[str]:
    return level(T, n - 1)


def down_closure(strings: Iterable[str]) -> frozenset[str]:
    return frozenset(p for s in strings for p in prefixes(s))


@lru_cache(maxsize=None)
def all_trees(n: int) -> tuple[frozenset[str], ...]:
    """Every prefix-closed subset of ``omega(n)``, deterministically ordered."""
    _check_depth(n, MAX_ENUM_DEPTH)
    if n == 0:
        return (frozenset(),)
    sub = all_trees(n - 1)
    out = [frozenset()]
    for left in sub:
        for right in sub:
            out.append(
                frozenset({""})
                | frozenset("0" + s for s in left)
                | frozenset("1" + s for s in right)
            )
    return tuple(out)


@lru_cache(maxsize=None)
def extendible_shapes(n: int) -> tuple[frozenset[str], ...]:
    """Nonempty trees in ``omega(n)`` where every node reaches level ``n - 1``.

    These are the possible depth-``n`` traces of the extendible part of a
    surviving tree (and of a Florida tree).
    """
    _check_depth(n, MAX_ENUM_DEPTH)
    if n == 0:
        return ()
    if n == 1:
        return (frozenset({""}),)
    sub = extendible_shapes(n - 1)
    root = frozenset({""})
    out = []
    for left in sub:
        out.append(root | frozenset("0" + s for s in left))
    for right in sub:
        out.append(root | frozenset("1" + s for s in right))
    for left in sub:
        for right in sub:
            out.append(
                root
                | frozenset("0" + s for s in left)
                | frozenset("1" + s for s in right)
            )
    return tuple(out)


def encode_string(s: str) -> str:
    return s if s else EMPTY_TOKEN


def decode_string(token: str) -> str:
    token = token.strip()
    if token == EMPTY_TOKEN:
        return ""
    if not token or not is_binary(token):
        raise ValueError(f"not a binary string: {token!r}")
    return token


def encode_set(strings: Iterable[str]) -> list[str]:
    return [encode_string(s) for s in canonical(strings)]


def dumps_set(strings: Iterable[str]) -> str:
    return json.dumps(encode_set(strings))


def loads_set(text: str) -> frozenset[str]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("string set must be a JSON array")
    return frozenset(decode_string(t) for t in data)


def parse_set(text: str) -> frozenset[str]:
    """Parse a JSON array, or a comma-separated word list like ``e,0,01``."""
    text = text.strip()
    if text.startswith("["):
        return loads_set(text)
    if not text:
        return frozenset()
    return frozenset(decode_string(t) for t in text.split(","))
