"""Counter-based uniforms keyed by (seed, stream, replicate, node).

Each draw is a pure function of its key, computed with the SplitMix64
finalizer. Samplers can therefore visit nodes lazily, in any order, from
any process, and still see exactly the same values as an eager sweep.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_REP_MUL = np.uint64(0xD1B54A32D192ED03)
_MASK64 = (1 << 64) - 1

STREAM_GW = 0
STREAM_FLORIDA = 1
STREAM_FILLER = 2


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def replicate_keys(seed: int, stream: int, replicates) -> np.ndarray:
    """One 64-bit key per replicate index."""
    reps = np.asarray(replicates, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = _mix(np.uint64(seed & _MASK64) + _GOLDEN * np.uint64(stream + 1))
        return _mix(base ^ (reps * _REP_MUL))


def uniforms(keys, nodes) -> np.ndarray:
    """Uniforms in [0, 1) for broadcast-compatible arrays of keys and node ids."""
    k = np.asarray(keys, dtype=np.uint64)
    n = np.asarray(nodes, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix(k + (n + np.uint64(1)) * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def uniform(seed: int, stream: int, replicate: int, node: int) -> float:
    key = replicate_keys(seed, stream, [replicate])
    return float(uniforms(key, [node])[0])
