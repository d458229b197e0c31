"""Counter-based per-node random numbers.

Every random decision in a simulation is a pure function of
``(seed, purpose, step, x, y)``, so backends that visit nodes in different
orders, on different threads or in different lane groupings still draw
identical values.
"""

from __future__ import annotations

import enum
import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MUL1 = 0xBF58476D1CE4E5B9
MUL2 = 0x94D049BB133111EB
THRESHOLD_ONE = 1 << 32


class RngPurpose(enum.IntEnum):
    INIT = 0
    FORCING = 1
    CHIRALITY = 2


def mix64(z: int) -> int:
    """SplitMix64 finalizer with the golden-ratio increment folded in."""
    z = (z + GOLDEN) & MASK64
    z ^= z >> 30
    z = (z * MUL1) & MASK64
    z ^= z >> 27
    z = (z * MUL2) & MASK64
    z ^= z >> 31
    return z


def stream_base(seed: int, purpose: int, step: int) -> int:
    """The part of :func:`node_random` that does not depend on position."""
    h = mix64((seed + GOLDEN * int(purpose)) & MASK64)
    return mix64((h + step) & MASK64)


def node_random(seed: int, purpose: int, step: int, x: int, y: int) -> int:
    h = stream_base(seed, purpose, step)
    h = mix64((h + x) & MASK64)
    return mix64((h + y) & MASK64)


def threshold(p: float) -> int:
    """Integer acceptance threshold ``floor(p * 2**32)``; ``p == 1`` maps to ``2**32``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    return min(int(math.floor(p * 4294967296.0)), THRESHOLD_ONE)


def bernoulli(word: int, p: float) -> bool:
    return (word >> 32) < threshold(p)


# numpy uint64 arithmetic wraps modulo 2**64, which is exactly what we need.
_GOLDEN_U = np.uint64(GOLDEN)
_MUL1_U = np.uint64(MUL1)
_MUL2_U = np.uint64(MUL2)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64) + _GOLDEN_U
    z ^= z >> _S30
    z *= _MUL1_U
    z ^= z >> _S27
    z *= _MUL2_U
    z ^= z >> _S31
    return z


def node_random_grid(seed: int, purpose: int, step: int, xs, ys) -> np.ndarray:
    """Vectorized :func:`node_random`; returns an array of shape ``(len(ys), len(xs))``."""
    base = np.uint64(stream_base(seed, purpose, step))
    xs = np.asarray(xs, dtype=np.uint64)
    ys = np.asarray(ys, dtype=np.uint64)
    hx = mix64_array(base + xs)
    return mix64_array(hx[None, :] + ys[:, None])
