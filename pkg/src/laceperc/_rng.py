"""Counter-based pseudo-randomness.

Every draw is a pure function of (seed, stream, counter), so occupancy bits can
be produced densely (vectorized over all sites), lazily (one site of a torus too
large to materialize), or in parallel workers, and always agree bit for bit.
The generator is the SplitMix64 output function applied to a per-(seed, stream)
key plus counter * golden-ratio increments; it passes BigCrush and is far
stronger than desk-scale Monte Carlo needs.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STREAM = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_NP_GOLDEN = np.uint64(_GOLDEN)
_NP_M1 = np.uint64(_M1)
_NP_M2 = np.uint64(_M2)


def mix64(x: int) -> int:
    """SplitMix64 finalizer on python ints (mod 2^64)."""
    x &= MASK64
    x ^= x >> 30
    x = (x * _M1) & MASK64
    x ^= x >> 27
    x = (x * _M2) & MASK64
    return x ^ (x >> 31)


def stream_key(seed: int, stream: int) -> int:
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be nonnegative")
    return mix64(mix64(seed) ^ ((stream * _STREAM) & MASK64))


def bits_at(key: int, counter: int) -> int:
    """The 64-bit draw at one counter position."""
    return mix64((key + counter * _GOLDEN) & MASK64)


def _mix64_np(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> np.uint64(30))
    x = x * _NP_M1
    x = x ^ (x >> np.uint64(27))
    x = x * _NP_M2
    return x ^ (x >> np.uint64(31))


def bits_array(key: int, counters: np.ndarray) -> np.ndarray:
    """Vectorized draws; elementwise identical to bits_at."""
    with np.errstate(over="ignore"):
        c = np.asarray(counters, dtype=np.uint64)
        return _mix64_np(np.uint64(key) + c * _NP_GOLDEN)


def bernoulli_threshold(p: float) -> int:
    """Integer threshold T with P(draw < T) = p exactly (T in [0, 2^64])."""
    if p <= 0.0:
        return 0
    if p >= 1.0:
        return 1 << 64
    return int(p * float(1 << 64))


def occupancy_array(seed: int, stream: int, n: int, p: float) -> np.ndarray:
    """Dense Bernoulli(p) occupancy over counters 0..n-1, dtype uint8."""
    t = bernoulli_threshold(p)
    if t == 0:
        return np.zeros(n, dtype=np.uint8)
    if t == 1 << 64:
        return np.ones(n, dtype=np.uint8)
    key = stream_key(seed, stream)
    bits = bits_array(key, np.arange(n, dtype=np.uint64))
    return (bits < np.uint64(t)).astype(np.uint8)


def permutation(seed: int, stream: int, n: int) -> np.ndarray:
    """Random order of 0..n-1: argsort of the per-counter draws."""
    key = stream_key(seed, stream)
    bits = bits_array(key, np.arange(n, dtype=np.uint64))
    return np.argsort(bits, kind="stable").astype(np.int64)
