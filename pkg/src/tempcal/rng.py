"""Counter-based deterministic random streams.

Every random quantity in this package is a pure function of a 64-bit
stream seed and a counter, so results are reproducible across platforms
and independent of evaluation order.  The generator is SplitMix64 used
in counter mode: draw k of stream s is ``mix64(s + (k+1)*GAMMA)`` where
``mix64`` is the SplitMix64 finalizer and GAMMA is the 64-bit golden
ratio increment.  Per-image streams are derived from a base seed with
the same mixing, so image i always sees the same noise regardless of
how many images were processed before it.
"""

from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# 2**-53, scale for mapping the top 53 bits of a u64 to [0, 1)
_U01 = 1.0 / 9007199254740992.0


def _mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * _M1
        x = (x ^ (x >> np.uint64(27))) * _M2
        return x ^ (x >> np.uint64(31))


def stream_seed(base: int, index: int) -> int:
    """Derive the seed of sub-stream `index` from a base seed.

    Identical (base, index) pairs always produce identical streams;
    distinct indices give statistically independent streams.
    """
    if base < 0 or index < 0:
        raise ValueError("seed and stream index must be nonnegative")
    with np.errstate(over="ignore"):
        s = np.uint64(base & 0xFFFFFFFFFFFFFFFF) + GAMMA * np.uint64(index + 1)
    return int(_mix64(np.uint64(s)))


def raw_at(seed: int, counters: np.ndarray) -> np.ndarray:
    """uint64 outputs at the given counter positions of a stream."""
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(np.uint64(seed) + (c + np.uint64(1)) * GAMMA)


def uniforms_at(seed: int, counters: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) doubles at the given counter positions."""
    return (raw_at(seed, counters) >> np.uint64(11)).astype(np.float64) * _U01


def uniforms(seed: int, n: int, start: int = 0) -> np.ndarray:
    """n uniform [0, 1) doubles at counters start..start+n-1."""
    return uniforms_at(seed, np.arange(start, start + n, dtype=np.uint64))


def normals_at(seed: int, indices: np.ndarray) -> np.ndarray:
    """Standard normals, one per index; index i uses counters 2i, 2i+1.

    Box-Muller (cosine branch) on two uniforms.  1-u keeps the log
    argument in (0, 1].
    """
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        u1 = uniforms_at(seed, idx * np.uint64(2))
        u2 = uniforms_at(seed, idx * np.uint64(2) + np.uint64(1))
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def normals(seed: int, n: int) -> np.ndarray:
    return normals_at(seed, np.arange(n, dtype=np.uint64))


def permutation(seed: int, n: int, round_index: int = 0) -> np.ndarray:
    """Deterministic permutation of range(n); rounds use disjoint counters."""
    keys = uniforms(seed, n, start=round_index * n)
    return np.argsort(keys, kind="stable")
