"""Counter-based deterministic random words.

The generator is the splitmix64 finalizer applied to `seed + (i + 1) * GOLDEN`
(all arithmetic mod 2^64), so word i of a stream is addressable directly:
there is no sequential state, any counter range can be computed independently,
and sharded producers get bit-identical output regardless of shard count.
Substreams are derived by using a word from one stream as the seed of another.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """splitmix64 finalizer on a Python int (exact mod-2^64 arithmetic)."""
    x &= _MASK
    x ^= x >> 30
    x = (x * _MIX1) & _MASK
    x ^= x >> 27
    x = (x * _MIX2) & _MASK
    x ^= x >> 31
    return x


def word(seed: int, counter: int) -> int:
    """The counter-th 64-bit word of the stream identified by seed."""
    return mix64((seed + (counter + 1) * GOLDEN) & _MASK)


def uniform(seed: int, counter: int) -> float:
    """Uniform in [0, 1) with 53-bit resolution."""
    return (word(seed, counter) >> 11) / float(1 << 53)


def words_array(seed: int, counters: np.ndarray) -> np.ndarray:
    """Vectorized `word` over a uint64 counter array."""
    with np.errstate(over="ignore"):
        x = (np.uint64(seed) + (counters + np.uint64(1)) * np.uint64(GOLDEN))
        x = x ^ (x >> np.uint64(30))
        x = x * np.uint64(_MIX1)
        x = x ^ (x >> np.uint64(27))
        x = x * np.uint64(_MIX2)
        return x ^ (x >> np.uint64(31))


def uniforms_array(seed: int, counters: np.ndarray) -> np.ndarray:
    return (words_array(seed, counters) >> np.uint64(11)).astype(np.float64) / float(1 << 53)


def words_from_seeds(seeds: np.ndarray, counter: int) -> np.ndarray:
    """One word per element of a uint64 seed array (substream derivation)."""
    with np.errstate(over="ignore"):
        x = seeds + np.uint64(((counter + 1) * GOLDEN) & _MASK)
        x = x ^ (x >> np.uint64(30))
        x = x * np.uint64(_MIX1)
        x = x ^ (x >> np.uint64(27))
        x = x * np.uint64(_MIX2)
        return x ^ (x >> np.uint64(31))


def sample_without_replacement(n: int, k: int, seed: int) -> list[int]:
    """k distinct ints from [0, n), deterministic in seed, returned sorted.

    Partial Fisher-Yates over the index space; draw t swaps position t with
    t + (word mod remaining). The modulo bias is irrelevant here because the
    goal is reproducibility, not cryptographic uniformity.
    """
    if k < 0 or k > n:
        raise ValueError(f"cannot sample {k} of {n} without replacement")
    picks = {}
    out = []
    for t in range(k):
        r = t + word(seed, t) % (n - t)
        out.append(picks.get(r, r))
        picks[r] = picks.get(t, t)
    out.sort()
    return out
