"""Counter-based (stateless) random bits.

Every random quantity in the package is a pure function of a 64-bit seed, a
domain tag and integer coordinates, so results never depend on evaluation
order, chunking or parallelism.

The mixing function is the SplitMix64 finalizer::

    mix64(z):
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        return z ^ (z >> 31)

(all arithmetic modulo 2**64).  A coordinate tuple ``(n, y, x)`` is hashed as::

    key = mix64(seed + (domain + 1) * 0x9E3779B97F4A7C15)
    h   = mix64(mix64(mix64(key ^ n) ^ y) ^ x)

and a random bit is ``h & 1``.  ``x`` is the column, ``y`` the row.  Uniform
doubles use the top 53 bits of ``h``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# domain tags; keep stable, they are part of the reproducibility contract
PATTERN = 0
KEY_ORIENT = 1
PATTERN_ORIENT = 2
SHUFFLE = 3
NOISE = 4


def _u64(value) -> np.ndarray:
    return np.asarray(value, dtype=np.uint64)


def mix64(z) -> np.ndarray:
    z = _u64(z)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def stream_key(seed: int, domain: int) -> np.ndarray:
    return mix64((check_seed(seed) + (domain + 1) * GOLDEN) & MASK64)


def hash_grid(seed: int, domain: int, n, height: int, width: int) -> np.ndarray:
    """Hashes for every ``(n, y, x)``; shape ``(len(n), height, width)``."""
    n = _u64(np.atleast_1d(n))
    key = stream_key(seed, domain)
    hn = mix64(key ^ n)[:, None, None]
    y = _u64(np.arange(height))[None, :, None]
    x = _u64(np.arange(width))[None, None, :]
    hy = mix64(hn ^ y)
    return mix64(hy ^ x)


def bit_grid(seed: int, domain: int, n, height: int, width: int) -> np.ndarray:
    return (hash_grid(seed, domain, n, height, width) & np.uint64(1)).astype(np.uint8)


def uniform(h: np.ndarray) -> np.ndarray:
    """Map hashes to doubles in (0, 1]."""
    return ((h >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def standard_normal(seed: int, domain: int, n) -> np.ndarray:
    """One N(0, 1) draw per counter value ``n`` (Box-Muller on two hashes)."""
    h = hash_grid(seed, domain, n, 1, 2)[:, 0, :]
    u1 = uniform(h[:, 0])
    u2 = uniform(h[:, 1])
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
