"""SplitMix64-style keyed hashing.

Every piece of per-point and per-simplex randomness in the package is a pure
function of integer identities, so the scalar and the vectorised variants
below must agree bit for bit.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

SEED_KEY = 0x5EED5EED5EED5EED
SIMPLEX_KEY = 0x51A9_1E70_0C0F_FEE5
EXTRA_KEY = 0xE7A4_0B0B_1234_ABCD

_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def hash_words(key: int, *words: int) -> int:
    """Fold 64-bit words into a keyed hash."""
    h = mix64(key)
    for w in words:
        h = mix64(((h ^ (int(w) & MASK64)) + GOLDEN) & MASK64)
    return h


def to_unit(h: int) -> float:
    """Top 53 bits of a hash as a double in [0, 1)."""
    return (h >> 11) * _INV_2_53


def point_seed(master_seed: int, replication: int, point_id: int) -> int:
    return hash_words(SEED_KEY, master_seed, replication, point_id)


# numpy variants -------------------------------------------------------------

_U = np.uint64


def mix64_np(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> _U(30)
        z *= _U(_M1)
        z ^= z >> _U(27)
        z *= _U(_M2)
        z ^= z >> _U(31)
    return z


def hash_rows_np(key: int, words: np.ndarray) -> np.ndarray:
    """Row-wise ``hash_words(key, *row)`` for a 2-d uint64 array."""
    words = np.asarray(words, dtype=np.uint64)
    h = np.full(words.shape[0], mix64(key), dtype=np.uint64)
    with np.errstate(over="ignore"):
        for col in range(words.shape[1]):
            h = mix64_np((h ^ words[:, col]) + _U(GOLDEN))
    return h


def point_seeds_np(master_seed: int, replication: int, ids: np.ndarray) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.uint64)
    words = np.empty((len(ids), 3), dtype=np.uint64)
    words[:, 0] = master_seed & MASK64
    words[:, 1] = replication & MASK64
    words[:, 2] = ids
    return hash_rows_np(SEED_KEY, words)


def to_unit_np(h: np.ndarray) -> np.ndarray:
    return (h >> _U(11)).astype(np.float64) * _INV_2_53
