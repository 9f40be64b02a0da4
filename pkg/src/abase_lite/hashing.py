"""Seedable 64-bit non-cryptographic hashing.

Integers go through the splitmix64 finalizer; strings and bytes are folded
with FNV-1a first. Both are portable and fixed, so placement decisions are
reproducible across runs and languages.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
HASH_SPACE = 1 << 64

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & MASK64
    return h


def hash64(key: int | str | bytes, seed: int = 0) -> int:
    """Hash ``key`` into ``[0, 2**64)``.

    The seed is mixed in before the finalizer, so different seeds give
    independent-looking mappings of the same key.
    """
    if isinstance(key, bool):
        raise TypeError("bool keys are ambiguous")
    if isinstance(key, int):
        base = key & MASK64
    elif isinstance(key, str):
        base = fnv1a64(key.encode("utf-8"))
    elif isinstance(key, (bytes, bytearray)):
        base = fnv1a64(bytes(key))
    else:
        raise TypeError(f"unhashable key type {type(key).__name__}")
    return splitmix64(base ^ splitmix64(seed & MASK64))


def unit_interval(key: int | str | bytes, seed: int = 0) -> float:
    """Map a key to a float in [0, 1) using the top 53 bits of its hash."""
    return (hash64(key, seed) >> 11) / float(1 << 53)


def splitmix64_array(x):
    """Vectorised :func:`splitmix64` over a uint64 array (wrapping arithmetic)."""
    x = np.asarray(x).astype(np.uint64) + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def hash64_array(keys, seed: int = 0):
    """:func:`hash64` for an array of non-negative integer keys."""
    k = np.asarray(keys)
    if k.dtype.kind not in "iu":
        raise TypeError("hash64_array takes integer keys")
    return splitmix64_array(k.astype(np.uint64) ^ np.uint64(splitmix64(seed & MASK64)))
