"""FNV-1a 64-bit hashing and the SplitMix64 generator.

Both are non-cryptographic. They exist to make variant selection
reproducible from an instructor secret, not to resist key recovery.
"""

from __future__ import annotations

from typing import MutableSequence

MASK64 = (1 << 64) - 1

FNV64_OFFSET = 14695981039346656037
FNV64_PRIME = 1099511628211

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
SEPARATOR = b"\x1f"


def fnv1a64(data: bytes) -> int:
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & MASK64
    return h


def derive_seed(secret: bytes, label: bytes) -> int:
    """FNV-1a over ``secret || 0x1F || label``."""
    if not secret:
        raise ValueError("exam secret must not be empty")
    return fnv1a64(secret + SEPARATOR + label)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


def shuffle(items: MutableSequence, rng: SplitMix64) -> None:
    """In-place Fisher-Yates, high index down to 1.

    ``j = next_u64 mod (i + 1)`` carries a modulo bias of at most
    (i + 1) / 2^64, negligible at classroom sizes; kept for reproducibility.
    """
    for i in range(len(items) - 1, 0, -1):
        j = rng.next_u64() % (i + 1)
        items[i], items[j] = items[j], items[i]
