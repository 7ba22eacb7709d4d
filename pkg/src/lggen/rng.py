"""Seeded, portable randomness.

All sampling in this package draws from the Mersenne Twister via
``random.Random(seed).getrandbits`` plus explicit rejection sampling and an
explicit Fisher-Yates shuffle. The MT bit stream for a given seed is stable
across platforms and CPython versions, and by owning the integer-range and
shuffle constructions we do not depend on stdlib distribution details that
have historically changed between versions. Same seed, same draws, forever.
"""

from __future__ import annotations

import hashlib
import random


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


def randbelow(rng: random.Random, n: int) -> int:
    """Uniform integer in [0, n) by rejection over getrandbits."""
    if n <= 0:
        raise ValueError("randbelow needs a positive bound")
    k = n.bit_length()
    r = rng.getrandbits(k)
    while r >= n:
        r = rng.getrandbits(k)
    return r


def shuffle(rng: random.Random, items: list) -> None:
    """In-place Fisher-Yates."""
    for i in range(len(items) - 1, 0, -1):
        j = randbelow(rng, i + 1)
        items[i], items[j] = items[j], items[i]


def derive_seed(seed: int, *labels: str) -> int:
    """Stable per-purpose sub-seed: sha256 over the seed and label strings."""
    h = hashlib.sha256()
    h.update(str(seed).encode())
    for label in labels:
        h.update(b"\x00" + label.encode())
    return int.from_bytes(h.digest()[:8], "big")
