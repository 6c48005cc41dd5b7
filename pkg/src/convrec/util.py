"""Small numeric helpers: stable hashing, softmax, seeded RNG streams."""

from __future__ import annotations

import numpy as np

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

# exp() underflows to zero below roughly -745; clipping shifted logits here
# keeps every softmax component strictly positive in float64
_LOGIT_FLOOR = -700.0


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash; platform-independent by construction."""
    h = FNV64_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV64_PRIME) & _MASK64
    return h


def stable_hash(text: str) -> int:
    return fnv1a64(text.encode("utf-8"))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax; output entries are strictly inside (0, 1)."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    z = np.maximum(z, _LOGIT_FLOOR)
    e = np.exp(z)
    return e / e.sum()


def rng_stream(seed: int, name: str) -> np.random.Generator:
    """Named deterministic RNG stream derived from a base seed."""
    return np.random.default_rng(np.random.SeedSequence([seed & _MASK64, stable_hash(name)]))
