"""Counter-based deterministic RNG.

Every random draw in the package comes from a Philox stream keyed by
(seed, block, chunk_index).  Streams are independent of execution order,
so chunked or threaded sampling reproduces bit-identically.
"""

from __future__ import annotations

import numpy as np


def _mix64(x: int) -> int:
    # splitmix64 finalizer
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return (z ^ (z >> 31)) & 0xFFFFFFFFFFFFFFFF


def keyed_generator(seed: int, block: int, index: int) -> np.random.Generator:
    k0 = _mix64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    k1 = _mix64(((int(block) & 0xFFFFFFFF) << 32) | (int(index) & 0xFFFFFFFF))
    bitgen = np.random.Philox(key=np.array([k0, k1], dtype=np.uint64))
    return np.random.Generator(bitgen)


def uniform_box(seed: int, block: int, index: int, n: int, dim: int,
                half: float) -> np.ndarray:
    """n uniform points in [-half, half]^dim from stream (seed, block, index)."""
    g = keyed_generator(seed, block, index)
    return g.uniform(-half, half, size=(n, dim))
