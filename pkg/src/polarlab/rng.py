"""Counter-based random streams.

Every random draw in the library comes from a Philox generator keyed by
(seed, path...), so a trial/restart can be regenerated in isolation and
parallel execution order cannot change any result.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
# Fibonacci hashing constant (2^64 / golden ratio), used to mix path indices.
_MIX = 0x9E3779B97F4A7C15


def _mix_path(path: tuple[int, ...]) -> int:
    acc = 0
    for part in path:
        acc = (acc ^ ((int(part) + 1) * _MIX)) & _MASK64
        acc = (acc * 0xBF58476D1CE4E5B9) & _MASK64
    return acc


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Generator keyed by ``(seed, *path)``; identical inputs give identical streams."""
    key = [int(seed) & _MASK64, _mix_path(path)]
    return np.random.Generator(np.random.Philox(key=key))


def unit_vectors(seed: int, n: int, d: int, *path: int) -> np.ndarray:
    """n iid uniform points on the (d-1)-sphere from the keyed stream."""
    gen = rng_for(seed, *path)
    raw = gen.standard_normal((n, d))
    norms = np.linalg.norm(raw, axis=1)
    # A zero draw has probability 0; guard anyway so the contract is total.
    bad = norms < 1e-300
    if np.any(bad):
        raw[bad] = 1.0
        norms = np.linalg.norm(raw, axis=1)
    return raw / norms[:, None]
