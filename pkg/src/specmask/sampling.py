"""Seeded sampling primitives shared by every masking strategy.

All randomness in the package flows through :class:`SeededRng`, a thin wrapper
over the PCG64 bit generator that only ever emits uniform doubles in [0, 1).
Selection logic is built on top of those doubles, so a fixed seed yields the
same index sets on every platform and backend.
"""

from __future__ import annotations

import numpy as np

from .errors import AllWeightsZero, KTooLarge

_MASK64 = (1 << 64) - 1


class SeededRng:
    """Deterministic uniform source; single-owner, not thread-safe."""

    algorithm_id = "pcg64"

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def doubles(self, n: int) -> np.ndarray:
        """Next ``n`` uniform doubles in [0, 1)."""
        return self._gen.random(int(n))


def derive_seed(base_seed: int, index: int) -> int:
    """Mix a base seed with a work-item index (SplitMix64 finalizer).

    Used to hand every item of a batch its own independent stream.
    """
    z = (int(base_seed) + 0x9E3779B97F4A7C15 * (int(index) + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _as_universe(universe) -> np.ndarray:
    arr = np.unique(np.asarray(list(universe) if not isinstance(universe, np.ndarray) else universe, dtype=np.int64))
    return arr


def sample_uniform(universe, k: int, rng: SeededRng) -> np.ndarray:
    """Uniformly random k-subset of ``universe``, returned sorted.

    Every k-subset is equally probable: each element gets an independent
    uniform key and the k smallest keys win. Consumes ``len(universe)``
    doubles (none when k == 0).
    """
    uni = _as_universe(universe)
    k = int(k)
    if k > uni.size:
        raise KTooLarge(f"k={k} exceeds universe size {uni.size}")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    keys = rng.doubles(uni.size)
    order = np.argsort(keys, kind="stable")
    return np.sort(uni[order[:k]])


def sample_weighted(weights, k: int, rng: SeededRng) -> np.ndarray:
    """k distinct indices, drawn without replacement proportionally to weight.

    Successive-draws semantics: each draw picks index i with probability
    w_i over the total weight still in play. Implemented with exponential
    keys (-log(u_i) / w_i, keep the k smallest), which is equivalent to the
    sequential roulette wheel but needs a single pass. Ties break toward the
    lower index. Zero-weight entries are only unreachable, not invalid.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError("weights must be one-dimensional")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite and non-negative")
    k = int(k)
    if k > w.size:
        raise KTooLarge(f"k={k} exceeds number of weights {w.size}")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    if int(np.count_nonzero(w > 0)) < k:
        raise AllWeightsZero(f"fewer than k={k} weights are strictly positive")
    u = rng.doubles(w.size)
    with np.errstate(divide="ignore"):
        keys = -np.log(u) / w
    order = np.argsort(keys, kind="stable")
    return np.sort(order[:k])
