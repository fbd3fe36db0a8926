"""Seeded randomness, batch sampling, and center initialization.

Every random draw in the package flows through :class:`RandomStream`, a thin
wrapper over numpy's PCG64 generator seeded through ``SeedSequence``. For a
fixed numpy version the full draw sequence is reproducible across platforms:
bounded integers use the generator's documented rejection-based method, and
substreams are derived with ``SeedSequence`` spawn keys, which is numpy's
documented collision-resistant split. Replaying a run therefore only needs
the integer seed captured in its config.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ContractViolation
from .validation import as_points

__all__ = [
    "RandomStream",
    "Batch",
    "derive_run_seed",
    "sample_batch",
    "init_random",
    "init_kmeanspp",
]


class RandomStream:
    """Deterministic random source with named substreams.

    Parameters
    ----------
    seed : int
        Non-negative integer seed. Two streams built from the same seed and
        spawn key produce identical draw sequences.
    """

    def __init__(self, seed: int, _spawn_key: tuple = ()):
        seed = int(seed)
        if seed < 0:
            raise ContractViolation("seed must be a non-negative integer")
        self.seed = seed
        self.spawn_key = tuple(int(i) for i in _spawn_key)
        seq = np.random.SeedSequence(entropy=seed, spawn_key=self.spawn_key)
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def substream(self, index: int) -> "RandomStream":
        """Independent child stream for trial ``index``, reproducible by key."""
        if int(index) < 0:
            raise ContractViolation("substream index must be non-negative")
        return RandomStream(self.seed, self.spawn_key + (int(index),))

    def integers(self, n: int, size=None):
        """Uniform integers in [0, n) via the generator's unbiased bounded draw."""
        if int(n) <= 0:
            raise ContractViolation("integers() needs n >= 1")
        return self._gen.integers(0, int(n), size=size)

    def random(self, size=None):
        """Uniform floats in [0, 1)."""
        return self._gen.random(size)

    def normal(self, size=None):
        """Standard normal draws."""
        return self._gen.standard_normal(size)

    def choice_without_replacement(self, n: int, k: int) -> np.ndarray:
        """k distinct indices drawn uniformly from [0, n)."""
        if not 1 <= int(k) <= int(n):
            raise ContractViolation(f"need 1 <= k <= n, got k={k}, n={n}")
        return self._gen.choice(int(n), size=int(k), replace=False)

    def weighted_index(self, weights) -> int:
        """Index drawn with probability proportional to a non-negative weight.

        Zero-weight entries are never selected; the caller must supply at
        least one positive weight.
        """
        w = np.asarray(weights, dtype=np.float64)
        total = float(w.sum())
        if not total > 0.0:
            raise ContractViolation("weighted_index needs a positive total weight")
        u = float(self._gen.random()) * total
        cum = np.cumsum(w)
        idx = int(np.searchsorted(cum, u, side="right"))
        if idx >= w.shape[0]:  # u rounded up to the total weight
            idx = int(np.flatnonzero(w > 0)[-1])
        return idx


def derive_run_seed(seed: int, index: int) -> int:
    """Deterministic per-run seed for trial ``index`` under a master seed.

    Uses ``SeedSequence(seed, spawn_key=(index,))`` so distinct (seed, index)
    pairs cannot collide the way a plain XOR of the two values would.
    """
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return int(seq.generate_state(1, np.uint64)[0])


class Batch(NamedTuple):
    """A sampled mini-batch: dataset row indices plus the point rows."""

    indices: np.ndarray  # shape (b,), int64
    points: np.ndarray  # shape (b, d)


def sample_batch(dataset, b: int, rng: RandomStream) -> Batch:
    """Draw b points uniformly with repetitions, in draw order."""
    X = as_points(dataset, "dataset")
    if int(b) < 1:
        raise ContractViolation("batch size b must be at least 1")
    idx = np.asarray(rng.integers(X.shape[0], size=int(b)), dtype=np.int64)
    return Batch(indices=idx, points=X[idx])


def init_random(dataset, k: int, rng: RandomStream) -> np.ndarray:
    """k centers copied from k distinct dataset points chosen uniformly."""
    X = as_points(dataset, "dataset")
    if not 1 <= int(k) <= X.shape[0]:
        raise ContractViolation(f"need 1 <= k <= n, got k={k}, n={X.shape[0]}")
    idx = rng.choice_without_replacement(X.shape[0], int(k))
    return X[np.asarray(idx, dtype=np.int64)].copy()


def init_kmeanspp(dataset, k: int, rng: RandomStream) -> np.ndarray:
    """k-means++ seeding (D^2 weighting).

    The first center is uniform over the dataset; each later center is drawn
    with probability proportional to its current squared distance to the
    nearest chosen center. A point whose current distance is zero is never
    drawn while any positive-distance point remains. If every remaining
    distance is zero (duplicated data), the next center falls back to a
    uniform draw over the not-yet-chosen indices.
    """
    X = as_points(dataset, "dataset")
    n = X.shape[0]
    if not 1 <= int(k) <= n:
        raise ContractViolation(f"need 1 <= k <= n, got k={k}, n={n}")
    k = int(k)
    chosen = [int(rng.integers(n))]
    diff = X - X[chosen[0]]
    min_d2 = (diff * diff).sum(axis=1)
    for _ in range(1, k):
        total = float(min_d2.sum())
        if total > 0.0:
            nxt = rng.weighted_index(min_d2)
        else:
            pool = np.setdiff1d(np.arange(n), np.asarray(chosen, dtype=np.int64))
            nxt = int(pool[int(rng.integers(pool.shape[0]))])
        chosen.append(int(nxt))
        diff = X - X[nxt]
        min_d2 = np.minimum(min_d2, (diff * diff).sum(axis=1))
    return X[np.asarray(chosen, dtype=np.int64)].copy()
