"""Independent reference implementations used to cross-check the library.

``naive_cost`` re-derives the clustering cost with plain Python floats and
loops, sharing no code with :mod:`mbk.geometry`. ``brute_force_optimal``
certifies the global optimum on tiny instances by enumerating every possible
label assignment. Both exist so the fast paths can be tested against an
implementation that cannot share their bugs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContractViolation

#: enumeration refusal threshold: k**n must stay at or below this
MAX_ENUMERATION = 5_000_000

_MAX_POINTS = 14
_MAX_DIM = 4
_MAX_K = 3

_BLOCK = 1 << 16


@dataclass(frozen=True)
class TinyInstance:
    """A problem small enough for exhaustive search (n <= 14, d <= 4, k <= 3)."""

    points: tuple
    k: int

    def __post_init__(self):
        arr = np.asarray(self.points, dtype=np.float64)
        _check_enumerable(arr, self.k)


def _check_enumerable(X: np.ndarray, k: int) -> None:
    if X.ndim != 2 or X.shape[0] == 0:
        raise ContractViolation("instance must be a non-empty 2-d point array")
    n, d = X.shape
    if not (1 <= k <= _MAX_K):
        raise ContractViolation(f"k={k} outside the enumerable range 1..{_MAX_K}")
    if n > _MAX_POINTS or d > _MAX_DIM:
        raise ContractViolation(
            f"instance too large for exhaustive search (n={n} <= {_MAX_POINTS}, d={d} <= {_MAX_DIM})"
        )
    if k**n > MAX_ENUMERATION:
        raise ContractViolation(
            f"k^n = {k**n} exceeds the enumeration budget of {MAX_ENUMERATION}"
        )


def naive_cost(points, centers) -> float:
    """Mean nearest-center squared distance, recomputed the slow way.

    Pure Python arithmetic, one explicit loop per point and per center, so the
    result is an independent check on the vectorized cost.
    """
    pts = [list(map(float, p)) for p in np.asarray(points, dtype=np.float64)]
    cts = [list(map(float, c)) for c in np.asarray(centers, dtype=np.float64)]
    if not pts:
        raise ContractViolation("naive_cost needs at least one point")
    if not cts:
        raise ContractViolation("naive_cost needs at least one center")
    d = len(pts[0])
    if any(len(c) != d for c in cts):
        raise ContractViolation("dimension mismatch between points and centers")
    total = 0.0
    for p in pts:
        best = None
        for c in cts:
            acc = 0.0
            for pi, ci in zip(p, c):
                diff = pi - ci
                acc += diff * diff
            if best is None or acc < best:
                best = acc
        total += best
    return total / len(pts)


def _exact_partition_cost(pts: list[list[float]], labels, k: int) -> float:
    """Unnormalized cost of one labeling, pure Python, centroid centers."""
    d = len(pts[0])
    total = 0.0
    for j in range(k):
        members = [p for p, lab in zip(pts, labels) if lab == j]
        if not members:
            continue
        mean = [sum(p[t] for p in members) / len(members) for t in range(d)]
        for p in members:
            for t in range(d):
                diff = p[t] - mean[t]
                total += diff * diff
    return total


class BruteForceResult(NamedTuple):
    cost: float  # optimal normalized cost (mean over points)
    labels: tuple  # one optimal label per point, values in 0..k-1


def brute_force_optimal(points, k: int) -> BruteForceResult:
    """Globally optimal normalized cost over all k^n label assignments.

    Every labeling is scored with its clusters' centroids as centers (the
    best centers for a fixed partition); empty clusters are allowed and
    contribute nothing. Enumeration is refused beyond n=14, d=4, k=3 or
    k^n > 5e6. Candidates within a small window of the vectorized minimum
    are re-scored in exact Python arithmetic before the winner is reported,
    so the certified value does not inherit float cancellation from the
    fast scan.
    """
    X = np.asarray(points, dtype=np.float64)
    _check_enumerable(X, k)
    n, d = X.shape
    total_sq = float((X * X).sum())
    n_assignments = k**n
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)

    best_fast = np.inf
    # first pass: vectorized scan for the minimum of the fast cost form
    for start in range(0, n_assignments, _BLOCK):
        idx = np.arange(start, min(start + _BLOCK, n_assignments), dtype=np.int64)
        labels = (idx[:, None] // powers) % k  # (B, n)
        onehot = (labels[:, :, None] == np.arange(k)).astype(np.float64)  # (B, n, k)
        counts = onehot.sum(axis=1)  # (B, k)
        sums = np.einsum("bnk,nd->bkd", onehot, X)  # (B, k, d)
        norm2 = (sums * sums).sum(axis=2)  # (B, k)
        explained = np.divide(
            norm2, counts, out=np.zeros_like(norm2), where=counts > 0
        ).sum(axis=1)
        block_min = (total_sq - explained).min()
        if block_min < best_fast:
            best_fast = float(block_min)

    # second pass: exact re-scoring of everything close to the fast minimum
    slack = 1e-9 * max(1.0, total_sq)
    pts = [list(map(float, p)) for p in X]
    best_cost = None
    best_labels = None
    for start in range(0, n_assignments, _BLOCK):
        idx = np.arange(start, min(start + _BLOCK, n_assignments), dtype=np.int64)
        labels = (idx[:, None] // powers) % k
        onehot = (labels[:, :, None] == np.arange(k)).astype(np.float64)
        counts = onehot.sum(axis=1)
        sums = np.einsum("bnk,nd->bkd", onehot, X)
        norm2 = (sums * sums).sum(axis=2)
        explained = np.divide(
            norm2, counts, out=np.zeros_like(norm2), where=counts > 0
        ).sum(axis=1)
        fast = total_sq - explained
        for row in np.flatnonzero(fast <= best_fast + slack):
            cand = tuple(int(v) for v in labels[row])
            exact = _exact_partition_cost(pts, cand, k)
            if best_cost is None or exact < best_cost:
                best_cost = exact
                best_labels = cand
    return BruteForceResult(cost=best_cost / n, labels=best_labels)
