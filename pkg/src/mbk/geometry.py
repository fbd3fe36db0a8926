"""Squared-distance geometry on the unit box.

Conventions used throughout the package:

* a point is a 1-d float64 vector, a point set is a 2-d array of shape (n, d)
* distances are *squared* Euclidean unless a name says otherwise
* the clustering cost of centers C on a set A is the mean, over A, of the
  squared distance from each point to its nearest center; on [0, 1]^d this
  cost never exceeds d
* reductions use numpy's deterministic order, so repeated calls on the same
  inputs are bit-identical
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ContractViolation, EmptyClusterError
from .validation import as_point, as_points, check_same_dim


class Assignment(NamedTuple):
    """Nearest-center assignment: per-point labels plus per-center sizes."""

    labels: np.ndarray  # shape (n,), int64
    counts: np.ndarray  # shape (k,), int64


def squared_distance(x, y) -> float:
    """Squared Euclidean distance between two points."""
    x = as_point(x, "x")
    y = as_point(y, "y")
    check_same_dim(x, y, "x", "y")
    diff = x - y
    return float(diff @ diff)


def delta_set(S, c) -> float:
    """Sum of squared distances from every point of S to the point c.

    S may contain repeated points; each occurrence counts. An empty S
    contributes 0.
    """
    S = as_points(S, "S", allow_empty=True)
    if S.shape[0] == 0:
        return 0.0
    c = as_point(c, "c")
    check_same_dim(S, c, "S", "c")
    diff = S - c
    return float((diff * diff).sum())


def center_of_mass(S) -> np.ndarray:
    """Coordinate-wise mean of a non-empty point set."""
    S = as_points(S, "S", allow_empty=True)
    if S.shape[0] == 0:
        raise EmptyClusterError("center_of_mass of an empty set is undefined")
    return S.mean(axis=0)


def pairwise_squared_distances(points, centers) -> np.ndarray:
    """Matrix of squared distances, shape (n, k).

    Computed from explicit coordinate differences (not the expanded
    dot-product form) so values are exact for exact ties and never negative.
    """
    P = as_points(points, "points", allow_empty=True)
    C = as_points(centers, "centers")
    if P.shape[0] == 0:
        return np.zeros((0, C.shape[0]))
    check_same_dim(P, C, "points", "centers")
    diff = P[:, None, :] - C[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def assign(points, centers) -> Assignment:
    """Assign each point to its nearest center, smallest index winning ties."""
    C = as_points(centers, "centers")
    d2 = pairwise_squared_distances(points, C)
    labels = d2.argmin(axis=1).astype(np.int64)
    counts = np.bincount(labels, minlength=C.shape[0]).astype(np.int64)
    return Assignment(labels=labels, counts=counts)


def cost(points, centers) -> float:
    """Mean squared distance from each point to its nearest center.

    Requires a non-empty point set.
    """
    P = as_points(points, "points")
    d2 = pairwise_squared_distances(P, centers)
    return float(d2.min(axis=1).mean())


def center_movement(old_centers, new_centers) -> float:
    """Total squared displacement between two center tuples of equal shape."""
    A = as_points(old_centers, "old_centers")
    B = as_points(new_centers, "new_centers")
    if A.shape != B.shape:
        raise ContractViolation(
            f"center tuples must have equal shape, got {A.shape} vs {B.shape}"
        )
    diff = A - B
    return float((diff * diff).sum())
