"""Input validation helpers.

All public entry points funnel array-likes through these checks so the
numeric core can assume clean float64 arrays.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation


def as_point(x, name: str = "point") -> np.ndarray:
    """Coerce to a finite 1-d float64 vector."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1 or a.shape[0] == 0:
        raise ContractViolation(f"{name} must be a non-empty 1-d vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractViolation(f"{name} contains non-finite values")
    return a


def as_points(X, name: str = "X", allow_empty: bool = False) -> np.ndarray:
    """Coerce to a finite 2-d float64 array of shape (n, d)."""
    a = np.asarray(X, dtype=np.float64)
    if a.ndim == 1 and a.shape[0] == 0 and allow_empty:
        return a.reshape(0, 0)
    if a.ndim != 2:
        raise ContractViolation(f"{name} must be 2-d (n points x d coords), got shape {a.shape}")
    if a.shape[0] == 0 and not allow_empty:
        raise ContractViolation(f"{name} must contain at least one point")
    if a.shape[0] > 0 and a.shape[1] == 0:
        raise ContractViolation(f"{name} must have at least one coordinate")
    if not np.all(np.isfinite(a)):
        raise ContractViolation(f"{name} contains non-finite values")
    return a


def check_unit_box(X: np.ndarray, name: str = "X") -> np.ndarray:
    """Require every coordinate to lie in [0, 1]."""
    if X.size and (X.min() < 0.0 or X.max() > 1.0):
        raise ContractViolation(
            f"{name} must lie in the unit box [0, 1]^d; "
            f"rescale the data first (for CSV input pass normalize=True)"
        )
    return X


def check_same_dim(a: np.ndarray, b: np.ndarray, name_a: str = "a", name_b: str = "b") -> None:
    """Require matching coordinate dimension on the last axis."""
    if a.shape[-1] != b.shape[-1]:
        raise ContractViolation(
            f"dimension mismatch: {name_a} has d={a.shape[-1]} but {name_b} has d={b.shape[-1]}"
        )
