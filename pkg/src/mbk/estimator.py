"""Scikit-learn compatible estimator wrapping the engine."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .analysis import recommended_batch_size
from .engine import RunConfig, run
from .errors import ContractViolation
from .geometry import assign, cost, pairwise_squared_distances
from .validation import as_points, check_unit_box


class MiniBatchKMeans(ClusterMixin, TransformerMixin, BaseEstimator):
    """Mini-batch k-means with early stopping, for data inside [0, 1]^d.

    The fit is a single seeded engine run; the full per-iteration trace is
    kept on ``trace_``. Data outside the unit box is rejected rather than
    silently rescaled (compose with ``MinMaxScaler`` when needed).

    Parameters
    ----------
    n_clusters : int, default=8
        Number of centers.
    batch_size : int or None, default=None
        Points sampled per iteration (with repetitions). ``None`` takes the
        planner's ``main``-regime recommendation for (n, k, d, tol), capped
        at n with a warning when the recommendation is larger.
    tol : float, default=1e-3
        Stopping threshold (strict) for the configured stopping rule.
    learning_rate : str, default="paper"
        ``paper``, ``sklearn``, or ``const:<c>``; see :mod:`mbk.engine`.
    stopping : str, default="improve"
        ``improve`` (batch-cost drop) or ``move`` (total squared center
        movement).
    init : str, default="kmeanspp"
        ``kmeanspp`` or ``random``.
    max_iter : int or None, default=None
        Iteration cap; ``None`` resolves to ``10 * ceil(d / tol)``.
    random_state : int or None, default=0
        Seed for init and batch sampling; ``None`` behaves as 0. Fits with
        equal seeds are bit-identical.
    audit_global_cost : bool, default=False
        Record the full-data cost each iteration (adds O(n k) per iteration).
    record_cbar_dist : bool, default=False
        Record the per-center distance to the hypothetical full-data update.

    Attributes
    ----------
    cluster_centers_ : ndarray of shape (n_clusters, d)
    labels_ : ndarray of shape (n,)
        Nearest-center label of each training point under the final centers.
    inertia_ : float
        Sum of squared distances to nearest centers on the training data
        (scikit-learn's convention; the engine's cost is this divided by n).
    n_iter_ : int
    trace_ : RunTrace
        Full iteration record of the fit.
    """

    def __init__(
        self,
        n_clusters=8,
        batch_size=None,
        tol=1e-3,
        learning_rate="paper",
        stopping="improve",
        init="kmeanspp",
        max_iter=None,
        random_state=0,
        audit_global_cost=False,
        record_cbar_dist=False,
    ):
        self.n_clusters = n_clusters
        self.batch_size = batch_size
        self.tol = tol
        self.learning_rate = learning_rate
        self.stopping = stopping
        self.init = init
        self.max_iter = max_iter
        self.random_state = random_state
        self.audit_global_cost = audit_global_cost
        self.record_cbar_dist = record_cbar_dist

    def _validate_X(self, X, for_fit):
        X = as_points(X, "X", allow_empty=not for_fit)
        check_unit_box(X, "X")
        if not for_fit:
            if X.shape[0] and X.shape[1] != self.n_features_in_:
                raise ContractViolation(
                    f"X has {X.shape[1]} features; the fit saw {self.n_features_in_}"
                )
        return X

    def fit(self, X, y=None):
        """Run mini-batch k-means on X and keep the trace."""
        X = self._validate_X(X, for_fit=True)
        n, d = X.shape
        b = self.batch_size
        if b is None:
            rec = recommended_batch_size(
                "main", n=n, k=self.n_clusters, d=d, eps=self.tol
            )
            b = rec.b
            if rec.exceeds_n:
                warnings.warn(
                    f"recommended batch size {rec.b} exceeds n={n}; capping at n",
                    stacklevel=2,
                )
                b = n
        config = RunConfig(
            k=self.n_clusters,
            b=int(b),
            eps=float(self.tol),
            rate=self.learning_rate,
            stop=self.stopping,
            init=self.init,
            seed=0 if self.random_state is None else int(self.random_state),
            max_iter_cap=self.max_iter,
            audit_global_cost=self.audit_global_cost,
            record_cbar_dist=self.record_cbar_dist,
        )
        trace = run(X, config)
        self.trace_ = trace
        self.cluster_centers_ = trace.final_centers
        self.labels_ = assign(X, trace.final_centers).labels
        self.inertia_ = float(n * cost(X, trace.final_centers))
        self.n_iter_ = len(trace.iterations)
        self.n_features_in_ = d
        return self

    def _check_fitted(self):
        if not hasattr(self, "cluster_centers_"):
            raise NotFittedError("this MiniBatchKMeans instance is not fitted yet")

    def predict(self, X):
        """Nearest-center label for each point of X."""
        self._check_fitted()
        X = self._validate_X(X, for_fit=False)
        return assign(X, self.cluster_centers_).labels

    def transform(self, X):
        """Euclidean distances from each point to every center, shape (n, k)."""
        self._check_fitted()
        X = self._validate_X(X, for_fit=False)
        return np.sqrt(pairwise_squared_distances(X, self.cluster_centers_))

    def score(self, X, y=None):
        """Negative sum of squared distances to nearest centers (higher is better)."""
        self._check_fitted()
        X = self._validate_X(X, for_fit=True)
        return -float(X.shape[0] * cost(X, self.cluster_centers_))
