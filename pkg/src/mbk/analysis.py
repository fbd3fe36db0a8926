"""Batch-size planning and empirical audits of the engine's guarantees.

The audits re-measure, on recorded traces, the inequalities the algorithm
is designed around:

* global progress: while the run continues, the full-data cost should drop
  by at least eps/5 per iteration (eps/2 in full-batch settings)
* center proximity: each realized new center should stay within
  eps / (10 sqrt(d)) of the center the same rates would produce from the
  full dataset (recorded as ``cbar_dist``)
* movement-to-improvement implication: under the ``paper`` rate, any
  iteration that moves centers by more than eps must also improve the batch
  cost by more than eps^1.5 / sqrt(k d)
* concentration: the batch cost of fixed centers deviates from the full
  cost by delta with frequency at most 2 exp(-2 b delta^2 / d^2)

The first two hold with high probability at the recommended batch sizes, so
their audits take a violation budget; the implication is deterministic and
allows none.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .engine import IterationRecord, RunConfig, RunTrace, update_centers
from .errors import ContractViolation, MissingTraceData
from .geometry import assign, cost, pairwise_squared_distances
from .sampling import RandomStream
from .validation import as_points, check_same_dim

__all__ = [
    "REGIMES",
    "BatchSizeRecommendation",
    "recommended_batch_size",
    "termination_bound",
    "hypothetical_full_update",
    "AuditCheck",
    "AuditReport",
    "audit_global_progress",
    "audit_center_proximity",
    "audit_sklearn_implication",
    "audit_concentration",
]

#: supported batch-size regimes:
#: ``main`` needs the standard convex update; ``warmup`` holds for any
#: update rule that stays in the unit box; ``sklearn`` re-targets ``main``
#: at the movement threshold that the improvement threshold implies.
REGIMES = ("main", "warmup", "sklearn")


@dataclass(frozen=True)
class BatchSizeRecommendation:
    """A recommended batch size together with the inputs that produced it."""

    regime: str
    b: int
    n: int
    k: int
    d: int
    eps: float
    c: float
    exceeds_n: bool  # warning flag: the recommendation is larger than the dataset


def _check_planner_inputs(n: int, k: int, d: int, eps: float, c: float) -> None:
    if min(int(n), int(k), int(d)) < 1:
        raise ContractViolation("n, k and d must be positive integers")
    if not eps > 0.0:
        raise ContractViolation(f"eps must be positive, got {eps}")
    if eps > d:
        raise ContractViolation(
            f"eps={eps} exceeds d={d}; the cost itself is bounded by d, so any run stops immediately"
        )
    if not c > 0.0:
        raise ContractViolation(f"scale constant c must be positive, got {c}")


def recommended_batch_size(
    regime: str,
    n: int,
    k: int,
    d: int,
    eps: float,
    c: float = 1.0,
    c_t: float = 10.0,
) -> BatchSizeRecommendation:
    """Batch size sufficient for the guarantees of the chosen regime.

    * ``main``:    b = ceil(c * (d/eps)^2 * ln(n k d / eps))
    * ``warmup``:  b = ceil(c * (d/eps)^2 * (k d + ln(n t))),
      with t = ceil(c_t * d / eps) the iteration budget being insured
    * ``sklearn``: the ``main`` formula evaluated at
      eps' = eps^1.5 / sqrt(k d), the movement level that matters under a
      movement-based stop
    """
    _check_planner_inputs(n, k, d, eps, c)
    n, k, d = int(n), int(k), int(d)
    if regime == "main":
        raw = c * (d / eps) ** 2 * math.log(n * k * d / eps)
    elif regime == "warmup":
        t = math.ceil(c_t * d / eps)
        raw = c * (d / eps) ** 2 * (k * d + math.log(n * t))
    elif regime == "sklearn":
        eps_eff = eps**1.5 / math.sqrt(k * d)
        raw = c * (d / eps_eff) ** 2 * math.log(n * k * d / eps_eff)
    else:
        raise ContractViolation(f"unknown regime {regime!r}; expected one of {REGIMES}")
    b = max(1, math.ceil(raw))
    return BatchSizeRecommendation(
        regime=regime, b=b, n=n, k=k, d=d, eps=float(eps), c=float(c), exceeds_n=b > n
    )


def termination_bound(
    d: int,
    eps: float,
    c_t: float = 10.0,
    regime: str = "main",
    k: Optional[int] = None,
) -> int:
    """Iteration budget: ceil(c_t * d / eps).

    Under the ``sklearn`` regime (movement-based stopping) the budget is
    ceil(c_t * (d/eps)^1.5 * sqrt(k)), which needs ``k``.
    """
    if int(d) < 1 or not eps > 0.0 or not c_t > 0.0:
        raise ContractViolation("d, eps and c_t must be positive")
    if regime == "sklearn":
        if k is None or int(k) < 1:
            raise ContractViolation("the sklearn-regime bound needs k >= 1")
        return math.ceil(c_t * (d / eps) ** 1.5 * math.sqrt(int(k)))
    if regime not in REGIMES:
        raise ContractViolation(f"unknown regime {regime!r}; expected one of {REGIMES}")
    return math.ceil(c_t * d / eps)


def hypothetical_full_update(centers, dataset, alphas) -> np.ndarray:
    """Centers the same rates would produce from the full dataset.

    Partitions the whole dataset by the given centers and applies the convex
    update with the supplied per-center rates. A positive rate for a center
    whose full-data part is empty is a contract violation (a batch cannot
    contain points of an empty full-data cluster).
    """
    C = as_points(centers, "centers")
    X = as_points(dataset, "dataset")
    check_same_dim(X, C, "dataset", "centers")
    a = assign(X, C)
    parts = [X[a.labels == j] for j in range(C.shape[0])]
    return update_centers(C, parts, alphas)


# ---------------------------------------------------------------------------
# audits


@dataclass(frozen=True)
class AuditCheck:
    """Outcome of one audit over one trace or sampling experiment.

    ``worst_margin`` is check-specific (documented per audit function);
    ``budget`` is the allowed violation fraction.
    """

    name: str
    total: int
    violations: int
    worst_margin: float
    passed: bool
    budget: float
    note: str = ""

    @property
    def violation_fraction(self) -> float:
        return self.violations / self.total if self.total else 0.0


@dataclass(frozen=True)
class AuditReport:
    """A bundle of audit checks; passes only if every check passed."""

    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"checks": [asdict(c) for c in self.checks], "passed": self.passed}


def _global_cost_series(trace: RunTrace) -> list:
    costs = [rec.global_cost for rec in trace.iterations]
    if any(g is None for g in costs) or trace.final_global_cost is None:
        raise MissingTraceData(
            "trace lacks per-iteration global costs; rerun with audit_global_cost=True"
        )
    return costs + [trace.final_global_cost]


def audit_global_progress(
    trace: RunTrace,
    eps: Optional[float] = None,
    divisor: float = 5.0,
    slack: float = 1e-9,
    budget: float = 0.05,
) -> AuditCheck:
    """Check the per-iteration drop in full-data cost on non-final iterations.

    Every iteration except the stopping one should satisfy
    ``cost(C_i) - cost(C_{i+1}) >= eps / divisor`` up to ``slack``.
    ``worst_margin`` is the smallest ``measured - required`` (negative means
    a shortfall); a single-iteration trace has no events and passes
    vacuously.
    """
    if eps is None:
        if not isinstance(trace.config, RunConfig):
            raise ContractViolation("pass eps explicitly for non-engine traces")
        eps = trace.config.eps
    series = _global_cost_series(trace)
    required = eps / divisor
    margins = [
        (series[i] - series[i + 1]) - required for i in range(len(trace.iterations) - 1)
    ]
    violations = sum(1 for m in margins if m < -slack)
    total = len(margins)
    frac = violations / total if total else 0.0
    return AuditCheck(
        name="global_progress",
        total=total,
        violations=violations,
        worst_margin=min(margins) if margins else 0.0,
        passed=frac <= budget,
        budget=budget,
        note=f"required drop {required!r} per non-final iteration, slack {slack!r}",
    )


def audit_center_proximity(
    trace: RunTrace,
    eps: Optional[float] = None,
    d: Optional[int] = None,
    budget: float = 0.05,
) -> AuditCheck:
    """Check recorded ``cbar_dist`` values against eps / (10 sqrt(d)).

    Events are all (iteration, center) pairs. ``worst_margin`` is the largest
    distance-to-bound ratio observed (1.0 sits exactly on the bound).
    """
    if eps is None:
        if not isinstance(trace.config, RunConfig):
            raise ContractViolation("pass eps explicitly for non-engine traces")
        eps = trace.config.eps
    if d is None:
        d = int(np.asarray(trace.init_centers).shape[1])
    if any(rec.cbar_dist is None for rec in trace.iterations):
        raise MissingTraceData(
            "trace lacks cbar_dist records; rerun with record_cbar_dist=True"
        )
    bound = eps / (10.0 * math.sqrt(d))
    dists = [v for rec in trace.iterations for v in rec.cbar_dist]
    violations = sum(1 for v in dists if v > bound)
    total = len(dists)
    frac = violations / total if total else 0.0
    return AuditCheck(
        name="center_proximity",
        total=total,
        violations=violations,
        worst_margin=max((v / bound for v in dists), default=0.0),
        passed=frac <= budget,
        budget=budget,
        note=f"bound {bound!r}; worst_margin is max dist/bound",
    )


def audit_sklearn_implication(
    trace: RunTrace,
    eps: Optional[float] = None,
    k: Optional[int] = None,
    d: Optional[int] = None,
    slack: float = 1e-12,
) -> AuditCheck:
    """Movement above eps must come with improvement above eps^1.5/sqrt(k d).

    Deterministic consequence of the ``paper`` learning rate, so the budget
    is zero: one violation fails the check. ``worst_margin`` is the smallest
    ``improvement - threshold`` across checked iterations.
    """
    if not isinstance(trace.config, RunConfig) or trace.config.rate != "paper":
        raise ContractViolation(
            "the implication only holds under the 'paper' learning rate"
        )
    if eps is None:
        eps = trace.config.eps
    if k is None:
        k = trace.config.k
    if d is None:
        d = int(np.asarray(trace.init_centers).shape[1])
    threshold = eps**1.5 / math.sqrt(k * d)
    events = [rec for rec in trace.iterations if rec.movement > eps]
    margins = [rec.local_improvement - threshold for rec in events]
    violations = sum(1 for m in margins if m <= -slack)
    return AuditCheck(
        name="sklearn_implication",
        total=len(events),
        violations=violations,
        worst_margin=min(margins) if margins else 0.0,
        passed=violations == 0,
        budget=0.0,
        note=f"threshold {threshold!r} on iterations with movement > {eps!r}",
    )


def audit_concentration(
    dataset,
    centers,
    b: int,
    trials: int,
    delta: float,
    rng: Optional[RandomStream] = None,
    seed: int = 0,
) -> AuditCheck:
    """Sample batches against fixed centers and bound the large-deviation rate.

    Counts trials where ``|f_B(C) - f_X(C)| >= delta`` and compares the
    frequency with ``2 exp(-2 b delta^2 / d^2)`` plus a 3-sigma binomial
    allowance for the finite trial count. ``worst_margin`` is the largest
    observed deviation.
    """
    X = as_points(dataset, "dataset")
    C = as_points(centers, "centers")
    check_same_dim(X, C, "dataset", "centers")
    if int(b) < 1 or int(trials) < 1:
        raise ContractViolation("b and trials must be at least 1")
    if not delta > 0.0:
        raise ContractViolation("delta must be positive")
    if rng is None:
        rng = RandomStream(seed)
    n, d = X.shape
    min_d2 = pairwise_squared_distances(X, C).min(axis=1)
    f_full = cost(X, C)
    devs = np.empty(int(trials))
    for t in range(int(trials)):
        idx = rng.integers(n, size=int(b))
        devs[t] = abs(float(min_d2[idx].mean()) - f_full)
    violations = int((devs >= delta).sum())
    freq = violations / int(trials)
    p = min(1.0, 2.0 * math.exp(-2.0 * int(b) * delta**2 / d**2))
    allowance = p + 3.0 * math.sqrt(p * (1.0 - p) / int(trials))
    return AuditCheck(
        name="concentration",
        total=int(trials),
        violations=violations,
        worst_margin=float(devs.max()),
        passed=freq <= allowance,
        budget=allowance,
        note=f"delta {delta!r}, bound {p!r} (+3 sigma), worst_margin is max |f_B - f_X|",
    )
