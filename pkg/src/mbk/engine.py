"""Mini-batch k-means engine.

One iteration samples a batch of ``b`` points uniformly with repetitions,
splits it by nearest current center, then moves each center j to the convex
combination ``(1 - a_j) * c_j + a_j * mean(batch part j)``. The learning
rate ``a_j`` depends on the configured policy and is 0 whenever the batch
part is empty, so untouched centers stay put. The loop stops the first time
the configured stopping rule's quantity drops below ``eps`` (strictly), or
when the iteration cap is reached. The returned centers are always the
post-update ones from the final iteration.

Rate tokens (also used by the CLI and trace files):

* ``paper``      - a_j = sqrt(m_j / b) where m_j is center j's batch count
* ``sklearn``    - a_j = m_j / (total batch points seen by center j so far,
  including this iteration), the running-mean rate of scikit-learn's
  MiniBatchKMeans
* ``const:<c>``  - a_j = c for any non-empty part, with 0 <= c <= 1

Stop tokens: ``improve`` compares the batch cost drop
``f_B(C_old) - f_B(C_new)`` against eps; ``move`` compares the total squared
center displacement. Init tokens: ``kmeanspp`` or ``random``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ContractViolation
from .geometry import (
    assign,
    center_movement,
    cost,
    pairwise_squared_distances,
)
from .sampling import Batch, RandomStream, init_kmeanspp, init_random, sample_batch
from .validation import as_points, check_unit_box

__all__ = [
    "STOP_RULE_FIRED",
    "CAP_REACHED",
    "RATE_TOKENS",
    "STOP_TOKENS",
    "INIT_TOKENS",
    "parse_rate",
    "LearningRateState",
    "learning_rate",
    "partition_batch",
    "update_centers",
    "should_stop",
    "default_cap",
    "RunConfig",
    "LloydConfig",
    "IterationRecord",
    "RunTrace",
    "run",
    "lloyd_full_batch",
]

STOP_RULE_FIRED = "stop_rule_fired"
CAP_REACHED = "cap_reached"

RATE_TOKENS = ("paper", "sklearn", "const:<c>")
STOP_TOKENS = ("improve", "move")
INIT_TOKENS = ("kmeanspp", "random")


def parse_rate(token: str):
    """Split a rate token into (kind, constant); constant is None unless const."""
    if token == "paper":
        return "sqrt", None
    if token == "sklearn":
        return "cumulative", None
    if isinstance(token, str) and token.startswith("const:"):
        try:
            c = float(token.split(":", 1)[1])
        except ValueError:
            raise ContractViolation(f"bad constant in rate token {token!r}") from None
        if not 0.0 <= c <= 1.0:
            raise ContractViolation(f"constant rate must lie in [0, 1], got {c}")
        return "constant", c
    raise ContractViolation(f"unknown rate token {token!r}; expected one of {RATE_TOKENS}")


class LearningRateState:
    """Per-run learning-rate policy.

    The ``sklearn`` variant is stateful: it accumulates how many batch points
    each center has absorbed, and the current iteration's counts are included
    in the denominator (first non-empty iteration therefore gets rate 1).
    """

    def __init__(self, token: str, k: int):
        self.kind, self.const = parse_rate(token)
        self.token = token
        self._seen = np.zeros(int(k), dtype=np.int64)

    def step(self, counts, b: int) -> np.ndarray:
        """Rates for one iteration given the per-center batch counts."""
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != self._seen.shape:
            raise ContractViolation(
                f"expected {self._seen.shape[0]} per-center counts, got {counts.shape}"
            )
        if (counts < 0).any() or int(counts.sum()) != int(b):
            raise ContractViolation(
                f"batch counts must be non-negative and sum to b={b}, got sum {int(counts.sum())}"
            )
        if self.kind == "sqrt":
            alphas = np.sqrt(counts / float(b))
        elif self.kind == "cumulative":
            self._seen += counts
            alphas = np.divide(
                counts.astype(np.float64),
                self._seen.astype(np.float64),
                out=np.zeros(counts.shape[0]),
                where=self._seen > 0,
            )
        else:
            alphas = np.where(counts > 0, self.const, 0.0)
        # in-range by construction; anything else is a bug, not bad input
        assert float(alphas.min(initial=0.0)) >= 0.0
        assert float(alphas.max(initial=0.0)) <= 1.0
        return alphas


def learning_rate(policy: LearningRateState, counts, b: int) -> np.ndarray:
    """Functional alias for :meth:`LearningRateState.step`."""
    return policy.step(counts, b)


def partition_batch(batch, centers):
    """Split batch points by nearest center.

    Accepts a :class:`~mbk.sampling.Batch` or a raw point array. Returns
    (parts, counts) where parts is a list of k arrays in batch order and
    counts are the part sizes.
    """
    pts = getattr(batch, "points", batch)
    pts = as_points(pts, "batch", allow_empty=True)
    a = assign(pts, centers)
    k = a.counts.shape[0]
    parts = [pts[a.labels == j] for j in range(k)]
    return parts, a.counts


def update_centers(centers, parts: Sequence, alphas) -> np.ndarray:
    """Convex per-center update toward each part's mean.

    Centers with rate 0 are returned bit-identical; rate 1 lands exactly on
    the part mean. A positive rate paired with an empty part is a contract
    violation. The result is clipped to [0, 1]^d, which only guards the
    last-ulp rounding of the convex combination.
    """
    C = as_points(centers, "centers").copy()
    k = C.shape[0]
    alphas = np.asarray(alphas, dtype=np.float64)
    if len(parts) != k or alphas.shape != (k,):
        raise ContractViolation(
            f"need one part and one rate per center, got {len(parts)} parts, "
            f"{alphas.shape} rates for k={k}"
        )
    if (alphas < 0.0).any() or (alphas > 1.0).any():
        raise ContractViolation("learning rates must lie in [0, 1]")
    for j in range(k):
        a = float(alphas[j])
        if a == 0.0:
            continue
        part = np.asarray(parts[j], dtype=np.float64)
        if part.shape[0] == 0:
            raise ContractViolation(
                f"center {j} has rate {a} > 0 but an empty part; empty parts must get rate 0"
            )
        C[j] = (1.0 - a) * C[j] + a * part.mean(axis=0)
    np.clip(C, 0.0, 1.0, out=C)
    return C


def should_stop(stop: str, eps: float, improvement: float, movement: float) -> bool:
    """True when the configured rule's quantity fell strictly below eps."""
    if stop == "improve":
        return improvement < eps
    if stop == "move":
        return movement < eps
    raise ContractViolation(f"unknown stop token {stop!r}; expected one of {STOP_TOKENS}")


def default_cap(d: int, eps: float) -> int:
    """Default iteration cap, 10 * ceil(d / eps)."""
    return 10 * math.ceil(d / eps)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one engine run, bit for bit."""

    k: int
    b: int
    eps: float
    rate: str = "paper"
    stop: str = "improve"
    init: str = "kmeanspp"
    seed: int = 0
    max_iter_cap: Optional[int] = None
    audit_global_cost: bool = False
    record_cbar_dist: bool = False
    dataset_spec: Optional[str] = None


@dataclass(frozen=True)
class LloydConfig:
    """Config echo for full-batch reference runs."""

    k: int
    init: str = "kmeanspp"
    seed: int = 0
    max_iter: int = 100
    dataset_spec: Optional[str] = None


@dataclass(frozen=True)
class IterationRecord:
    """Measurements from one iteration.

    ``global_cost`` is the full-data cost of the centers *entering* the
    iteration; ``cbar_dist`` holds, per center, the Euclidean distance
    between the realized new center and the center the same rates would have
    produced from the full dataset's partition instead of the batch's.
    """

    i: int
    counts: tuple
    alphas: tuple
    local_improvement: float
    movement: float
    global_cost: Optional[float] = None
    cbar_dist: Optional[tuple] = None


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Complete record of a run: config echo, centers, and per-iteration data."""

    config: Union[RunConfig, LloydConfig]
    init_centers: np.ndarray
    final_centers: np.ndarray
    iterations: tuple
    reason: str
    final_global_cost: Optional[float] = None


def _validate_config(config: RunConfig, n: int) -> None:
    if not 1 <= int(config.k) <= n:
        raise ContractViolation(f"need 1 <= k <= n, got k={config.k}, n={n}")
    if int(config.b) < 1:
        raise ContractViolation(f"batch size must be at least 1, got {config.b}")
    if not config.eps > 0.0:
        raise ContractViolation(f"eps must be positive, got {config.eps}")
    parse_rate(config.rate)
    if config.stop not in STOP_TOKENS:
        raise ContractViolation(f"unknown stop token {config.stop!r}")
    if config.init not in INIT_TOKENS:
        raise ContractViolation(f"unknown init token {config.init!r}")
    if config.max_iter_cap is not None and int(config.max_iter_cap) < 1:
        raise ContractViolation("max_iter_cap must be at least 1")


def _initial_centers(X, config, rng, initial_centers):
    if initial_centers is not None:
        C = as_points(initial_centers, "initial_centers").copy()
        if C.shape != (config.k, X.shape[1]):
            raise ContractViolation(
                f"initial_centers must have shape ({config.k}, {X.shape[1]}), got {C.shape}"
            )
        return check_unit_box(C, "initial_centers")
    if config.init == "random":
        return init_random(X, config.k, rng)
    return init_kmeanspp(X, config.k, rng)


def run(
    dataset,
    config: RunConfig,
    rng: Optional[RandomStream] = None,
    *,
    sampler: Optional[Callable] = None,
    initial_centers=None,
) -> RunTrace:
    """Execute one mini-batch k-means run and return its trace.

    Parameters
    ----------
    dataset : array-like of shape (n, d)
        Points, all inside [0, 1]^d.
    config : RunConfig
        Run settings. A missing ``max_iter_cap`` resolves to
        ``default_cap(d, eps)`` and the resolved value is echoed in the trace.
    rng : RandomStream, optional
        Draw source; a fresh stream seeded from ``config.seed`` by default.
    sampler : callable, optional
        Test hook with the signature of :func:`~mbk.sampling.sample_batch`.
        Passing ``lambda X, b, rng: Batch(indices, X)`` with ``b = n`` turns
        the engine into its deterministic full-batch degenerate form.
    initial_centers : array-like, optional
        Test hook: start from these centers instead of running the
        configured init scheme.
    """
    X = check_unit_box(as_points(dataset, "dataset"), "dataset")
    n, d = X.shape
    _validate_config(config, n)
    if rng is None:
        rng = RandomStream(config.seed)
    cap = int(config.max_iter_cap) if config.max_iter_cap is not None else default_cap(d, config.eps)
    draw = sample_batch if sampler is None else sampler

    C = _initial_centers(X, config, rng, initial_centers)
    init_C = C.copy()
    rate_state = LearningRateState(config.rate, config.k)
    want_full = config.audit_global_cost or config.record_cbar_dist

    records = []
    reason = CAP_REACHED
    for i in range(1, cap + 1):
        batch = draw(X, config.b, rng)
        B = as_points(batch.points, "batch")
        if B.shape[0] != config.b:
            raise ContractViolation(
                f"sampler returned {B.shape[0]} points, expected b={config.b}"
            )
        parts, counts = partition_batch(B, C)
        alphas = rate_state.step(counts, config.b)

        global_cost = None
        full_parts = None
        if want_full:
            d2_full = pairwise_squared_distances(X, C)
            if config.audit_global_cost:
                global_cost = float(d2_full.min(axis=1).mean())
            if config.record_cbar_dist:
                full_labels = d2_full.argmin(axis=1)
                full_parts = [X[full_labels == j] for j in range(config.k)]

        f_old = cost(B, C)
        C_new = update_centers(C, parts, alphas)
        f_new = cost(B, C_new)
        improvement = f_old - f_new
        movement = center_movement(C, C_new)

        cbar_dist = None
        if full_parts is not None:
            # same rates applied to the full dataset's induced parts
            cbar = update_centers(C, full_parts, alphas)
            cbar_dist = tuple(
                float(v) for v in np.sqrt(((C_new - cbar) ** 2).sum(axis=1))
            )

        records.append(
            IterationRecord(
                i=i,
                counts=tuple(int(c) for c in counts),
                alphas=tuple(float(a) for a in alphas),
                local_improvement=float(improvement),
                movement=float(movement),
                global_cost=global_cost,
                cbar_dist=cbar_dist,
            )
        )
        C = C_new
        if should_stop(config.stop, config.eps, improvement, movement):
            reason = STOP_RULE_FIRED
            break

    final_global = cost(X, C) if config.audit_global_cost else None
    resolved = replace(config, max_iter_cap=cap)
    return RunTrace(
        config=resolved,
        init_centers=init_C,
        final_centers=C,
        iterations=tuple(records),
        reason=reason,
        final_global_cost=final_global,
    )


def lloyd_full_batch(
    dataset,
    k: int,
    init: str = "kmeanspp",
    max_iter: int = 100,
    seed: int = 0,
    rng: Optional[RandomStream] = None,
    initial_centers=None,
    dataset_spec: Optional[str] = None,
) -> RunTrace:
    """Classic full-batch Lloyd iterations, traced like an engine run.

    Each iteration reassigns all points and moves every non-empty cluster's
    center to its members' mean (empty clusters keep their center). The loop
    stops one verification pass after assignments stabilize, or at
    ``max_iter``. Global cost is recorded every iteration; it never
    increases.
    """
    X = check_unit_box(as_points(dataset, "dataset"), "dataset")
    n = X.shape[0]
    if not 1 <= int(k) <= n:
        raise ContractViolation(f"need 1 <= k <= n, got k={k}, n={n}")
    if int(max_iter) < 1:
        raise ContractViolation("max_iter must be at least 1")
    if init not in INIT_TOKENS:
        raise ContractViolation(f"unknown init token {init!r}")
    if rng is None:
        rng = RandomStream(seed)
    config = LloydConfig(
        k=int(k), init=init, seed=int(seed), max_iter=int(max_iter), dataset_spec=dataset_spec
    )
    if initial_centers is not None:
        C = as_points(initial_centers, "initial_centers").copy()
        if C.shape != (int(k), X.shape[1]):
            raise ContractViolation(
                f"initial_centers must have shape ({k}, {X.shape[1]}), got {C.shape}"
            )
        check_unit_box(C, "initial_centers")
    elif init == "random":
        C = init_random(X, k, rng)
    else:
        C = init_kmeanspp(X, k, rng)
    init_C = C.copy()

    d2 = pairwise_squared_distances(X, C)
    labels = d2.argmin(axis=1)
    g = float(d2.min(axis=1).mean())

    records = []
    reason = CAP_REACHED
    for i in range(1, int(max_iter) + 1):
        counts = np.bincount(labels, minlength=int(k))
        parts = [X[labels == j] for j in range(int(k))]
        alphas = (counts > 0).astype(np.float64)
        C_new = update_centers(C, parts, alphas)
        d2 = pairwise_squared_distances(X, C_new)
        labels_new = d2.argmin(axis=1)
        g_new = float(d2.min(axis=1).mean())
        records.append(
            IterationRecord(
                i=i,
                counts=tuple(int(c) for c in counts),
                alphas=tuple(float(a) for a in alphas),
                local_improvement=g - g_new,
                movement=center_movement(C, C_new),
                global_cost=g,
            )
        )
        stable = bool(np.array_equal(labels, labels_new))
        C, labels, g = C_new, labels_new, g_new
        if stable:
            reason = STOP_RULE_FIRED
            break

    return RunTrace(
        config=config,
        init_centers=init_C,
        final_centers=C,
        iterations=tuple(records),
        reason=reason,
        final_global_cost=g,
    )
