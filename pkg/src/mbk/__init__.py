"""Mini-batch k-means on the unit box, with an audit harness.

The library runs mini-batch k-means with pluggable learning-rate and
stopping rules, records every run as a replayable trace, and audits the
traces against quantitative per-iteration guarantees (global progress,
center proximity to the full-data update, movement-implies-improvement,
and batch-cost concentration).
"""

from .analysis import (
    AuditCheck,
    AuditReport,
    BatchSizeRecommendation,
    audit_center_proximity,
    audit_concentration,
    audit_global_progress,
    audit_sklearn_implication,
    hypothetical_full_update,
    recommended_batch_size,
    termination_bound,
)
from .data import GenSpec, generate_synthetic, ingest_csv, load_dataset, parse_gen_spec
from .engine import (
    CAP_REACHED,
    STOP_RULE_FIRED,
    IterationRecord,
    LloydConfig,
    RunConfig,
    RunTrace,
    default_cap,
    learning_rate,
    lloyd_full_batch,
    run,
)
from .errors import ContractViolation, EmptyClusterError, MissingTraceData
from .estimator import MiniBatchKMeans
from .geometry import (
    assign,
    center_movement,
    center_of_mass,
    cost,
    delta_set,
    pairwise_squared_distances,
    squared_distance,
)
from .oracle import TinyInstance, brute_force_optimal, naive_cost
from .sampling import (
    Batch,
    RandomStream,
    derive_run_seed,
    init_kmeanspp,
    init_random,
    sample_batch,
)
from .traceio import dumps_trace, load_trace, loads_trace, replay, save_trace, traces_equal

__version__ = "0.1.0"

__all__ = [
    "AuditCheck",
    "AuditReport",
    "Batch",
    "BatchSizeRecommendation",
    "CAP_REACHED",
    "ContractViolation",
    "EmptyClusterError",
    "GenSpec",
    "IterationRecord",
    "LloydConfig",
    "MiniBatchKMeans",
    "MissingTraceData",
    "RandomStream",
    "RunConfig",
    "RunTrace",
    "STOP_RULE_FIRED",
    "TinyInstance",
    "assign",
    "audit_center_proximity",
    "audit_concentration",
    "audit_global_progress",
    "audit_sklearn_implication",
    "brute_force_optimal",
    "center_movement",
    "center_of_mass",
    "cost",
    "default_cap",
    "delta_set",
    "derive_run_seed",
    "dumps_trace",
    "generate_synthetic",
    "hypothetical_full_update",
    "ingest_csv",
    "init_kmeanspp",
    "init_random",
    "learning_rate",
    "lloyd_full_batch",
    "load_dataset",
    "load_trace",
    "loads_trace",
    "naive_cost",
    "pairwise_squared_distances",
    "parse_gen_spec",
    "recommended_batch_size",
    "replay",
    "run",
    "sample_batch",
    "save_trace",
    "squared_distance",
    "termination_bound",
    "traces_equal",
    "__version__",
]
