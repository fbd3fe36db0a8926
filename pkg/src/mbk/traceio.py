"""Trace serialization, loading, and replay.

The JSON layout is ``{config, init_centers, iterations, final_centers,
reason}`` plus a ``final_global_cost`` key when the run recorded full-data
costs. Iteration entries carry ``i, counts, alphas, local_improvement,
movement`` and, when recorded, ``global_cost`` and ``cbar_dist``. Floats are
written in Python's shortest round-trip form, so parsing a file and
serializing it again reproduces the bytes exactly, and a replayed run can be
compared bit for bit.
"""

from __future__ import annotations

import json
from typing import Optional

import numpy as np

from .data import load_dataset
from .engine import IterationRecord, LloydConfig, RunConfig, RunTrace, lloyd_full_batch, run
from .errors import ContractViolation

__all__ = [
    "trace_to_dict",
    "dict_to_trace",
    "dumps_trace",
    "loads_trace",
    "save_trace",
    "load_trace",
    "replay",
    "traces_equal",
]


def _config_to_dict(config) -> dict:
    if isinstance(config, RunConfig):
        out = {
            "algorithm": "minibatch",
            "k": config.k,
            "b": config.b,
            "eps": config.eps,
            "rate": config.rate,
            "stop": config.stop,
            "init": config.init,
            "seed": config.seed,
            "max_iter_cap": config.max_iter_cap,
            "audit_global_cost": config.audit_global_cost,
            "record_cbar_dist": config.record_cbar_dist,
        }
    elif isinstance(config, LloydConfig):
        out = {
            "algorithm": "lloyd",
            "k": config.k,
            "init": config.init,
            "seed": config.seed,
            "max_iter": config.max_iter,
        }
    else:
        raise ContractViolation(f"cannot serialize config of type {type(config).__name__}")
    if config.dataset_spec is not None:
        out["dataset"] = config.dataset_spec
    return out


def _config_from_dict(d: dict):
    algo = d.get("algorithm", "minibatch")
    if algo == "minibatch":
        return RunConfig(
            k=int(d["k"]),
            b=int(d["b"]),
            eps=float(d["eps"]),
            rate=d["rate"],
            stop=d["stop"],
            init=d["init"],
            seed=int(d["seed"]),
            max_iter_cap=None if d.get("max_iter_cap") is None else int(d["max_iter_cap"]),
            audit_global_cost=bool(d.get("audit_global_cost", False)),
            record_cbar_dist=bool(d.get("record_cbar_dist", False)),
            dataset_spec=d.get("dataset"),
        )
    if algo == "lloyd":
        return LloydConfig(
            k=int(d["k"]),
            init=d["init"],
            seed=int(d["seed"]),
            max_iter=int(d["max_iter"]),
            dataset_spec=d.get("dataset"),
        )
    raise ContractViolation(f"unknown algorithm {algo!r} in trace config")


def _record_to_dict(rec: IterationRecord) -> dict:
    out = {
        "i": rec.i,
        "counts": list(rec.counts),
        "alphas": list(rec.alphas),
        "local_improvement": rec.local_improvement,
        "movement": rec.movement,
    }
    if rec.global_cost is not None:
        out["global_cost"] = rec.global_cost
    if rec.cbar_dist is not None:
        out["cbar_dist"] = list(rec.cbar_dist)
    return out


def _record_from_dict(d: dict) -> IterationRecord:
    return IterationRecord(
        i=int(d["i"]),
        counts=tuple(int(v) for v in d["counts"]),
        alphas=tuple(float(v) for v in d["alphas"]),
        local_improvement=float(d["local_improvement"]),
        movement=float(d["movement"]),
        global_cost=None if d.get("global_cost") is None else float(d["global_cost"]),
        cbar_dist=None
        if d.get("cbar_dist") is None
        else tuple(float(v) for v in d["cbar_dist"]),
    )


def trace_to_dict(trace: RunTrace) -> dict:
    out = {
        "config": _config_to_dict(trace.config),
        "init_centers": np.asarray(trace.init_centers).tolist(),
        "iterations": [_record_to_dict(r) for r in trace.iterations],
        "final_centers": np.asarray(trace.final_centers).tolist(),
        "reason": trace.reason,
    }
    if trace.final_global_cost is not None:
        out["final_global_cost"] = trace.final_global_cost
    return out


def dict_to_trace(d: dict) -> RunTrace:
    return RunTrace(
        config=_config_from_dict(d["config"]),
        init_centers=np.asarray(d["init_centers"], dtype=np.float64),
        final_centers=np.asarray(d["final_centers"], dtype=np.float64),
        iterations=tuple(_record_from_dict(r) for r in d["iterations"]),
        reason=d["reason"],
        final_global_cost=None
        if d.get("final_global_cost") is None
        else float(d["final_global_cost"]),
    )


def dumps_trace(trace: RunTrace) -> str:
    return json.dumps(trace_to_dict(trace), indent=2) + "\n"


def loads_trace(text: str) -> RunTrace:
    return dict_to_trace(json.loads(text))


def save_trace(trace: RunTrace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_trace(trace))


def load_trace(path) -> RunTrace:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_trace(fh.read())


def replay(trace: RunTrace, dataset=None) -> RunTrace:
    """Re-run a trace from its embedded config and return the fresh trace.

    The dataset is rebuilt from the config's dataset spec unless one is
    passed explicitly. For a seeded config the replay is bit-identical to
    the original, which :func:`traces_equal` can confirm.
    """
    if dataset is None:
        if trace.config.dataset_spec is None:
            raise ContractViolation(
                "trace config has no dataset spec; pass the dataset explicitly"
            )
        dataset = load_dataset(trace.config.dataset_spec)
    if isinstance(trace.config, LloydConfig):
        cfg = trace.config
        return lloyd_full_batch(
            dataset,
            cfg.k,
            init=cfg.init,
            max_iter=cfg.max_iter,
            seed=cfg.seed,
            dataset_spec=cfg.dataset_spec,
        )
    return run(dataset, trace.config)


def traces_equal(a: RunTrace, b: RunTrace) -> bool:
    """Bit-level equality, defined as identical serialized bytes."""
    return dumps_trace(a) == dumps_trace(b)
