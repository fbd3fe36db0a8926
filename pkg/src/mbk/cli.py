"""Command-line interface.

Commands::

    mbk run   --gen "mixture:n=10000,d=4,components=5,sigma=0.05" --k 5 --eps 0.5
    mbk sweep --data points.csv --normalize --k 5 --eps 0.5,0.2,0.1 --trials 5
    mbk gen   --gen "uniform:n=1000,d=4" --seed 7 --out points.csv
    mbk audit runs/trace_0000.json --out report.json
    mbk oracle-check --seed 3

``run`` executes one engine run per grid point (comma-separated --k/--b/--eps
values form the grid) per trial, writes one trace JSON per run plus a
``metrics.csv``, and prints a one-line summary per run. ``sweep`` is the same
command under the name that reads better for grids. A missing --b is filled
from the main-regime batch-size recommendation and echoed in all outputs.

Runs are deterministic: run number i uses the seed derived from --seed and i,
so re-invoking the same command reproduces every output byte except the
wall-clock column. Independent runs execute in a thread pool sized by the
MBK_THREADS environment variable.

Config files hold ``key = value`` lines (# comments allowed) using the long
flag names; explicit flags override file values.

Exit codes: 0 success, 1 audit found violations, 2 contract violation or bad
usage, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from .analysis import (
    audit_center_proximity,
    audit_concentration,
    audit_global_progress,
    audit_sklearn_implication,
    recommended_batch_size,
)
from .data import csv_spec, generate_synthetic, ingest_csv, parse_gen_spec
from .engine import RunConfig, run
from .errors import ContractViolation, MissingTraceData
from .geometry import cost
from .oracle import brute_force_optimal, naive_cost
from .sampling import RandomStream, derive_run_seed, init_kmeanspp
from .traceio import load_trace, save_trace

_METRIC_COLUMNS = [
    "seed",
    "b",
    "eps",
    "k",
    "d",
    "n",
    "iterations",
    "reason",
    "final_cost",
    "wall_ms",
    "audit_global_pass",
    "audit_proximity_pass",
    "audit_implication_pass",
    "trace",
]

_CONFIG_KEYS = {
    "data",
    "gen",
    "k",
    "b",
    "eps",
    "rate",
    "stop",
    "init",
    "seed",
    "trials",
    "cap",
    "audit_global",
    "audit_proximity",
    "out_dir",
    "normalize",
    "header",
}


def parse_config_file(path) -> dict:
    """Flat ``key = value`` file with # comments; keys match the long flags."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ContractViolation(f"{path}: line {lineno}: expected key = value")
            key, value = text.split("=", 1)
            key = key.strip().replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise ContractViolation(f"{path}: line {lineno}: unknown key {key!r}")
            out[key] = value.strip()
    return out


def _as_bool(value, key) -> bool:
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes", "on"):
        return True
    if str(value).lower() in ("0", "false", "no", "off"):
        return False
    raise ContractViolation(f"bad boolean for {key}: {value!r}")


def _setting(args, file_cfg, key, default, cast=lambda v: v):
    cli = getattr(args, key, None)
    if cli is not None:
        return cli
    if key in file_cfg:
        return cast(file_cfg[key])
    return default


def _int_list(text, key):
    try:
        return [int(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise ContractViolation(f"bad integer list for {key}: {text!r}") from None


def _float_list(text, key):
    try:
        return [float(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise ContractViolation(f"bad float list for {key}: {text!r}") from None


def _load_dataset_for(args, file_cfg, seed):
    """Resolve --data/--gen into (points, canonical dataset spec string)."""
    data = _setting(args, file_cfg, "data", None)
    gen = _setting(args, file_cfg, "gen", None)
    if (data is None) == (gen is None):
        raise ContractViolation("exactly one of --data or --gen is required")
    if gen is not None:
        spec = parse_gen_spec(gen)
        if "seed=" not in gen:
            spec = replace(spec, seed=int(seed))
        return generate_synthetic(spec), spec.render()
    normalize = _as_bool(_setting(args, file_cfg, "normalize", False), "normalize")
    header = _as_bool(_setting(args, file_cfg, "header", False), "header")
    X = ingest_csv(data, normalize=normalize, header=header)
    return X, csv_spec(data, normalize=normalize, header=header)


def _workers(n_runs: int) -> int:
    raw = os.environ.get("MBK_THREADS", "")
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise ContractViolation(f"MBK_THREADS must be an integer, got {raw!r}") from None
        if cap < 1:
            raise ContractViolation("MBK_THREADS must be at least 1")
    else:
        cap = min(4, os.cpu_count() or 1)
    return max(1, min(cap, n_runs))


def cmd_run(args) -> int:
    file_cfg = parse_config_file(args.config) if args.config else {}
    seed = int(_setting(args, file_cfg, "seed", 0))
    X, dataset_spec = _load_dataset_for(args, file_cfg, seed)
    n, d = X.shape

    k_list = _int_list(_setting(args, file_cfg, "k", None) or "", "--k")
    if not k_list:
        raise ContractViolation("--k is required")
    eps_list = _float_list(_setting(args, file_cfg, "eps", None) or "", "--eps")
    if not eps_list:
        raise ContractViolation("--eps is required")
    b_raw = _setting(args, file_cfg, "b", None)
    b_list = _int_list(b_raw, "--b") if b_raw is not None else [None]
    trials = int(_setting(args, file_cfg, "trials", 1))
    if trials < 1:
        raise ContractViolation("--trials must be at least 1")
    cap = _setting(args, file_cfg, "cap", None)
    cap = int(cap) if cap is not None else None
    rate = _setting(args, file_cfg, "rate", "paper")
    stop = _setting(args, file_cfg, "stop", "improve")
    init = _setting(args, file_cfg, "init", "kmeanspp")
    audit_global = _as_bool(_setting(args, file_cfg, "audit_global", False), "audit_global")
    audit_proximity = _as_bool(
        _setting(args, file_cfg, "audit_proximity", False), "audit_proximity"
    )
    out_dir = _setting(args, file_cfg, "out_dir", "runs")
    os.makedirs(out_dir, exist_ok=True)

    configs = []
    idx = 0
    for k in k_list:
        for b in b_list:
            for eps in eps_list:
                resolved_b = b
                if resolved_b is None:
                    rec = recommended_batch_size("main", n=n, k=k, d=d, eps=eps)
                    resolved_b = rec.b
                    if rec.exceeds_n:
                        print(
                            f"warning: recommended b={rec.b} exceeds n={n} "
                            f"(k={k}, eps={eps})",
                            file=sys.stderr,
                        )
                for _ in range(trials):
                    configs.append(
                        RunConfig(
                            k=k,
                            b=resolved_b,
                            eps=eps,
                            rate=rate,
                            stop=stop,
                            init=init,
                            seed=derive_run_seed(seed, idx),
                            max_iter_cap=cap,
                            audit_global_cost=audit_global,
                            record_cbar_dist=audit_proximity,
                            dataset_spec=dataset_spec,
                        )
                    )
                    idx += 1

    def _one(config):
        t0 = time.perf_counter()
        trace = run(X, config)
        return trace, (time.perf_counter() - t0) * 1000.0

    workers = _workers(len(configs))
    if workers == 1:
        results = [_one(c) for c in configs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one, configs))

    rows = []
    for i, (trace, wall_ms) in enumerate(results):
        trace_path = os.path.join(out_dir, f"trace_{i:04d}.json")
        save_trace(trace, trace_path)
        cfg = trace.config
        final_cost = (
            trace.final_global_cost
            if trace.final_global_cost is not None
            else cost(X, trace.final_centers)
        )
        flags = {"global": "", "proximity": "", "implication": ""}
        if audit_global:
            flags["global"] = "1" if audit_global_progress(trace).passed else "0"
        if audit_proximity:
            flags["proximity"] = "1" if audit_center_proximity(trace).passed else "0"
        if cfg.rate == "paper":
            flags["implication"] = "1" if audit_sklearn_implication(trace).passed else "0"
        rows.append(
            {
                "seed": cfg.seed,
                "b": cfg.b,
                "eps": repr(cfg.eps),
                "k": cfg.k,
                "d": d,
                "n": n,
                "iterations": len(trace.iterations),
                "reason": trace.reason,
                "final_cost": repr(float(final_cost)),
                "wall_ms": f"{wall_ms:.3f}",
                "audit_global_pass": flags["global"],
                "audit_proximity_pass": flags["proximity"],
                "audit_implication_pass": flags["implication"],
                "trace": os.path.basename(trace_path),
            }
        )
        print(
            f"[run {i:04d}] k={cfg.k} b={cfg.b} eps={cfg.eps} seed={cfg.seed}: "
            f"{len(trace.iterations)} iters, {trace.reason}, final_cost={float(final_cost):.6g}"
        )

    metrics_path = os.path.join(out_dir, "metrics.csv")
    with open(metrics_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_METRIC_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} runs to {out_dir} (metrics.csv + trace_*.json)")
    return 0


def cmd_gen(args) -> int:
    spec = parse_gen_spec(args.gen)
    if "seed=" not in args.gen:
        spec = replace(spec, seed=int(args.seed))
    X = generate_synthetic(spec)
    with open(args.out, "w", encoding="utf-8") as fh:
        for row in X:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"wrote {X.shape[0]} points of dimension {X.shape[1]} to {args.out}")
    return 0


def cmd_audit(args) -> int:
    explicit = args.check_global or args.proximity or args.implication
    trace_reports = []
    all_passed = True
    for path in args.traces:
        trace = load_trace(path)
        cfg = trace.config
        checks = []
        is_engine_trace = isinstance(cfg, RunConfig)
        if explicit:
            if args.check_global:
                checks.append(audit_global_progress(trace))
            if args.proximity:
                checks.append(audit_center_proximity(trace))
            if args.implication:
                checks.append(audit_sklearn_implication(trace))
        else:
            has_global = trace.final_global_cost is not None and all(
                r.global_cost is not None for r in trace.iterations
            )
            if has_global:
                checks.append(audit_global_progress(trace))
            if all(r.cbar_dist is not None for r in trace.iterations) and trace.iterations:
                checks.append(audit_center_proximity(trace))
            if is_engine_trace and cfg.rate == "paper":
                checks.append(audit_sklearn_implication(trace))
        if not checks:
            raise MissingTraceData(
                f"{path}: no applicable audits; rerun with --audit-global/--audit-proximity"
            )
        passed = all(c.passed for c in checks)
        all_passed = all_passed and passed
        trace_reports.append(
            {
                "path": str(path),
                "checks": [
                    {
                        "name": c.name,
                        "total": c.total,
                        "violations": c.violations,
                        "worst_margin": c.worst_margin,
                        "passed": c.passed,
                        "budget": c.budget,
                        "note": c.note,
                    }
                    for c in checks
                ],
                "passed": passed,
            }
        )
        for c in checks:
            print(
                f"{path}: {c.name}: {'PASS' if c.passed else 'FAIL'} "
                f"({c.violations}/{c.total} violations, worst_margin={c.worst_margin:.6g})"
            )

    report = {"traces": trace_reports}
    if args.concentration:
        if (args.data is None) == (args.gen is None):
            raise ContractViolation(
                "concentration audit needs exactly one of --data or --gen"
            )
        if args.gen is not None:
            spec = parse_gen_spec(args.gen)
            if "seed=" not in args.gen:
                spec = replace(spec, seed=int(args.seed))
            X = generate_synthetic(spec)
        else:
            X = ingest_csv(args.data, normalize=args.normalize, header=args.header)
        rng = RandomStream(int(args.seed))
        centers = init_kmeanspp(X, int(args.k), rng)
        check = audit_concentration(
            X, centers, b=int(args.b), trials=int(args.trials), delta=float(args.delta), rng=rng
        )
        all_passed = all_passed and check.passed
        report["concentration"] = {
            "name": check.name,
            "total": check.total,
            "violations": check.violations,
            "worst_margin": check.worst_margin,
            "passed": check.passed,
            "budget": check.budget,
            "note": check.note,
        }
        print(
            f"concentration: {'PASS' if check.passed else 'FAIL'} "
            f"({check.violations}/{check.total} exceedances, worst |f_B - f_X| = {check.worst_margin:.6g})"
        )
    if not args.traces and not args.concentration:
        raise ContractViolation("audit needs trace files and/or --concentration")

    report["passed"] = all_passed
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    print(f"report written to {args.out}")
    return 0 if all_passed else 1


def cmd_oracle_check(args) -> int:
    rng = RandomStream(int(args.seed))
    worst = 0.0
    for _ in range(int(args.instances)):
        n = 2 + int(rng.integers(30))
        d = 1 + int(rng.integers(4))
        k = 1 + int(rng.integers(min(4, n)))
        X = rng.random(size=(n, d))
        C = rng.random(size=(k, d))
        worst = max(worst, abs(cost(X, C) - naive_cost(X, C)))
    ok_cost = worst <= 1e-12
    print(
        f"cost vs naive_cost on {args.instances} instances: "
        f"max |diff| = {worst:.3e} {'OK' if ok_cost else 'MISMATCH'}"
    )

    X = rng.random(size=(int(args.n), int(args.d)))
    best = brute_force_optimal(X, int(args.k))
    from .engine import lloyd_full_batch  # local import to keep startup light

    lloyd_best = min(
        lloyd_full_batch(X, int(args.k), seed=s).final_global_cost for s in range(5)
    )
    ok_brute = best.cost <= lloyd_best + 1e-12
    print(
        f"brute force optimum {best.cost:.6g} vs best-of-5 full-batch {lloyd_best:.6g} "
        f"{'OK' if ok_brute else 'VIOLATION'}"
    )
    return 0 if (ok_cost and ok_brute) else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbk", description="mini-batch k-means runner and audit harness"
    )
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser(
        "run",
        aliases=["sweep"],
        help="execute runs over a grid of --k/--b/--eps values",
    )
    run_p.add_argument("--data", help="CSV file of points")
    run_p.add_argument("--gen", help="synthetic dataset spec, e.g. uniform:n=1000,d=4")
    run_p.add_argument("--k", help="centers; comma-separated values sweep")
    run_p.add_argument("--b", help="batch size; omitted = planner recommendation")
    run_p.add_argument("--eps", help="stopping threshold; comma-separated values sweep")
    run_p.add_argument("--rate", help="paper | sklearn | const:<c> (default paper)")
    run_p.add_argument("--stop", help="improve | move (default improve)")
    run_p.add_argument("--init", help="kmeanspp | random (default kmeanspp)")
    run_p.add_argument("--seed", type=int, help="master seed (default 0)")
    run_p.add_argument("--trials", type=int, help="runs per grid point (default 1)")
    run_p.add_argument("--cap", type=int, help="iteration cap (default 10*ceil(d/eps))")
    run_p.add_argument(
        "--audit-global",
        dest="audit_global",
        action="store_true",
        default=None,
        help="record full-data cost per iteration and audit it",
    )
    run_p.add_argument(
        "--audit-proximity",
        dest="audit_proximity",
        action="store_true",
        default=None,
        help="record per-center distance to the full-data update and audit it",
    )
    run_p.add_argument("--out-dir", dest="out_dir", help="output directory (default runs)")
    run_p.add_argument(
        "--normalize", action="store_true", default=None, help="min-max scale CSV input"
    )
    run_p.add_argument(
        "--header", action="store_true", default=None, help="skip the first CSV line"
    )
    run_p.add_argument("--config", help="key = value config file; flags override it")
    run_p.set_defaults(func=cmd_run)

    gen_p = sub.add_parser("gen", help="write a synthetic dataset to CSV")
    gen_p.add_argument("--gen", required=True, help="dataset spec")
    gen_p.add_argument("--seed", type=int, default=0)
    gen_p.add_argument("--out", default="dataset.csv")
    gen_p.set_defaults(func=cmd_gen)

    audit_p = sub.add_parser("audit", help="audit recorded traces")
    audit_p.add_argument("traces", nargs="*", help="trace JSON files")
    audit_p.add_argument(
        "--global",
        dest="check_global",
        action="store_true",
        help="require the global-progress audit",
    )
    audit_p.add_argument("--proximity", action="store_true", help="require the proximity audit")
    audit_p.add_argument(
        "--implication", action="store_true", help="require the movement-implication audit"
    )
    audit_p.add_argument("--concentration", action="store_true", help="run the sampling audit")
    audit_p.add_argument("--data", help="CSV file (concentration audit)")
    audit_p.add_argument("--gen", help="dataset spec (concentration audit)")
    audit_p.add_argument("--normalize", action="store_true", default=False)
    audit_p.add_argument("--header", action="store_true", default=False)
    audit_p.add_argument("--k", type=int, default=5, help="centers for the concentration audit")
    audit_p.add_argument("--b", type=int, default=500, help="batch size (concentration)")
    audit_p.add_argument("--delta", type=float, default=0.05, help="deviation level")
    audit_p.add_argument("--trials", type=int, default=2000, help="batches to sample")
    audit_p.add_argument("--seed", type=int, default=0)
    audit_p.add_argument("--out", default="audit_report.json", help="report JSON path")
    audit_p.set_defaults(func=cmd_audit)

    oracle_p = sub.add_parser(
        "oracle-check", help="spot-check fast paths against the independent oracles"
    )
    oracle_p.add_argument("--seed", type=int, default=0)
    oracle_p.add_argument("--instances", type=int, default=50)
    oracle_p.add_argument("--n", type=int, default=8)
    oracle_p.add_argument("--d", type=int, default=2)
    oracle_p.add_argument("--k", type=int, default=2)
    oracle_p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return 0 if exc.code in (0, None) else 2
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except ContractViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
