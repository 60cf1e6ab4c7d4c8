"""Command-line interface: simulate | pwgc | alasso | bench | check-oracle.

Exit codes: 0 success, 1 fixture or acceptance failure, 2 input error.
Every command is deterministic given its arguments and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .adalasso import adalasso_graph
from .bench import BenchConfig, run_benchmark, write_records_csv, write_summary_csv
from .errors import GcnetError
from .graphs import DirectedGraph, load_edge_list, random_dag, random_scg, save_edge_list
from .metrics import confusion, fdp, mcc
from .pairwise import draw_wellposed_scg, oracle_pairwise, oracle_wellposed
from .recovery import pwgc_pipeline, recover_oracle
from .varsim import (
    VarModel,
    build_var_model,
    is_persistent,
    load_series,
    save_model,
    save_series,
    simulate,
)


def _threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("GCNET_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"GCNET_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def cmd_simulate(args) -> int:
    if args.topology == "dag" and args.q is None:
        raise ValueError("--q is required with --topology dag")
    rng = np.random.default_rng(args.seed)
    if args.topology == "scg":
        graph = random_scg(args.n, rng)
    else:
        graph = random_dag(args.n, args.q, rng)
    model = build_var_model(graph, args.p, rng)
    series = simulate(model, args.T, burn_in=args.burn_in, rng=rng)
    prefix = args.out_prefix
    save_edge_list(graph, f"{prefix}.graph.txt")
    save_model(model, f"{prefix}.model.json")
    save_series(series, f"{prefix}.series.csv", header=args.header)
    print(f"wrote {prefix}.graph.txt, {prefix}.model.json, {prefix}.series.csv"
          f" ({args.T} rows x {args.n} cols)")
    return 0


def _print_scores(truth_path: str, est: DirectedGraph) -> None:
    truth = load_edge_list(truth_path)
    counts = confusion(truth, est)
    print(f"MCC: {mcc(counts):.4f}")
    print(f"FDP: {fdp(counts):.4f}")


def cmd_pwgc(args) -> int:
    x = load_series(args.series, header=args.header)
    result = pwgc_pipeline(x, args.p_max, alpha=args.alpha,
                           order_rule=args.order_rule,
                           threads=_threads(args.threads))
    prefix = args.out_prefix
    save_edge_list(result.graph, f"{prefix}.graph.txt")
    save_model(result.model, f"{prefix}.model.json")
    print(f"recovered {len(result.graph.edges)} edges"
          f" (delta={result.delta:.6g}, refit order {result.p_refit})")
    if args.dump_stats:
        _dump_stats(result.stats, args.dump_stats)
    if args.trace:
        result.trace.to_jsonl(args.trace)
    if args.truth:
        _print_scores(args.truth, result.graph)
    return 0


def _dump_stats(stats, path) -> None:
    with open(path, "w") as fh:
        fh.write("i,j,p_ij,F,P\n")
        for i in range(1, stats.n + 1):
            for j in range(1, stats.n + 1):
                if i == j:
                    continue
                fh.write(f"{i},{j},{int(stats.orders[i - 1, j - 1])},"
                         f"{float(stats.F[i - 1, j - 1])!r},"
                         f"{float(stats.P[i - 1, j - 1])!r}\n")


def cmd_alasso(args) -> int:
    x = load_series(args.series, header=args.header)
    graph, model = adalasso_graph(x, args.p_max)
    prefix = args.out_prefix
    save_edge_list(graph, f"{prefix}.graph.txt")
    save_model(model, f"{prefix}.model.json")
    print(f"recovered {len(graph.edges)} edges")
    if args.truth:
        _print_scores(args.truth, graph)
    return 0


def _load_config(spec: str) -> BenchConfig:
    path = Path(spec)
    if path.exists():
        return BenchConfig.from_json(path)
    bundled = resources.files("gcnet.configs").joinpath(f"{spec}.json")
    if bundled.is_file():
        return BenchConfig.from_dict(json.loads(bundled.read_text()))
    raise FileNotFoundError(f"no config file {spec!r} and no bundled config of that name")


def cmd_bench(args) -> int:
    config = _load_config(args.config)
    records = run_benchmark(config, workers=_threads(args.threads))
    write_records_csv(records, args.records, timing=args.timing)
    write_summary_csv(records, args.summary)
    total = len(records)
    failed = sum(1 for r in records if r.status.startswith("failed"))
    print(f"{total} records ({failed} failed) -> {args.records}, {args.summary}")
    if total and failed / total > 0.10:
        print(f"more than 10% of replicates failed ({failed}/{total})", file=sys.stderr)
        return 1
    return 0


def _oracle_fixtures() -> list[tuple[str, bool]]:
    """Counterexample fixtures: each returns (name, passed)."""
    checks = []
    a = 0.5

    g1 = DirectedGraph(4, frozenset({(1, 2), (1, 3), (2, 4), (3, 4)}))
    B1 = np.zeros((4, 4, 1))
    B1[1, 0, 0] = a
    B1[2, 0, 0] = -a
    B1[3, 1, 0] = 1.0
    B1[3, 2, 0] = 1.0
    pw = oracle_pairwise(VarModel(B1, np.ones(4), g1))
    checks.append(("diamond path-cancellation: 1 does not pairwise-drive 4",
                   not pw[3, 0]))

    g2 = DirectedGraph(3, frozenset({(1, 2), (2, 3), (1, 3)}))
    B2 = np.zeros((3, 3, 2))
    B2[1, 0, 0] = -a
    B2[2, 1, 0] = 1.0
    B2[2, 0, 1] = a
    pw = oracle_pairwise(VarModel(B2, np.ones(3), g2))
    checks.append(("lag cancellation: 1 does not pairwise-drive 3", not pw[2, 0]))

    g3 = DirectedGraph(3, frozenset({(1, 2), (1, 3)}))
    B3 = np.zeros((3, 3, 1))
    B3[1, 0, 0] = a
    B3[2, 0, 0] = a
    pw = oracle_pairwise(VarModel(B3, np.ones(3), g3))
    checks.append(("memoryless fork: 2 does not pairwise-drive 3", not pw[2, 1]))

    B4 = B3.copy()
    B4[0, 0, 0] = 0.5
    pw = oracle_pairwise(VarModel(B4, np.ones(3), g3))
    checks.append(("fork with memory: 2 pairwise-drives 3", bool(pw[2, 1])))

    fig = DirectedGraph(6, frozenset({(1, 3), (3, 4), (2, 4), (3, 5), (4, 6)}))
    rng = np.random.default_rng(0)
    while True:
        model = build_var_model(fig, 5, rng)
        if is_persistent(model) and oracle_wellposed(model):
            break
    graph, _ = recover_oracle(oracle_pairwise(model))
    checks.append(("six-node worked example recovered exactly", graph.edges == fig.edges))
    return checks


def cmd_check_oracle(args) -> int:
    failures = 0
    for name, passed in _oracle_fixtures():
        print(f"[{'PASS' if passed else 'FAIL'}] {name}")
        failures += not passed
    rng = np.random.default_rng(args.seed)
    exact = 0
    for trial in range(args.trials):
        n = int(rng.choice([6, 10, 20]))
        p = int(rng.choice([1, 2, 5]))
        graph, model = draw_wellposed_scg(n, p, rng)
        est, _ = recover_oracle(oracle_pairwise(model))
        exact += est.edges == graph.edges
    ok = exact == args.trials
    print(f"[{'PASS' if ok else 'FAIL'}] random tree recovery: {exact}/{args.trials} exact")
    failures += not ok
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcnet",
        description="Sparse Granger-causality graph learning for VAR time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a topology + model and write a series")
    sim.add_argument("--topology", choices=("scg", "dag"), required=True)
    sim.add_argument("--q", type=float, help="edge probability (dag only)")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--T", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--burn-in", type=int, default=None)
    sim.add_argument("--header", action="store_true", help="write a CSV header row")
    sim.add_argument("--out-prefix", default="sim")
    sim.set_defaults(func=cmd_simulate)

    pw = sub.add_parser("pwgc", help="estimate a causality graph by pairwise tests")
    pw.add_argument("--series", required=True)
    pw.add_argument("--p-max", type=int, default=10)
    pw.add_argument("--alpha", type=float, default=0.05)
    pw.add_argument("--order-rule", choices=("bivariate", "max"), default="bivariate")
    pw.add_argument("--threads", type=int, default=None)
    pw.add_argument("--header", action="store_true", help="series CSV has a header row")
    pw.add_argument("--truth", help="edge-list file; prints MCC/FDP")
    pw.add_argument("--dump-stats", help="write per-pair i,j,p_ij,F,P CSV")
    pw.add_argument("--trace", help="write the recovery trace as JSON lines")
    pw.add_argument("--out-prefix", default="pwgc")
    pw.set_defaults(func=cmd_pwgc)

    al = sub.add_parser("alasso", help="estimate a causality graph by adaptive LASSO")
    al.add_argument("--series", required=True)
    al.add_argument("--p-max", type=int, default=10)
    al.add_argument("--header", action="store_true")
    al.add_argument("--truth")
    al.add_argument("--out-prefix", default="alasso")
    al.set_defaults(func=cmd_alasso)

    be = sub.add_parser("bench", help="run a Monte-Carlo benchmark from a JSON config")
    be.add_argument("--config", required=True,
                    help="config path, or a bundled name like 'paper_table'")
    be.add_argument("--records", default="bench_records.csv")
    be.add_argument("--summary", default="bench_summary.csv")
    be.add_argument("--threads", type=int, default=None)
    be.add_argument("--timing", action="store_true",
                    help="include wall-time in the records CSV")
    be.set_defaults(func=cmd_bench)

    co = sub.add_parser("check-oracle", help="run the exact-recovery fixture battery")
    co.add_argument("--trials", type=int, default=10)
    co.add_argument("--seed", type=int, default=0)
    co.set_defaults(func=cmd_check_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError, GcnetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
