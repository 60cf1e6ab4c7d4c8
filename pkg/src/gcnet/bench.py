"""Seeded Monte-Carlo benchmark comparing PWGC against the adaptive LASSO.

Every replicate owns RNG streams derived from the master seed by its
(topology, T, replicate) coordinates, so results are byte-identical across
runs and worker counts, and both algorithms see the same data and the same
out-of-sample evaluation stream (paired comparison).
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .adalasso import adalasso_graph
from .errors import DegenerateMetricError
from .graphs import random_dag, random_scg
from .metrics import confusion, fdp, lre, mcc
from .recovery import pwgc_pipeline
from .varsim import build_var_model, simulate

ALGORITHMS = ("pwgc", "alasso")


@dataclass(frozen=True)
class BenchConfig:
    """One benchmark run: the cross product of topologies, T values and
    algorithms, replicated with paired seeds."""

    topologies: tuple[str, ...]  # "scg" or "dag:<q>"
    n: int
    p_true: int
    p_max: int
    T_values: tuple[int, ...]
    algorithms: tuple[str, ...]
    replicates: int
    alpha: float = 0.05
    master_seed: int = 0
    T_out: int = 10_000
    order_rule: str = "bivariate"

    def __post_init__(self):
        object.__setattr__(self, "topologies", tuple(self.topologies))
        object.__setattr__(self, "T_values", tuple(int(t) for t in self.T_values))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.topologies:
            raise ValueError("need at least one topology")
        for topo in self.topologies:
            parse_topology(topo)
        if not self.algorithms:
            raise ValueError("need at least one algorithm")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {alg!r}; choose from {ALGORITHMS}")
        if min(self.n, self.p_true, self.p_max) < 1 or self.replicates < 0:
            raise ValueError("n, p_true, p_max must be positive; replicates nonnegative")
        if not self.T_values or min(self.T_values) <= self.p_max:
            raise ValueError("every T must exceed p_max")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchConfig":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, path: str | Path) -> "BenchConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def parse_topology(tag: str) -> tuple[str, float | None]:
    """"scg" -> ("scg", None); "dag:0.04" -> ("dag", 0.04)."""
    if tag == "scg":
        return "scg", None
    if tag.startswith("dag:"):
        q = float(tag[4:])
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"edge probability out of [0, 1] in topology {tag!r}")
        return "dag", q
    raise ValueError(f"topology must be 'scg' or 'dag:<q>', got {tag!r}")


@dataclass(frozen=True)
class BenchRecord:
    """One (replicate, algorithm) outcome."""

    topology: str
    n: int
    p: int
    p_max: int
    T: int
    seed: int  # replicate index; identical across algorithms on shared data
    algorithm: str
    mcc: float | None
    fdp: float | None
    lre: float | None  # None when the ratio was degenerate for this truth
    wall_time: float
    status: str  # "ok" | "lre-degenerate" | "failed: <reason>"


def _run_cell(config: BenchConfig, topo_idx: int, t_idx: int, rep: int) -> list[BenchRecord]:
    """All algorithms on one shared dataset; deterministic in its coordinates."""
    tag = config.topologies[topo_idx]
    T = config.T_values[t_idx]
    root = np.random.SeedSequence(entropy=config.master_seed,
                                  spawn_key=(topo_idx, t_idx, rep))
    seed_model, seed_sim, seed_lre = root.spawn(3)
    try:
        rng_model = np.random.default_rng(seed_model)
        kind, q = parse_topology(tag)
        graph = random_scg(config.n, rng_model) if kind == "scg" else random_dag(config.n, q, rng_model)
        truth = build_var_model(graph, config.p_true, rng_model)
        data = simulate(truth, T, rng=np.random.default_rng(seed_sim))
    except Exception as exc:  # generation failed: every algorithm's record says so
        return [
            BenchRecord(tag, config.n, config.p_true, config.p_max, T, rep, alg,
                        None, None, None, 0.0, f"failed: {exc}")
            for alg in config.algorithms
        ]

    records = []
    for alg in config.algorithms:
        t0 = time.perf_counter()
        est_graph = est_model = None
        status = "ok"
        mcc_v = fdp_v = lre_v = None
        try:
            if alg == "pwgc":
                result = pwgc_pipeline(data, config.p_max, alpha=config.alpha,
                                       order_rule=config.order_rule)
                est_graph, est_model = result.graph, result.model
            else:
                est_graph, est_model = adalasso_graph(data, config.p_max)
            counts = confusion(graph, est_graph)
            mcc_v = mcc(counts)
            fdp_v = fdp(counts)
            try:
                lre_v = lre(truth, est_model, config.T_out,
                            rng=np.random.default_rng(seed_lre))
            except DegenerateMetricError:
                status = "lre-degenerate"
        except Exception as exc:  # record the failure, keep the batch going
            status = f"failed: {exc}"
        records.append(BenchRecord(tag, config.n, config.p_true, config.p_max, T,
                                   rep, alg, mcc_v, fdp_v, lre_v,
                                   time.perf_counter() - t0, status))
    return records


def run_benchmark(config: BenchConfig, workers: int = 1) -> list[BenchRecord]:
    """Run every (topology, T, replicate) cell, optionally on a process pool.

    Output order and content are independent of ``workers``.
    """
    tasks = [
        (topo_idx, t_idx, rep)
        for topo_idx in range(len(config.topologies))
        for t_idx in range(len(config.T_values))
        for rep in range(config.replicates)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = pool.map(_run_cell, *zip(*[(config, *t) for t in tasks]), chunksize=1)
            nested = list(chunks)
    else:
        nested = [_run_cell(config, *t) for t in tasks]
    return [rec for cell in nested for rec in cell]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


RECORD_FIELDS = ("topology", "n", "p", "p_max", "T", "seed", "algorithm",
                 "mcc", "fdp", "lre", "status")


def write_records_csv(records: list[BenchRecord], path: str | Path,
                      timing: bool = False) -> None:
    """Per-replicate records; wall-time only on request (it breaks
    byte-for-byte determinism across runs)."""
    fields = RECORD_FIELDS + (("wall_time",) if timing else ())
    with open(path, "w") as fh:
        fh.write(",".join(fields) + "\n")
        for r in records:
            row = [_fmt(getattr(r, f)) for f in fields]
            status_idx = fields.index("status")
            row[status_idx] = r.status.replace(",", ";")
            fh.write(",".join(row) + "\n")


def summarize(records: list[BenchRecord]) -> list[dict]:
    """Per (topology, T, algorithm): median/IQR/mean of MCC, FDP, LRE.

    Failed replicates are excluded from all aggregates and counted;
    LRE-degenerate replicates are excluded from the LRE aggregates only.
    MCC distributions are skewed at small T, hence median and IQR next to
    the mean.
    """
    order: list[tuple] = []
    groups: dict[tuple, list[BenchRecord]] = {}
    for r in records:
        key = (r.topology, r.T, r.algorithm)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)
    rows = []
    for key in order:
        recs = groups[key]
        good = [r for r in recs if not r.status.startswith("failed")]
        row = {
            "topology": key[0],
            "T": key[1],
            "algorithm": key[2],
            "replicates": len(recs),
            "failures": len(recs) - len(good),
        }
        for metric in ("mcc", "fdp", "lre"):
            vals = np.array([getattr(r, metric) for r in good
                             if getattr(r, metric) is not None])
            if metric == "lre":
                row["lre_excluded"] = sum(1 for r in good if r.lre is None)
            if len(vals):
                q25, q50, q75 = np.percentile(vals, [25, 50, 75])
                row[f"{metric}_median"] = float(q50)
                row[f"{metric}_iqr"] = float(q75 - q25)
                row[f"{metric}_mean"] = float(vals.mean())
            else:
                row[f"{metric}_median"] = None
                row[f"{metric}_iqr"] = None
                row[f"{metric}_mean"] = None
        rows.append(row)
    return rows


SUMMARY_FIELDS = ("topology", "T", "algorithm", "replicates", "failures",
                  "mcc_median", "mcc_iqr", "mcc_mean",
                  "fdp_median", "fdp_iqr", "fdp_mean",
                  "lre_median", "lre_iqr", "lre_mean", "lre_excluded")


def write_summary_csv(records: list[BenchRecord], path: str | Path) -> None:
    rows = summarize(records)
    with open(path, "w") as fh:
        fh.write(",".join(SUMMARY_FIELDS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[f]) for f in SUMMARY_FIELDS) + "\n")
