"""Graph recovery from pairwise relations.

Two routes: :func:`recover_oracle` peels exact pairwise relations layer by
layer (provably exact for strongly causal persistent DAG systems), and
:func:`recover_finite` is its finite-sample counterpart that ranks candidate
edges by the F statistic and accepts greedily while keeping the running edge
set strongly causal.  :func:`pwgc_pipeline` chains estimation, thresholding,
recovery and the final least-squares refit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import ceil
from pathlib import Path

import numpy as np

from .errors import InconsistentPairwiseError
from .graphs import DirectedGraph
from .pairwise import PairwiseStats, bh_threshold, compute_pairwise_matrix
from .spectral import ols_refit
from .varsim import VarModel

ACCEPTED = "accepted"
REJECTED_BY_PATH = "rejected-by-path"
REJECTED_BY_SC = "rejected-by-SC"


@dataclass(frozen=True)
class EdgeDecision:
    """One candidate-edge ruling made during recovery."""

    k: int  # outer iteration that processed the edge
    r: int | None  # inner backstep (oracle route only)
    edge: tuple[int, int]
    action: str  # accepted | rejected-by-path | rejected-by-SC
    stat: float | None = None  # F value ordering the candidates (finite route)


@dataclass(frozen=True)
class RecoveryTrace:
    """Candidate set, peeled layers, and per-edge decisions of one run."""

    candidates: frozenset[tuple[int, int]]  # W (oracle) or W_delta (finite)
    layers: tuple[tuple[int, ...], ...]  # P_0, P_1, ...
    decisions: tuple[EdgeDecision, ...]

    def accepted_edges(self) -> set[tuple[int, int]]:
        return {d.edge for d in self.decisions if d.action == ACCEPTED}

    def to_jsonl(self, path: str | Path) -> None:
        """One JSON record per line: the candidate set, each layer, each decision."""
        with open(path, "w") as fh:
            fh.write(json.dumps({"type": "candidates",
                                 "edges": sorted(map(list, self.candidates))}) + "\n")
            for k, layer in enumerate(self.layers):
                fh.write(json.dumps({"type": "layer", "k": k,
                                     "nodes": sorted(layer)}) + "\n")
            for d in self.decisions:
                rec = {"type": "edge", "k": d.k, "r": d.r,
                       "i": d.edge[0], "j": d.edge[1], "action": d.action}
                if d.stat is not None:
                    rec["stat"] = d.stat
                fh.write(json.dumps(rec) + "\n")


def _has_path(src: int, dst: int, edges: set[tuple[int, int]]) -> bool:
    children: dict[int, list[int]] = {}
    for a, b in edges:
        children.setdefault(a, []).append(b)
    stack = [src]
    seen = set()
    while stack:
        v = stack.pop()
        if v == dst:
            return True
        if v in seen:
            continue
        seen.add(v)
        stack.extend(children.get(v, ()))
    return False


def recover_oracle(pw: np.ndarray) -> tuple[DirectedGraph, RecoveryTrace]:
    """Exact layer-peeling recovery from oracle pairwise relations.

    ``pw`` is the (n, n) bool matrix with ``pw[i-1, j-1]`` true iff node j
    pairwise-drives node i.  Candidate edges are the one-directional
    relations (bidirectional pairs are confounder artifacts and are
    dropped); nodes are peeled into parentless layers and each candidate
    from an earlier layer is added unless an explaining path already exists,
    walking nearer layers first.

    Raises InconsistentPairwiseError when peeling stalls, which cannot
    happen for relations produced by a DAG oracle.
    """
    pw = np.asarray(pw, dtype=bool)
    n = pw.shape[0]
    nodes = range(1, n + 1)
    W = {
        (i, j)
        for i in nodes
        for j in nodes
        if i != j and pw[j - 1, i - 1] and not pw[i - 1, j - 1]
    }
    has_parent_in = lambda i, pool: any((s, i) in W for s in pool)

    S = set(nodes)
    layers = [frozenset(i for i in S if not has_parent_in(i, S))]
    E: set[tuple[int, int]] = set()
    decisions: list[EdgeDecision] = []
    k = 1
    while S:
        S = S - layers[k - 1]
        if not S:
            break
        P_k = frozenset(i for i in S if not has_parent_in(i, S))
        if not P_k:
            raise InconsistentPairwiseError(
                "peeling stalled: pairwise relations are not consistent with any DAG"
            )
        layers.append(P_k)
        new: set[tuple[int, int]] = set()
        for r in range(1, k + 1):
            known = E | new
            for i, j in sorted((i, j) for i in layers[k - r] for j in P_k if (i, j) in W):
                if _has_path(i, j, known):
                    decisions.append(EdgeDecision(k, r, (i, j), REJECTED_BY_PATH))
                else:
                    new.add((i, j))
                    decisions.append(EdgeDecision(k, r, (i, j), ACCEPTED))
        E |= new
        k += 1
    graph = DirectedGraph(n, frozenset(E))
    trace = RecoveryTrace(frozenset(W), tuple(tuple(sorted(l)) for l in layers),
                          tuple(decisions))
    return graph, trace


class _StrongCausalGuard:
    """Incremental ancestor/descendant bookkeeping for edge acceptance.

    Keeps the full reachability matrix of the growing edge set; an edge
    (i, j) is admissible iff no node would gain a second path, i.e. nothing
    in anc(i) u {i} already reaches anything in desc(j) u {j} (and the two
    sets are disjoint, which also rules out cycles).
    """

    def __init__(self, n: int):
        self.n = n
        self.reach = np.zeros((n + 1, n + 1), dtype=bool)

    def _closures(self, i: int, j: int):
        above = self.reach[:, i].copy()
        above[i] = True
        below = self.reach[j, :].copy()
        below[j] = True
        return above, below

    def can_add(self, i: int, j: int) -> bool:
        above, below = self._closures(i, j)
        if np.any(above & below):
            return False
        sub = self.reach[np.ix_(above.nonzero()[0], below.nonzero()[0])]
        return not sub.any()

    def add(self, i: int, j: int) -> None:
        above, below = self._closures(i, j)
        self.reach[np.ix_(above.nonzero()[0], below.nonzero()[0])] = True


def recover_finite(
    stats: PairwiseStats, delta: float
) -> tuple[DirectedGraph, RecoveryTrace]:
    """Finite-sample recovery (the PWGC heuristic).

    Candidates are ordered pairs whose P-value clears the threshold and
    whose statistic beats the reverse direction (exact ties enter in
    neither direction).  Nodes are peeled by total incident candidate
    probability; candidates into the current layer are taken in order of
    decreasing F, each accepted only if the growing edge set stays strongly
    causal.  Always returns a strongly causal graph.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must be in [0, 1), got {delta}")
    n = stats.n
    P, F = stats.P, stats.F
    nodes = range(1, n + 1)
    W_delta = {
        (i, j)
        for i in nodes
        for j in nodes
        if i != j and P[j - 1, i - 1] > 1.0 - delta and F[j - 1, i - 1] > F[i - 1, j - 1]
    }

    def incident(i: int, pool: set[int]) -> float:
        return float(sum(P[i - 1, j - 1] for j in pool if (j, i) in W_delta))

    def peel_layer(pool: set[int]) -> frozenset[int]:
        scores = {i: incident(i, pool) for i in pool}
        bound = ceil(min(scores.values()))
        layer = {i for i in pool if scores[i] < bound}
        if not layer:
            layer = {i for i in pool if scores[i] <= bound}
        return frozenset(layer)

    S = set(nodes)
    layers = [peel_layer(S)]
    E: set[tuple[int, int]] = set()
    guard = _StrongCausalGuard(n)
    decisions: list[EdgeDecision] = []
    k = 1
    while S:
        S = S - layers[k - 1]
        if not S:
            break
        P_k = peel_layer(S)
        layers.append(P_k)
        earlier = set().union(*layers[:k])
        candidates = [(i, j) for i in earlier for j in P_k if (i, j) in W_delta]
        candidates.sort(key=lambda e: (-F[e[1] - 1, e[0] - 1], e[0], e[1]))
        for i, j in candidates:
            f = float(F[j - 1, i - 1])
            if guard.can_add(i, j):
                guard.add(i, j)
                E.add((i, j))
                decisions.append(EdgeDecision(k, None, (i, j), ACCEPTED, stat=f))
            else:
                decisions.append(EdgeDecision(k, None, (i, j), REJECTED_BY_SC, stat=f))
        k += 1
    graph = DirectedGraph(n, frozenset(E))
    trace = RecoveryTrace(frozenset(W_delta), tuple(tuple(sorted(l)) for l in layers),
                          tuple(decisions))
    return graph, trace


@dataclass(frozen=True)
class PipelineResult:
    """Everything the end-to-end PWGC run produces."""

    stats: PairwiseStats
    delta: float
    graph: DirectedGraph
    trace: RecoveryTrace
    model: VarModel
    p_refit: int


def pwgc_pipeline(
    x: np.ndarray,
    p_max: int,
    alpha: float = 0.05,
    order_rule: str = "bivariate",
    threads: int = 1,
) -> PipelineResult:
    """Pairwise statistics -> BH threshold -> recovery -> OLS refit.

    The refit order is the largest selected pair order among accepted edges
    (1 when the graph is edgeless, so the refit is a bank of AR(1) models).
    """
    x = np.asarray(x, dtype=float)
    stats = compute_pairwise_matrix(x, p_max, order_rule=order_rule, threads=threads)
    delta = bh_threshold(stats.P, alpha)
    graph, trace = recover_finite(stats, delta)
    p_refit = max((int(stats.orders[j - 1, i - 1]) for i, j in graph.edges), default=1)
    p_refit = max(p_refit, 1)
    model = ols_refit(x, graph, p_refit)
    return PipelineResult(stats, delta, graph, trace, model, p_refit)
