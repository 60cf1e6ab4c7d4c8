"""Directed causality graphs: topology predicates and random generators.

Nodes are labeled 1..n.  An edge ``(j, i)`` means ``j -> i`` ("j drives i").
Self loops never appear in the edge set; autoregressive self terms live on
the diagonal of a :class:`~gcnet.varsim.VarModel` instead.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._rng import as_generator

RngLike = int | np.random.Generator | None


@dataclass(frozen=True)
class DirectedGraph:
    """Immutable directed graph on nodes 1..n with no self loops."""

    n: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"node count must be positive, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(
            self, "edges", frozenset((int(j), int(i)) for j, i in self.edges)
        )
        for j, i in self.edges:
            if not (1 <= j <= self.n and 1 <= i <= self.n):
                raise ValueError(f"edge ({j}, {i}) out of range 1..{self.n}")
            if j == i:
                raise ValueError(f"self loop ({j}, {i}) not allowed in the edge set")

    def parents(self, i: int) -> set[int]:
        """Nodes j with an edge j -> i."""
        self._check_node(i)
        return {j for j, k in self.edges if k == i}

    def children(self, j: int) -> set[int]:
        """Nodes i with an edge j -> i."""
        self._check_node(j)
        return {i for k, i in self.edges if k == j}

    def adjacency(self) -> np.ndarray:
        """(n, n) bool matrix, entry [j-1, i-1] true iff edge j -> i."""
        a = np.zeros((self.n, self.n), dtype=bool)
        for j, i in self.edges:
            a[j - 1, i - 1] = True
        return a

    def _check_node(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise ValueError(f"node {i} out of range 1..{self.n}")


def ancestors(g: DirectedGraph, i: int) -> set[int]:
    """All nodes with a directed path to ``i``.

    ``i`` itself is included only if it lies on a cycle through itself.
    """
    g._check_node(i)
    preds: dict[int, set[int]] = {v: set() for v in range(1, g.n + 1)}
    for j, k in g.edges:
        preds[k].add(j)
    seen: set[int] = set()
    stack = list(preds[i])
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(preds[v] - seen)
    return seen


def is_dag(g: DirectedGraph) -> bool:
    """True iff the graph has no directed cycle (of length >= 2)."""
    return _topological_order(g) is not None


def _topological_order(g: DirectedGraph) -> list[int] | None:
    """Kahn's algorithm; None when a cycle exists."""
    indeg = {v: 0 for v in range(1, g.n + 1)}
    children: dict[int, list[int]] = {v: [] for v in range(1, g.n + 1)}
    for j, i in g.edges:
        indeg[i] += 1
        children[j].append(i)
    frontier = [v for v in range(1, g.n + 1) if indeg[v] == 0]
    order = []
    while frontier:
        v = frontier.pop()
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                frontier.append(c)
    return order if len(order) == g.n else None


def is_strongly_causal(g: DirectedGraph) -> bool:
    """True iff there is at most one directed path between any ordered pair.

    Cyclic graphs fail immediately (any pair sharing a cycle violates the
    bound).  For DAGs, paths are counted by dynamic programming along a
    topological order, saturating at 2.
    """
    order = _topological_order(g)
    if order is None:
        return False
    children: dict[int, list[int]] = {v: [] for v in range(1, g.n + 1)}
    for j, i in g.edges:
        children[j].append(i)
    pos = {v: k for k, v in enumerate(order)}
    for u in range(1, g.n + 1):
        counts = np.zeros(g.n + 1, dtype=np.int64)
        counts[u] = 1
        for v in order[pos[u]:]:
            c = counts[v]
            if c == 0:
                continue
            for w in children[v]:
                counts[w] = min(counts[w] + c, 2)
        counts[u] = 0
        if counts.max(initial=0) > 1:
            return False
    return True


def _reaches(g: DirectedGraph, target: int, banned: int) -> set[int]:
    """Nodes with a path to ``target`` avoiding ``banned`` entirely."""
    preds: dict[int, set[int]] = {v: set() for v in range(1, g.n + 1)}
    for j, k in g.edges:
        if j != banned and k != banned:
            preds[k].add(j)
    seen: set[int] = set()
    stack = list(preds[target])
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(preds[v] - seen)
    return seen


def confounders(g: DirectedGraph, i: int, j: int) -> set[int]:
    """Common ancestors k of (i, j) with a k->...->i path avoiding j and a
    k->...->j path avoiding i."""
    if i == j:
        raise ValueError("confounders requires two distinct nodes")
    g._check_node(i)
    g._check_node(j)
    common = ancestors(g, i) & ancestors(g, j) - {i, j}
    to_i = _reaches(g, i, banned=j)
    to_j = _reaches(g, j, banned=i)
    return {k for k in common if k in to_i and k in to_j}


def random_scg(n: int, rng: RngLike = None) -> DirectedGraph:
    """Uniformly random labeled tree with every edge directed low -> high.

    Uses a Pruefer-sequence construction for exact uniformity.  The result
    is always a strongly causal DAG with n - 1 edges.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    gen = as_generator(rng)
    if n == 1:
        return DirectedGraph(1)
    if n == 2:
        return DirectedGraph(2, frozenset({(1, 2)}))
    prufer = gen.integers(1, n + 1, size=n - 2)
    degree = np.ones(n + 1, dtype=np.int64)
    for v in prufer:
        degree[v] += 1
    edges = set()
    leaves = [v for v in range(1, n + 1) if degree[v] == 1]
    heapq.heapify(leaves)
    for v in prufer:
        leaf = heapq.heappop(leaves)
        edges.add((min(leaf, v), max(leaf, v)))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, int(v))
    a = heapq.heappop(leaves)
    b = heapq.heappop(leaves)
    edges.add((min(a, b), max(a, b)))
    return DirectedGraph(n, frozenset(edges))


def random_dag(n: int, q: float, rng: RngLike = None) -> DirectedGraph:
    """Erdos-Renyi DAG: each pair i < j gets edge i -> j with probability q."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"edge probability must be in [0, 1], got {q}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    gen = as_generator(rng)
    draws = gen.random(size=(n, n))
    edges = {
        (i, j)
        for i in range(1, n + 1)
        for j in range(i + 1, n + 1)
        if draws[i - 1, j - 1] < q
    }
    return DirectedGraph(n, frozenset(edges))


def save_edge_list(g: DirectedGraph, path: str | Path) -> None:
    """Write the text edge-list format: header ``n <count>`` then one
    1-indexed ``j i`` pair per line."""
    lines = [f"n {g.n}"]
    lines += [f"{j} {i}" for j, i in sorted(g.edges)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_edge_list(path: str | Path) -> DirectedGraph:
    """Read the format written by :func:`save_edge_list`."""
    raw = Path(path).read_text().strip().splitlines()
    if not raw or not raw[0].startswith("n "):
        raise ValueError(f"{path}: expected header line 'n <count>'")
    try:
        n = int(raw[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: bad header {raw[0]!r}") from exc
    edges = set()
    for lineno, line in enumerate(raw[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'j i', got {line!r}")
        edges.add((int(parts[0]), int(parts[1])))
    return DirectedGraph(n, frozenset(edges))
