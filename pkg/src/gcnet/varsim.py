"""Ground-truth VAR(p) models: construction, simulation, and population moments.

Conventions
-----------
A model of dimension n and lag order p stores a coefficient tensor
``coeffs`` of shape (n, n, p) where ``coeffs[i-1, j-1, tau-1]`` is the weight
of ``x_j(t - tau)`` in the equation for ``x_i(t)``:

    x(t) = sum_{tau=1..p} B(tau) x(t - tau) + v(t),    B(tau) = coeffs[:, :, tau-1]

Innovations v(t) are independent zero-mean Gaussians with per-component
variances ``noise_vars``.  Series are (T, n) float arrays, row t holding
x(t)^T.  Autocovariance sequences are (max_lag + 1, n, n) arrays with
R[tau] = E x(t) x(t - tau)^T; moving-average expansions are (K + 1, n, n)
arrays with A[0] = I.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from ._rng import as_generator
from .errors import UnstableModelError
from .graphs import DirectedGraph, RngLike, ancestors, is_dag

STABILITY_MARGIN = 1e-9


@dataclass(frozen=True)
class VarModel:
    """A finite-order VAR model tied to an explicit graph topology.

    Off-diagonal coefficients are exactly zero wherever the topology has no
    edge; noise variances are strictly positive.
    """

    coeffs: np.ndarray  # (n, n, p)
    noise_vars: np.ndarray  # (n,)
    topology: DirectedGraph
    rank_deficient: tuple[int, ...] = ()  # nodes whose LS refit was rank-deficient

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        noise = np.array(self.noise_vars, dtype=float)
        if coeffs.ndim != 3 or coeffs.shape[0] != coeffs.shape[1]:
            raise ValueError(f"coeffs must be (n, n, p), got {coeffs.shape}")
        n = coeffs.shape[0]
        if noise.shape != (n,):
            raise ValueError(f"noise_vars must have shape ({n},), got {noise.shape}")
        if not np.all(np.isfinite(coeffs)) or not np.all(np.isfinite(noise)):
            raise ValueError("model parameters must be finite")
        if np.any(noise <= 0):
            raise ValueError("noise variances must be strictly positive")
        if self.topology.n != n:
            raise ValueError(
                f"topology has {self.topology.n} nodes but coeffs are {n}-dimensional"
            )
        allowed = self.topology.adjacency().T  # allowed[i-1, j-1]: edge j -> i
        np.fill_diagonal(allowed, True)
        if np.any(coeffs[~allowed, :] != 0.0):
            raise ValueError("nonzero coefficient outside the topology's sparsity pattern")
        coeffs.flags.writeable = False
        noise.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "noise_vars", noise)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def p(self) -> int:
        return self.coeffs.shape[2]


def companion_matrix(m: VarModel) -> np.ndarray:
    """(np, np) companion form: top block row holds B(1)..B(p)."""
    n, p = m.n, m.p
    top = np.concatenate([m.coeffs[:, :, t] for t in range(p)], axis=1)
    if p == 1:
        return top
    lower = np.eye(n * (p - 1), n * p)
    return np.vstack([top, lower])


def is_stable(m: VarModel) -> bool:
    """True iff the companion spectral radius is below 1 - 1e-9."""
    radius = np.abs(np.linalg.eigvals(companion_matrix(m))).max()
    return bool(radius < 1.0 - STABILITY_MARGIN)


def random_filter_from_poles(p: int, radius: float, rng: RngLike = None) -> np.ndarray:
    """Coefficients b(1..p) of a stable scalar AR filter with random poles.

    Draws floor(p/2) conjugate pole pairs uniformly from the complex disc of
    the given radius plus, for odd p, one real pole uniform on
    (-radius, radius), then expands the monic polynomial
    z^p - b(1) z^(p-1) - ... - b(p) with those roots.  Realness of the
    coefficients is exact by the conjugate-pair construction.
    """
    if p < 1:
        raise ValueError(f"filter order must be >= 1, got {p}")
    if not 0.0 < radius < 1.0:
        raise ValueError(f"pole radius must lie in (0, 1), got {radius}")
    gen = as_generator(rng)
    roots = []
    for _ in range(p // 2):
        # Uniform over the disc: sqrt-radial density, angle in (0, pi).
        rho = radius * np.sqrt(gen.random())
        theta = np.pi * gen.random()
        z = rho * np.exp(1j * theta)
        roots.extend([z, np.conj(z)])
    if p % 2:
        roots.append(complex(gen.uniform(-radius, radius)))
    poly = np.poly(np.asarray(roots))  # [1, c1, ..., cp], roots of z^p + c1 z^(p-1) + ...
    b = -np.real(poly[1:])
    return b


def build_var_model(g: DirectedGraph, p: int, rng: RngLike = None) -> VarModel:
    """Populate a DAG topology with random stable filters and random noise.

    Every edge (j, i) and every diagonal (i, i) receives an independent
    filter from :func:`random_filter_from_poles` with pole radius 3/4;
    noise variances are 1/2 + Exponential(mean 1/2), so E sigma_i^2 = 1.
    (An exp(1/2) convention could also mean rate 1/2, i.e. mean 2; this
    implementation uses mean 1/2.)  Acyclicity makes the block-triangular
    system stable by construction.
    """
    if not is_dag(g):
        raise ValueError("build_var_model requires a DAG topology")
    gen = as_generator(rng)
    n = g.n
    coeffs = np.zeros((n, n, p))
    for i in range(1, n + 1):
        for j in sorted(g.parents(i) | {i}):
            coeffs[i - 1, j - 1, :] = random_filter_from_poles(p, 0.75, gen)
    noise = 0.5 + gen.exponential(scale=0.5, size=n)
    model = VarModel(coeffs, noise, g)
    if not is_stable(model):  # acyclic + per-filter pole bound makes this unreachable
        raise UnstableModelError("constructed model is unstable")
    return model


def default_burn_in(m: VarModel) -> int:
    """Generous burn-in: 10*n*p samples, at least 1000."""
    return max(1000, 10 * m.n * m.p)


def simulate(
    m: VarModel, T: int, burn_in: int | None = None, rng: RngLike = None
) -> np.ndarray:
    """Simulate T samples after discarding ``burn_in`` from zero initial state.

    Returns a (T, n) array; deterministic for a fixed seed.
    """
    if T < 1:
        raise ValueError(f"need T >= 1, got {T}")
    if not is_stable(m):
        raise UnstableModelError("refusing to simulate an unstable model")
    if burn_in is None:
        burn_in = default_burn_in(m)
    gen = as_generator(rng)
    n, p = m.n, m.p
    total = burn_in + T
    x = gen.normal(size=(total, n)) * np.sqrt(m.noise_vars)  # starts as pure noise
    lag_mats = [np.ascontiguousarray(m.coeffs[:, :, tau]) for tau in range(p)]
    for t in range(total):
        for tau in range(1, min(t, p) + 1):
            x[t] += lag_mats[tau - 1] @ x[t - tau]
    return x[burn_in:]


def ma_expansion(m: VarModel, K: int) -> np.ndarray:
    """Moving-average matrices A(0..K) of the model, A(0) = I.

    Uses the convolution recursion A(k) = sum_{tau<=min(k,p)} B(tau) A(k-tau),
    equivalent to the Neumann series of (I - B(z))^{-1}.
    """
    if K < 0:
        raise ValueError(f"need K >= 0, got {K}")
    if not is_stable(m):
        raise UnstableModelError("MA expansion requires a stable model")
    n, p = m.n, m.p
    A = np.zeros((K + 1, n, n))
    A[0] = np.eye(n)
    for k in range(1, K + 1):
        for tau in range(1, min(k, p) + 1):
            A[k] += m.coeffs[:, :, tau - 1] @ A[k - tau]
    return A


@dataclass(frozen=True)
class PersistenceReport:
    """Verdict of the truncated persistence proxy plus the failing pairs."""

    persistent: bool
    failures: tuple[tuple[int, int], ...]  # (i, ancestor k) pairs that failed

    def __bool__(self) -> bool:
        return self.persistent


def is_persistent(m: VarModel, K: int = 16, tol: float = 1e-10) -> PersistenceReport:
    """Proxy check that every ancestor filter A_ik has full temporal support.

    For each node i and each ancestor k, requires some |A_ik(tau)| > tol with
    tau <= K (finite first lag) and some |A_ik(tau)| > tol with tau in the
    last quarter of the window (stand-in for "no last lag", which is
    undecidable from a truncation).  The short default window matters:
    geometric tails drop below any fixed threshold eventually, so long
    windows misread slow filters as terminating.
    """
    A = ma_expansion(m, K)
    tail_start = K - K // 4 + 1  # last quarter of lags 1..K
    failures = []
    for i in range(1, m.n + 1):
        for k in sorted(ancestors(m.topology, i) - {i}):
            coef = np.abs(A[1:, i - 1, k - 1])
            if not (coef > tol).any():
                failures.append((i, k))
            elif not (coef[tail_start - 1 :] > tol).any():
                failures.append((i, k))
    return PersistenceReport(not failures, tuple(failures))


def population_autocovariance(m: VarModel, max_lag: int) -> np.ndarray:
    """Exact R(0..max_lag) of the stationary process, R[tau] = E x(t)x(t-tau)^T.

    Solves the companion-form discrete Lyapunov equation for the stacked
    covariance, then extends by the Yule-Walker propagation
    R(tau) = sum_k B(k) R(tau - k).
    """
    if max_lag < 0:
        raise ValueError(f"need max_lag >= 0, got {max_lag}")
    if not is_stable(m):
        raise UnstableModelError("population autocovariance requires a stable model")
    n, p = m.n, m.p
    F = companion_matrix(m)
    Q = np.zeros((n * p, n * p))
    Q[:n, :n] = np.diag(m.noise_vars)
    P = scipy.linalg.solve_discrete_lyapunov(F, Q)
    R = np.zeros((max_lag + 1, n, n))
    for tau in range(min(p, max_lag + 1)):
        R[tau] = P[:n, tau * n : (tau + 1) * n]
    R[0] = 0.5 * (R[0] + R[0].T)
    for tau in range(p, max_lag + 1):
        for k in range(1, p + 1):
            R[tau] += m.coeffs[:, :, k - 1] @ R[tau - k]
    return R


def save_model(m: VarModel, path: str | Path) -> None:
    """Write the model as structured JSON (n, p, coeffs, noise_vars, edges)."""
    doc = {
        "n": m.n,
        "p": m.p,
        "coeffs": m.coeffs.tolist(),
        "noise_vars": m.noise_vars.tolist(),
        "edges": sorted(list(e) for e in m.topology.edges),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_model(path: str | Path) -> VarModel:
    doc = json.loads(Path(path).read_text())
    g = DirectedGraph(doc["n"], frozenset(tuple(e) for e in doc["edges"]))
    return VarModel(np.asarray(doc["coeffs"], dtype=float),
                    np.asarray(doc["noise_vars"], dtype=float), g)


def save_series(x: np.ndarray, path: str | Path, header: bool = False) -> None:
    """Write a (T, n) series as CSV, one row per time step.

    Values use shortest round-trip decimal form (``repr``), so files are
    byte-stable for identical inputs.  No header unless requested.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"series must be 2-D (T, n), got shape {x.shape}")
    with open(path, "w") as fh:
        if header:
            fh.write(",".join(f"x{i}" for i in range(1, x.shape[1] + 1)) + "\n")
        for row in x:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_series(path: str | Path, header: bool = False) -> np.ndarray:
    """Read a CSV written by :func:`save_series`.

    Raises ValueError with 1-based row/column coordinates on malformed input.
    """
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno == 1 and header:
                continue
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ValueError(
                    f"{path}: row {lineno} has {len(cells)} columns, expected {width}"
                )
            parsed = []
            for col, cell in enumerate(cells, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError as exc:
                    raise ValueError(
                        f"{path}: row {lineno}, column {col}: not a number: {cell!r}"
                    ) from exc
            rows.append(parsed)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)
