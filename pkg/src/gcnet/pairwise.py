"""Pairwise Granger-causality statistics and the exact population oracle.

For an ordered pair (i, j) the null model predicts x_i from its own past and
the alternative adds the past of x_j; with prediction-error variances
xi_i(p) (restricted) and xi_ij(p) (full) the statistic is

    F = (T / p) * (xi_i(p) / xi_ij(p) - 1),

tested against a chi-square with p degrees of freedom.  Matrix cells follow
the convention ``F[i-1, j-1]`` / ``P[i-1, j-1]`` = statistic / P-value for
"node j drives node i"; diagonals are unused.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.special

from ._rng import as_generator
from .errors import DegenerateCovarianceError, UnstableModelError
from .graphs import DirectedGraph, RngLike, ancestors, confounders, random_scg
from .spectral import XI_FLOOR, estimate_autocovariance, levinson_durbin
from .varsim import VarModel, build_var_model, is_persistent, is_stable, population_autocovariance

ORDER_RULES = ("bivariate", "max")


@dataclass(frozen=True)
class PairwiseStats:
    """Per-pair selected orders, F statistics and edge P-values.

    All matrices are (n, n) with row/column k standing for node k+1;
    ``degenerate[i, j]`` marks pairs whose recursion hit a numerically
    non-PSD state (their F and P are forced to 0).
    """

    orders: np.ndarray
    F: np.ndarray
    P: np.ndarray
    degenerate: np.ndarray

    @property
    def n(self) -> int:
        return self.F.shape[0]


def gc_statistic(xi_restricted: float, xi_full: float, p: int, T: int) -> float:
    """F = (T/p)(xi_restricted/xi_full - 1), clamped below at zero."""
    if xi_full <= 0:
        raise ValueError(f"full-model error variance must be positive, got {xi_full}")
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    if T <= p:
        raise ValueError(f"need T > p, got T={T}, p={p}")
    return max(0.0, (T / p) * (xi_restricted / xi_full - 1.0))


def chi2_cdf(F: float, dof: int) -> float:
    """Chi-square CDF via the regularized lower incomplete gamma P(dof/2, F/2)."""
    if F < 0:
        raise ValueError(f"need F >= 0, got {F}")
    if dof < 1:
        raise ValueError(f"need dof >= 1, got {dof}")
    return float(scipy.special.gammainc(dof / 2.0, F / 2.0))


def _pair_subsequence(R: np.ndarray, i: int, j: int) -> np.ndarray:
    """(p_max+1, 2, 2) slice of R over nodes (i, j), i mapped to index 0."""
    idx = np.array([i - 1, j - 1])
    return R[:, idx[:, None], idx[None, :]]


def _inv2(M: np.ndarray, ok: np.ndarray) -> np.ndarray:
    """Batched 2x2 inverse; marks pairs with vanishing determinant bad."""
    det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    bad = ~(np.abs(det) > 0)
    ok &= ~bad
    det = np.where(bad, 1.0, det)
    out = np.empty_like(M)
    out[:, 0, 0] = M[:, 1, 1] / det
    out[:, 1, 1] = M[:, 0, 0] / det
    out[:, 0, 1] = -M[:, 0, 1] / det
    out[:, 1, 0] = -M[:, 1, 0] / det
    return out


def _whittle_batch(R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Whittle recursion over a stack of bivariate autocovariance sequences.

    R has shape (B, L+1, 2, 2).  Returns ``(xi, ok)`` where xi[b, p] is the
    order-p forward error covariance of pair b and ok[b] is False for pairs
    that hit a degenerate state (their xi rows are unusable from the failing
    order on).  Matches :func:`gcnet.spectral.whittle_bivariate` pair by
    pair on healthy input.
    """
    B, L1 = R.shape[0], R.shape[1]
    L = L1 - 1
    xi = np.zeros((B, L1, 2, 2))
    xi[:, 0] = R[:, 0]
    ok = (
        (R[:, 0, 0, 0] > 0)
        & (R[:, 0, 1, 1] > 0)
        & (R[:, 0, 0, 0] * R[:, 0, 1, 1] - R[:, 0, 0, 1] * R[:, 0, 1, 0] > 0)
    )
    sf = np.where(ok[:, None, None], R[:, 0], np.eye(2))
    sb = sf.copy()
    A = np.zeros((B, L, 2, 2))
    Bc = np.zeros((B, L, 2, 2))
    for m in range(L):
        delta = R[:, m + 1].copy()
        if m:
            delta -= np.einsum("bkij,bkjl->bil", A[:, :m], R[:, m:0:-1])
        delta[~ok] = 0.0
        kf = np.einsum("bij,bjk->bik", delta, _inv2(sb, ok))
        kb = np.einsum("bji,bjk->bik", delta, _inv2(sf, ok))
        if m:
            A_head = A[:, :m] - np.einsum("bij,bkjl->bkil", kf, Bc[:, m - 1 :: -1])
            B_head = Bc[:, :m] - np.einsum("bij,bkjl->bkil", kb, A[:, m - 1 :: -1])
            A[:, :m] = A_head
            Bc[:, :m] = B_head
        A[:, m] = kf
        Bc[:, m] = kb
        sf = sf - np.einsum("bij,bkj->bik", kf, delta)
        sb = sb - np.einsum("bij,bjk->bik", kb, delta)
        sf = 0.5 * (sf + sf.transpose(0, 2, 1))
        sb = 0.5 * (sb + sb.transpose(0, 2, 1))
        ok &= (sf[:, 0, 0] > 0) & (sf[:, 1, 1] > 0) & (sb[:, 0, 0] > 0) & (sb[:, 1, 1] > 0)
        sf = np.where(ok[:, None, None], sf, np.eye(2))
        sb = np.where(ok[:, None, None], sb, np.eye(2))
        xi[:, m + 1] = sf
    return xi, ok


def _pair_stack(R: np.ndarray, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    """Gather (B, L+1, 2, 2) bivariate slices for pair index arrays (0-based)."""
    stack = np.empty((len(ii), R.shape[0], 2, 2))
    stack[:, :, 0, 0] = R[:, ii, ii].T
    stack[:, :, 0, 1] = R[:, ii, jj].T
    stack[:, :, 1, 0] = R[:, jj, ii].T
    stack[:, :, 1, 1] = R[:, jj, jj].T
    return stack


def _bivariate_bic_orders(xi: np.ndarray, ok: np.ndarray, T: int) -> np.ndarray:
    """Per-pair BIC-minimizing orders from a stacked xi curve."""
    L = xi.shape[1] - 1
    det = xi[:, :, 0, 0] * xi[:, :, 1, 1] - xi[:, :, 0, 1] * xi[:, :, 1, 0]
    penalties = 4.0 * np.arange(L + 1) * np.log(T) / T
    bic = np.log(np.maximum(det, XI_FLOOR)) + penalties
    bic[~ok] = 0.0  # value irrelevant; degenerate pairs are masked by callers
    return np.argmin(bic, axis=1)


def compute_pairwise_matrix(
    x: np.ndarray,
    p_max: int,
    order_rule: str = "bivariate",
    threads: int = 1,
) -> PairwiseStats:
    """All-pairs finite-sample Granger statistics from one covariance pass.

    Estimates R_hat once, runs one univariate Levinson recursion per node
    and one bivariate Whittle recursion per unordered pair, selects the pair
    order by bivariate BIC, and forms F / P per ordered pair.  With
    ``order_rule="max"`` the tested order is instead the maximum of the
    bivariate order and the univariate BIC order of the target node.  A
    selected order of 0 means "no temporal structure": F = 0, P = 0.

    Pairs are independent and processed as a vectorized batch; ``threads``
    splits the batch across a thread pool.  Results land in disjoint cells,
    so output is schedule-invariant.  Degenerate pairs are flagged rather
    than failing the batch.
    """
    if order_rule not in ORDER_RULES:
        raise ValueError(f"order_rule must be one of {ORDER_RULES}, got {order_rule!r}")
    x = np.asarray(x, dtype=float)
    T, n = x.shape
    if p_max < 1:
        raise ValueError(f"need p_max >= 1, got {p_max}")
    if T <= p_max:
        raise ValueError(f"need T > p_max, got T={T}, p_max={p_max}")
    R = estimate_autocovariance(x, p_max)

    xi_uni = np.zeros((n, p_max + 1))
    uni_orders = np.zeros(n, dtype=int)
    bad_node = np.zeros(n, dtype=bool)
    for i in range(n):
        try:
            curve = levinson_durbin(R[:, i, i])
            xi_uni[i] = curve.xi
            bic = np.log(np.maximum(curve.xi, XI_FLOOR)) + np.arange(p_max + 1) * np.log(T) / T
            uni_orders[i] = int(np.argmin(bic))
        except DegenerateCovarianceError:
            bad_node[i] = True

    ii, jj = np.triu_indices(n, k=1)
    stack = _pair_stack(R, ii, jj)

    if threads > 1 and len(ii) > 1:
        chunks = np.array_split(np.arange(len(ii)), threads)
        xi = np.empty((len(ii), p_max + 1, 2, 2))
        ok = np.empty(len(ii), dtype=bool)

        def run(chunk):
            if len(chunk):
                xi[chunk], ok[chunk] = _whittle_batch(stack[chunk])

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, chunks))
    else:
        xi, ok = _whittle_batch(stack)
    ok &= ~(bad_node[ii] | bad_node[jj])
    p_biv = _bivariate_bic_orders(xi, ok, T)

    orders = np.zeros((n, n), dtype=int)
    F = np.zeros((n, n))
    P = np.zeros((n, n))
    degenerate = np.zeros((n, n), dtype=bool)
    degenerate[ii[~ok], jj[~ok]] = True
    degenerate[jj[~ok], ii[~ok]] = True

    b_idx = np.arange(len(ii))
    for target, other, slot in ((ii, jj, 0), (jj, ii, 1)):
        p_sel = p_biv.copy()
        if order_rule == "max":
            p_sel = np.maximum(p_sel, uni_orders[target])
        orders[target, other] = np.where(ok, p_sel, 0)
        live = ok & (p_sel >= 1)
        xi_full = xi[b_idx, p_sel, slot, slot]
        xi_restr = xi_uni[target, p_sel]
        bad_xi = live & ((xi_full <= 0) | (xi_restr <= 0))
        degenerate[target[bad_xi], other[bad_xi]] = True
        live &= ~bad_xi
        f = np.zeros(len(ii))
        f[live] = np.maximum(
            0.0, (T / p_sel[live]) * (xi_restr[live] / xi_full[live] - 1.0)
        )
        pvals = np.zeros(len(ii))
        pvals[live] = scipy.special.gammainc(p_sel[live] / 2.0, f[live] / 2.0)
        F[target, other] = f
        P[target, other] = pvals
    return PairwiseStats(orders, F, P, degenerate)


def bh_threshold(P: np.ndarray, alpha: float) -> float:
    """Benjamini-Hochberg acceptance threshold for the edge P-value matrix.

    Treats q = 1 - P over the n(n-1) off-diagonal cells as p-values, applies
    the step-up rule at level alpha, and returns delta such that the strict
    acceptance rule ``P > 1 - delta`` keeps exactly the BH-selected cells.
    (The boundary is nudged by one ulp so equality at the largest accepted
    q-value passes the strict test.)  Returns 0.0 when nothing is selected.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    off = ~np.eye(n, dtype=bool)
    q = np.sort(1.0 - P[off])
    m = q.size
    ranks = np.arange(1, m + 1)
    passing = np.nonzero(q <= alpha * ranks / m)[0]
    if passing.size == 0:
        return 0.0
    q_star = q[passing[-1]]
    # Smallest accepted P-value, then one ulp below it so "P > 1 - delta" keeps it.
    p_min = 1.0 - q_star
    return float(1.0 - np.nextafter(p_min, -np.inf))


DEFAULT_ORACLE_FLOOR = 64  # truncation artifacts decay below tol well before this


def _oracle_order(m: VarModel, p_oracle: int | None) -> int:
    # 4p alone leaves truncation artifacts far above any usable tolerance;
    # the floor keeps them below ~1e-10 for pole radius 3/4.
    return max(4 * m.p, DEFAULT_ORACLE_FLOOR) if p_oracle is None else p_oracle


def _oracle_improvements(m: VarModel, p_oracle: int) -> np.ndarray:
    """rel[i-1, j-1]: relative drop of node i's prediction error when the
    past of node j joins, from exact Yule-Walker solves at order p_oracle."""
    R = population_autocovariance(m, p_oracle)
    n = m.n
    xi_uni = np.empty(n)
    for i in range(n):
        xi_uni[i] = levinson_durbin(R[:, i, i]).xi[p_oracle]
    ii, jj = np.triu_indices(n, k=1)
    xi, ok = _whittle_batch(_pair_stack(R, ii, jj))
    if not ok.all():
        bad = np.nonzero(~ok)[0][0]
        raise DegenerateCovarianceError(
            f"population covariance degenerate for pair ({ii[bad] + 1}, {jj[bad] + 1})"
        )
    rel = np.zeros((n, n))
    rel[ii, jj] = (xi_uni[ii] - xi[:, p_oracle, 0, 0]) / xi_uni[ii]
    rel[jj, ii] = (xi_uni[jj] - xi[:, p_oracle, 1, 1]) / xi_uni[jj]
    return rel


def oracle_pairwise(
    m: VarModel, p_oracle: int | None = None, tol: float = 1e-8
) -> np.ndarray:
    """Deterministic pairwise relations from exact population moments.

    Returns an (n, n) bool matrix ``pw`` with ``pw[i-1, j-1]`` true iff node
    j pairwise-drives node i: the exact bivariate Yule-Walker solve at order
    ``p_oracle`` improves on the univariate one by more than
    ``tol * xi_i``.  ``p_oracle`` defaults to max(4p, 64): pairwise
    projections of a VAR(p) are generically infinite-order, and the floor
    keeps truncation artifacts far below ``tol``.
    """
    if not is_stable(m):
        raise UnstableModelError("oracle requires a stable model")
    p_oracle = _oracle_order(m, p_oracle)
    return _oracle_improvements(m, p_oracle) > tol


def oracle_wellposed(
    m: VarModel,
    p_oracle: int | None = None,
    pos_margin: float = 1e-6,
    zero_margin: float = 1e-10,
) -> bool:
    """Whether the model's pairwise structure is resolvable in float64.

    The recovery theory predicts, from the topology alone, which pairwise
    improvements are strictly positive (ancestor relations, both directions
    of confounded pairs) and which vanish exactly (everything else).  True
    iff every predicted-positive improvement exceeds ``pos_margin`` and
    every predicted-zero one stays below ``zero_margin``.  Systems failing
    this sit numerically on the boundary of the no-cancellation assumption,
    where no finite-precision oracle can classify their relations.
    """
    if not is_stable(m):
        raise UnstableModelError("oracle requires a stable model")
    g = m.topology
    rel = _oracle_improvements(m, _oracle_order(m, p_oracle))
    anc = {i: ancestors(g, i) for i in range(1, g.n + 1)}
    for i in range(1, g.n + 1):
        for j in range(1, g.n + 1):
            if i == j:
                continue
            positive = j in anc[i] or (
                i not in anc[j] and bool(confounders(g, i, j))
            )
            if positive and rel[i - 1, j - 1] <= pos_margin:
                return False
            if not positive and rel[i - 1, j - 1] >= zero_margin:
                return False
    return True


def draw_wellposed_scg(
    n: int, p: int, rng: RngLike = None, max_tries: int = 200
) -> tuple[DirectedGraph, VarModel]:
    """Random persistent SCG system whose oracle relations are resolvable.

    Rejection-samples (tree topology, random filters) until the persistence
    proxy and :func:`oracle_wellposed` both pass, i.e. until the drawn
    system satisfies the recovery theorem's hypotheses with numeric margin.
    """
    gen = as_generator(rng)
    for _ in range(max_tries):
        g = random_scg(n, gen)
        model = build_var_model(g, p, gen)
        if is_persistent(model) and oracle_wellposed(model):
            return g, model
    raise RuntimeError(f"no well-posed system found in {max_tries} draws")
