"""Finite-sample covariance estimation and fast recursive AR fitting.

The windowed ("autocorrelation method") estimator

    R_hat(tau) = (1/T) sum_{t=tau+1..T} x(t) x(t-tau)^T

is positive semidefinite by construction, which lets the Levinson-Durbin
recursion (scalar) and Whittle's generalized recursion (2x2 blocks) walk the
whole order path 0..p_max in O(p_max^2), producing every prediction-error
variance as a side effect.  Both recursions solve the exact Yule-Walker
systems at each order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCovarianceError
from .graphs import DirectedGraph
from .varsim import VarModel

XI_FLOOR = 1e-300  # clamp for nonpositive error variances before logs


@dataclass(frozen=True)
class OrderCurve:
    """Prediction-error curve over model orders 0..p_max.

    ``xi`` has shape (p_max+1,) for a scalar curve (error variances) or
    (p_max+1, 2, 2) for a bivariate curve (forward error covariances);
    ``coeffs[p]`` holds the order-p predictor coefficients, shape (p,) or
    (p, 2, 2).  xi is non-increasing along the curve and xi[0] equals R(0).
    """

    xi: np.ndarray
    coeffs: tuple[np.ndarray, ...]

    @property
    def p_max(self) -> int:
        return len(self.coeffs) - 1

    @property
    def mode(self) -> str:
        return "univariate" if self.xi.ndim == 1 else "bivariate"


def estimate_autocovariance(x: np.ndarray, p_max: int) -> np.ndarray:
    """Windowed sample autocovariance R_hat(0..p_max) of a (T, n) series.

    The summation starts at t = tau + 1 and the normalization is 1/T; both
    are required for the block-Toeplitz sequence to be PSD.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"series must be (T, n), got shape {x.shape}")
    T, n = x.shape
    if not 0 <= p_max < T:
        raise ValueError(f"need 0 <= p_max < T, got p_max={p_max}, T={T}")
    R = np.empty((p_max + 1, n, n))
    for tau in range(p_max + 1):
        R[tau] = x[tau:].T @ x[: T - tau] / T
    return R


def levinson_durbin(r: np.ndarray) -> OrderCurve:
    """Levinson-Durbin recursion on a scalar autocovariance sequence.

    Parameters
    ----------
    r : (p_max+1,) array
        Autocovariances r(0..p_max) of a PSD sequence with r(0) > 0.

    Returns
    -------
    OrderCurve with xi[p] the order-p prediction-error variance and
    coeffs[p] solving the order-p Yule-Walker system.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or len(r) < 1:
        raise ValueError("need a 1-D autocovariance sequence")
    if r[0] <= 0:
        raise DegenerateCovarianceError(f"r(0) must be positive, got {r[0]}", order=0)
    p_max = len(r) - 1
    xi = np.empty(p_max + 1)
    xi[0] = r[0]
    coeffs: list[np.ndarray] = [np.zeros(0)]
    a = np.zeros(0)
    for m in range(p_max):
        delta = r[m + 1] - a @ r[m:0:-1] if m else r[1]
        k = delta / xi[m]
        if abs(k) >= 1.0:
            raise DegenerateCovarianceError(
                f"reflection coefficient magnitude {abs(k):.6g} >= 1 at order {m + 1}"
                " (sequence is numerically non-PSD)",
                order=m + 1,
            )
        a = np.concatenate([a - k * a[::-1], [k]])
        xi[m + 1] = xi[m] * (1.0 - k * k)
        coeffs.append(a)
    return OrderCurve(xi, tuple(coeffs))


def whittle_bivariate(R: np.ndarray) -> OrderCurve:
    """Whittle's generalized Levinson-Durbin recursion for a 2-dim process.

    Parameters
    ----------
    R : (p_max+1, 2, 2) array
        Matrix autocovariances R(0..p_max); R(-tau) = R(tau)^T implicitly.

    Returns
    -------
    OrderCurve with xi[p] the (2, 2) forward prediction-error covariance at
    order p and coeffs[p] of shape (p, 2, 2) the forward predictor, i.e.
    x_hat(t) = sum_k coeffs[p][k-1] x(t-k) solves the block Yule-Walker
    system.  Forward and backward predictors are carried jointly, as the
    block-Toeplitz system is not symmetric.
    """
    R = np.asarray(R, dtype=float)
    if R.ndim != 3 or R.shape[1:] != (2, 2):
        raise ValueError(f"need (p_max+1, 2, 2) autocovariances, got {R.shape}")
    p_max = R.shape[0] - 1
    if np.linalg.det(R[0]) <= 0 or R[0, 0, 0] <= 0 or R[0, 1, 1] <= 0:
        raise DegenerateCovarianceError("R(0) must be positive definite", order=0)

    sf = R[0].copy()  # forward error covariance
    sb = R[0].copy()  # backward error covariance
    A = np.zeros((p_max, 2, 2))  # forward coefficients A(1..m) in A[:m]
    Bk = np.zeros((p_max, 2, 2))  # backward coefficients
    xi = np.empty((p_max + 1, 2, 2))
    xi[0] = R[0]
    coeffs: list[np.ndarray] = [np.zeros((0, 2, 2))]
    for m in range(p_max):
        delta = R[m + 1].copy()
        if m:
            delta -= np.einsum("kij,kjl->il", A[:m], R[m:0:-1])
        try:
            kf = np.linalg.solve(sb.T, delta.T).T  # delta @ inv(sb)
            kb = np.linalg.solve(sf.T, delta).T  # delta.T @ inv(sf)
        except np.linalg.LinAlgError as exc:
            raise DegenerateCovarianceError(
                f"singular error covariance at order {m + 1}", order=m + 1
            ) from exc
        if m:
            A_head = A[:m] - np.einsum("ij,kjl->kil", kf, Bk[m - 1 :: -1])
            Bk[:m] = Bk[:m] - np.einsum("ij,kjl->kil", kb, A[m - 1 :: -1])
            A[:m] = A_head
        A[m] = kf
        Bk[m] = kb
        sf = sf - kf @ delta.T
        sb = sb - kb @ delta
        sf = 0.5 * (sf + sf.T)
        sb = 0.5 * (sb + sb.T)
        if min(sf[0, 0], sf[1, 1], sb[0, 0], sb[1, 1]) <= 0:
            raise DegenerateCovarianceError(
                f"nonpositive error variance at order {m + 1}"
                " (sequence is numerically non-PSD)",
                order=m + 1,
            )
        xi[m + 1] = sf
        coeffs.append(A[: m + 1].copy())
    return OrderCurve(xi, tuple(coeffs))


def bic_curve(curve: OrderCurve, T: int, mode: str) -> np.ndarray:
    """BIC values over orders 0..p_max for a fitted curve.

    Univariate: ln xi(p) + p ln T / T.  Bivariate: ln det Sigma(p) + 4p ln T / T.
    Nonpositive variances are clamped to a tiny floor before the log.
    """
    if mode not in ("univariate", "bivariate"):
        raise ValueError(f"mode must be univariate or bivariate, got {mode!r}")
    if mode != curve.mode:
        raise ValueError(f"curve is {curve.mode}, asked for {mode}")
    orders = np.arange(curve.p_max + 1)
    if mode == "univariate":
        err = curve.xi
        params = orders
    else:
        err = np.linalg.det(curve.xi)
        params = 4 * orders
    return np.log(np.maximum(err, XI_FLOOR)) + params * np.log(T) / T


def select_order(curve: OrderCurve, T: int, mode: str) -> int:
    """Order minimizing the BIC; ties break toward the smaller order."""
    return int(np.argmin(bic_curve(curve, T, mode)))


def ols_refit(x: np.ndarray, g: DirectedGraph, p: int) -> VarModel:
    """Least-squares VAR(p) fit restricted to a fixed sparsity pattern.

    Each x_i(t) is regressed on lags 1..p of its parents and itself
    (conditional least squares: the first p rows are dropped).  Disallowed
    coefficients are exactly zero; noise variances are residual mean
    squares.  Rank-deficient designs fall back to the minimum-norm solution
    and the affected nodes are flagged on the returned model.
    """
    x = np.asarray(x, dtype=float)
    T, n = x.shape
    if g.n != n:
        raise ValueError(f"graph has {g.n} nodes, series has {n} columns")
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    if T <= p:
        raise ValueError(f"need T > p, got T={T}, p={p}")
    coeffs = np.zeros((n, n, p))
    noise = np.empty(n)
    deficient = []
    y_rows = np.arange(p, T)
    for i in range(1, n + 1):
        cols = sorted(g.parents(i) | {i})
        design = np.empty((T - p, len(cols) * p))
        for ti, tau in enumerate(range(1, p + 1)):
            design[:, ti * len(cols) : (ti + 1) * len(cols)] = x[y_rows - tau][:, [c - 1 for c in cols]]
        target = x[y_rows, i - 1]
        sol, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
        if rank < design.shape[1]:
            deficient.append(i)
        for ti, tau in enumerate(range(1, p + 1)):
            for ci, j in enumerate(cols):
                coeffs[i - 1, j - 1, tau - 1] = sol[ti * len(cols) + ci]
        resid = target - design @ sol
        noise[i - 1] = max(resid @ resid / len(target), XI_FLOOR)
    return VarModel(coeffs, noise, g, rank_deficient=tuple(deficient))
