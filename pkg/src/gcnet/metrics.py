"""Support-recovery and prediction metrics.

Edge metrics count over the n(n-1) off-diagonal ordered pairs (graphs never
contain self loops by construction).  The prediction metric LRE is the
log-trace ratio of estimated to true innovation covariance on fresh
out-of-sample data; 1 is the best attainable value.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import DegenerateMetricError
from .graphs import DirectedGraph, RngLike
from .varsim import VarModel, simulate


@dataclass(frozen=True)
class ConfusionCounts:
    """Edge confusion counts; tp+fp+tn+fn always equals n(n-1)."""

    tp: int
    fp: int
    tn: int
    fn: int


def confusion(true_g: DirectedGraph, est_g: DirectedGraph) -> ConfusionCounts:
    """Ordered-pair edge comparison, diagonal excluded."""
    if true_g.n != est_g.n:
        raise ValueError(f"node counts differ: {true_g.n} vs {est_g.n}")
    t, e = true_g.edges, est_g.edges
    tp = len(t & e)
    fp = len(e - t)
    fn = len(t - e)
    tn = true_g.n * (true_g.n - 1) - tp - fp - fn
    return ConfusionCounts(tp, fp, tn, fn)


def mcc(c: ConfusionCounts) -> float:
    """Matthews correlation coefficient; 0 when any marginal factor is zero."""
    denom = (
        (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    )
    if denom == 0:
        return 0.0
    return (c.tp * c.tn - c.fp * c.fn) / sqrt(denom)


def fdp(c: ConfusionCounts) -> float:
    """False discovery proportion FP/(FP+TP); 0 when nothing was discovered."""
    disc = c.tp + c.fp
    return c.fp / disc if disc else 0.0


def one_step_predictions(est_m: VarModel, x: np.ndarray) -> np.ndarray:
    """Predictions x_hat(t) = sum_tau B_hat(tau) x(t - tau) for t >= p.

    Returns a (T - p, n) array aligned with ``x[p:]``.  Predictions never
    feed back, so the estimated model need not be stable.
    """
    x = np.asarray(x, dtype=float)
    T, n = x.shape
    p = est_m.p
    if T <= p:
        raise ValueError(f"need more than p={p} rows, got {T}")
    pred = np.zeros((T - p, n))
    for tau in range(1, p + 1):
        pred += x[p - tau : T - tau] @ est_m.coeffs[:, :, tau - 1].T
    return pred


def lre(true_m: VarModel, est_m: VarModel, T_out: int = 10_000,
        rng: RngLike = None) -> float:
    """Log-relative one-step prediction error on fresh data from the truth.

    Simulates T_out out-of-sample steps, forms the prediction-error
    covariance under the estimated model, and returns
    ln tr(Sigma_hat) / ln tr(Sigma_v).  Raises DegenerateMetricError when
    |ln tr(Sigma_v)| < 1e-6, where the ratio is ill-conditioned.
    """
    if true_m.n != est_m.n:
        raise ValueError(f"model dimensions differ: {true_m.n} vs {est_m.n}")
    if T_out < 1:
        raise ValueError(f"need T_out >= 1, got {T_out}")
    log_denom = np.log(true_m.noise_vars.sum())
    if abs(log_denom) < 1e-6:
        raise DegenerateMetricError(
            f"ln tr Sigma_v = {log_denom:.2e} is too close to 0 for a ratio"
        )
    x = simulate(true_m, T_out + est_m.p, rng=rng)
    err = x[est_m.p :] - one_step_predictions(est_m, x)
    sigma_hat_trace = float(np.sum(err * err) / T_out)
    return float(np.log(sigma_hat_trace) / log_denom)
