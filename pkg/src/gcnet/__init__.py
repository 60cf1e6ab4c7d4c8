"""gcnet: sparse Granger-causality graph learning for VAR time series.

Learns directed causality graphs from multivariate series using pairwise
Granger tests (recursive AR fitting, chi-square edge P-values,
Benjamini-Hochberg thresholding, strongly-causal greedy recovery), with a
full VAR simulation harness, an exact population oracle, an adaptive-LASSO
baseline, and a seeded Monte-Carlo benchmark.
"""

from .adalasso import LassoFit, adalasso_graph, adalasso_node, lasso_cd
from .bench import BenchConfig, BenchRecord, run_benchmark, summarize
from .errors import (
    DegenerateCovarianceError,
    DegenerateMetricError,
    GcnetError,
    InconsistentPairwiseError,
    UnstableModelError,
)
from .graphs import (
    DirectedGraph,
    ancestors,
    confounders,
    is_dag,
    is_strongly_causal,
    load_edge_list,
    random_dag,
    random_scg,
    save_edge_list,
)
from .metrics import ConfusionCounts, confusion, fdp, lre, mcc
from .pairwise import (
    PairwiseStats,
    bh_threshold,
    chi2_cdf,
    compute_pairwise_matrix,
    draw_wellposed_scg,
    gc_statistic,
    oracle_pairwise,
    oracle_wellposed,
)
from .recovery import (
    PipelineResult,
    RecoveryTrace,
    pwgc_pipeline,
    recover_finite,
    recover_oracle,
)
from .spectral import (
    OrderCurve,
    estimate_autocovariance,
    levinson_durbin,
    ols_refit,
    select_order,
    whittle_bivariate,
)
from .varsim import (
    VarModel,
    build_var_model,
    is_persistent,
    is_stable,
    load_model,
    load_series,
    ma_expansion,
    population_autocovariance,
    random_filter_from_poles,
    save_model,
    save_series,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "BenchRecord",
    "ConfusionCounts",
    "DegenerateCovarianceError",
    "DegenerateMetricError",
    "DirectedGraph",
    "GcnetError",
    "InconsistentPairwiseError",
    "LassoFit",
    "OrderCurve",
    "PairwiseStats",
    "PipelineResult",
    "RecoveryTrace",
    "UnstableModelError",
    "VarModel",
    "adalasso_graph",
    "adalasso_node",
    "ancestors",
    "bh_threshold",
    "build_var_model",
    "chi2_cdf",
    "compute_pairwise_matrix",
    "confounders",
    "confusion",
    "draw_wellposed_scg",
    "estimate_autocovariance",
    "fdp",
    "gc_statistic",
    "is_dag",
    "is_persistent",
    "is_stable",
    "is_strongly_causal",
    "lasso_cd",
    "levinson_durbin",
    "load_edge_list",
    "load_model",
    "load_series",
    "lre",
    "ma_expansion",
    "mcc",
    "ols_refit",
    "oracle_pairwise",
    "oracle_wellposed",
    "population_autocovariance",
    "pwgc_pipeline",
    "random_dag",
    "random_filter_from_poles",
    "random_scg",
    "recover_finite",
    "recover_oracle",
    "run_benchmark",
    "save_edge_list",
    "save_model",
    "save_series",
    "select_order",
    "simulate",
    "summarize",
    "whittle_bivariate",
]
