"""Package exception types."""


class GcnetError(Exception):
    """Base class for all gcnet-specific failures."""


class UnstableModelError(GcnetError):
    """An operation required a stable VAR model and got an unstable one."""


class DegenerateCovarianceError(GcnetError):
    """A covariance sequence was numerically non-PSD or singular.

    Carries the recursion order at which degeneracy was detected, when known.
    """

    def __init__(self, message: str, order: int | None = None):
        super().__init__(message)
        self.order = order


class InconsistentPairwiseError(GcnetError):
    """Pairwise relations could not have come from a DAG oracle (peeling stalled)."""


class DegenerateMetricError(GcnetError):
    """A score is ill-conditioned for these inputs (e.g. ln tr Sigma_v ~ 0)."""
