"""Robust GLM estimation by sequentially reweighted MLE over variance-altered likelihoods."""

from .baselines import (
    BaselineResult,
    coordinate_median,
    geometric_median,
    mle_all,
    oracle,
    torrent,
    tukey_bisquare,
    vam,
)
from .data import AdversarySpec, Dataset, corrupt, gen_covariates, gen_labels, gen_points
from .diagnostics import contraction_report, lwlc_probe, lwsc_probe
from .engine import IterationRecord, RunTrace, SvamConfig, run_svam, svam_gamma, svam_lr, svam_me, svam_rr
from .errors import (
    DegenerateWeightsError,
    NonConvergenceError,
    SingularSystemError,
    SvamError,
    TuningError,
)
from .families import FamilySpec, GammaAlteredParams
from .solvers import (
    ToleranceSpec,
    weighted_gamma_mle,
    weighted_least_squares,
    weighted_logistic_mle,
    weighted_mean,
)
from .tuning import TuneGrid, trimmed_validation_error, tune

__version__ = "0.1.0"

__all__ = [
    "AdversarySpec",
    "BaselineResult",
    "Dataset",
    "DegenerateWeightsError",
    "FamilySpec",
    "GammaAlteredParams",
    "IterationRecord",
    "NonConvergenceError",
    "RunTrace",
    "SingularSystemError",
    "SvamConfig",
    "SvamError",
    "ToleranceSpec",
    "TuningError",
    "TuneGrid",
    "contraction_report",
    "coordinate_median",
    "corrupt",
    "gen_covariates",
    "gen_labels",
    "gen_points",
    "geometric_median",
    "lwlc_probe",
    "lwsc_probe",
    "mle_all",
    "oracle",
    "run_svam",
    "svam_gamma",
    "svam_lr",
    "svam_me",
    "svam_rr",
    "torrent",
    "trimmed_validation_error",
    "tukey_bisquare",
    "tune",
    "vam",
    "weighted_gamma_mle",
    "weighted_least_squares",
    "weighted_logistic_mle",
    "weighted_mean",
]
