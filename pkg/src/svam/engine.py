"""The outer reweighting loop: score points, solve the weighted MLE, raise the scale.

Each iteration computes per-point weights from the variance-altered
likelihood at the current scale ``beta_t``, solves the corresponding
weighted MLE (warm-started at the current model), then multiplies the
scale by ``xi``.  With ``xi = 1`` the loop runs at a fixed scale, which
is exactly the VAM baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import time

import numpy as np

from . import families, solvers
from .data import Dataset
from .errors import SingularSystemError, SvamError
from .solvers import ToleranceSpec

__all__ = ["SvamConfig", "IterationRecord", "RunTrace", "run_svam",
           "svam_rr", "svam_me", "svam_gamma", "svam_lr"]

TASKS = ("rr", "me", "gamma", "lr")

# Stop once consecutive models move less than this.
MODEL_DELTA_TOL = 1e-14

# Default ridge applied to the weighted logistic subproblem so the
# minimizer stays bounded when growing scales make the weighted data
# separable.  Oracle-style fits should pass ridge=0 explicitly.
DEFAULT_LR_RIDGE = 1e-8


@dataclass(frozen=True, eq=False)
class SvamConfig:
    """Run configuration: initial scale, scale increment and caps.

    ``xi = 1`` keeps the scale fixed (VAM); ``xi > 1`` grows it
    geometrically.  ``init_model=None`` starts at the origin.
    """

    beta1: float
    xi: float
    max_iters: int = 50
    beta_cap: float = 1e12
    init_model: np.ndarray | None = None
    solver_tol: ToleranceSpec = field(default_factory=ToleranceSpec)
    lr_ridge: float = DEFAULT_LR_RIDGE

    def __post_init__(self):
        if not (self.beta1 > 0 and np.isfinite(self.beta1)):
            raise ValueError("beta1 must be a finite positive real")
        if self.xi < 1.0:
            raise ValueError("scale increment xi must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.beta_cap < self.beta1:
            raise ValueError("beta_cap must be at least beta1")


@dataclass(eq=False)
class IterationRecord:
    """One loop iteration: scale used, model produced, bookkeeping flags."""

    iteration: int
    beta: float
    model: np.ndarray
    wall_ms: float
    dist_to_truth: float | None = None
    jitter_retry: bool = False
    degenerate: bool = False


@dataclass(eq=False)
class RunTrace:
    """Per-iteration records plus the final model and the stop reason.

    ``stop_reason`` is one of ``max_iters``, ``beta_cap``, ``model_delta``
    or ``degenerate_weights``.
    """

    records: list[IterationRecord]
    final_model: np.ndarray
    stop_reason: str
    task: str
    init_model: np.ndarray | None = None

    @property
    def degenerate(self) -> bool:
        return self.stop_reason == "degenerate_weights"

    @property
    def final_dist(self) -> float | None:
        for rec in reversed(self.records):
            if rec.dist_to_truth is not None:
                return rec.dist_to_truth
        return None

    def iterations_to(self, err: float) -> int | None:
        """First iteration index whose distance-to-truth is below ``err``."""
        for rec in self.records:
            if rec.dist_to_truth is not None and rec.dist_to_truth < err:
                return rec.iteration
        return None


def _compute_weights(task, data: Dataset, model, beta, phi) -> np.ndarray:
    if task == "rr":
        return families.gaussian_weight(data.y, data.X @ model, beta)
    if task == "me":
        return families.squared_distance_weight(data.X, model, beta)
    if task == "lr":
        return families.bernoulli_weight_margin(data.y * (data.X @ model), beta)
    # gamma: parameter per point from the current model through the
    # exponential link, then the altered density, rescaled by the batch
    # maximum (a constant factor that cannot change any weighted argmin).
    eta = np.exp(data.X @ model)
    eta_t, phi_t = families.gamma_altered_params(eta, phi, beta)
    logs = families.gamma_log_density(data.y, eta_t, phi_t)
    return np.exp(logs - np.max(logs))


def _solve(task, data: Dataset, weights, model, cfg: SvamConfig, phi):
    """One weighted-MLE step; returns (new_model, jitter_retried)."""
    if task == "rr":
        try:
            return solvers.weighted_least_squares(data.X, data.y, weights), False
        except SingularSystemError:
            A = (data.X * weights[:, None]).T @ data.X
            jitter = 1e-10 * np.trace(A) / data.d
            return solvers.weighted_least_squares(data.X, data.y, weights, jitter=jitter), True
    if task == "me":
        return solvers.weighted_mean(data.X, weights), False
    if task == "lr":
        return (
            solvers.weighted_logistic_mle(
                data.X, data.y, weights, init=model, tol=cfg.solver_tol, ridge=cfg.lr_ridge
            ),
            False,
        )
    return (
        solvers.weighted_gamma_mle(
            data.X, data.y, weights, phi, init=model, tol=cfg.solver_tol
        ),
        False,
    )


def run_svam(data: Dataset, task: str, config: SvamConfig) -> RunTrace:
    """Run the sequential reweighting loop on one dataset.

    Stops at ``max_iters``, when the scale would exceed ``beta_cap``,
    when consecutive models differ by less than ``MODEL_DELTA_TOL``, or
    when every weight clamps to zero (the trace is then flagged
    degenerate and the last good model is returned).

    Solver failures propagate, annotated with the iteration index.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    phi = None
    if task == "gamma":
        phi = data.gamma_shape_phi
        if phi is None:
            raise ValueError("gamma task requires the dataset to carry gamma_shape_phi")
        if np.any(data.y <= 0):
            raise ValueError("gamma labels must be positive")
        if config.beta1 < 1.0:
            raise ValueError("gamma runs require beta1 >= 1")
    if task == "lr" and not np.all(np.isin(data.y, (-1.0, 1.0))):
        raise ValueError("lr labels must lie in {-1, +1}")
    if task in ("rr", "lr") and data.y is None:
        raise ValueError(f"task {task!r} requires labels")

    model = (
        np.zeros(data.d)
        if config.init_model is None
        else np.array(config.init_model, dtype=float, copy=True)
    )
    init_copy = model.copy()
    truth = data.w_true
    records: list[IterationRecord] = []
    beta = config.beta1
    stop_reason = "max_iters"

    for t in range(1, config.max_iters + 1):
        if beta > config.beta_cap:
            stop_reason = "beta_cap"
            break
        t0 = time.perf_counter()
        weights = families.clamp_weights(_compute_weights(task, data, model, beta, phi))
        if not np.any(weights > 0):
            records.append(
                IterationRecord(
                    iteration=t,
                    beta=beta,
                    model=model.copy(),
                    wall_ms=(time.perf_counter() - t0) * 1e3,
                    dist_to_truth=None if truth is None else float(np.linalg.norm(model - truth)),
                    degenerate=True,
                )
            )
            stop_reason = "degenerate_weights"
            break
        try:
            new_model, retried = _solve(task, data, weights, model, config, phi)
        except SvamError as exc:
            exc.iteration = t
            exc.args = (f"iteration {t}: {exc.args[0]}",) + exc.args[1:]
            raise
        records.append(
            IterationRecord(
                iteration=t,
                beta=beta,
                model=new_model.copy(),
                wall_ms=(time.perf_counter() - t0) * 1e3,
                dist_to_truth=None if truth is None else float(np.linalg.norm(new_model - truth)),
                jitter_retry=retried,
            )
        )
        delta = float(np.linalg.norm(new_model - model))
        model = new_model
        if delta < MODEL_DELTA_TOL:
            stop_reason = "model_delta"
            break
        beta = beta * config.xi

    return RunTrace(
        records=records,
        final_model=model.copy(),
        stop_reason=stop_reason,
        task=task,
        init_model=init_copy,
    )


def svam_rr(data: Dataset, config: SvamConfig) -> RunTrace:
    """Robust least-squares regression (gaussian weights + weighted OLS)."""
    return run_svam(data, "rr", config)


def svam_me(data: Dataset, config: SvamConfig) -> RunTrace:
    """Robust mean estimation (multivariate-gaussian weights + weighted mean)."""
    return run_svam(data, "me", config)


def svam_gamma(data: Dataset, config: SvamConfig) -> RunTrace:
    """Robust gamma regression (altered gamma density weights + Newton MLE)."""
    return run_svam(data, "gamma", config)


def svam_lr(data: Dataset, config: SvamConfig) -> RunTrace:
    """Robust classification (sigmoid margin weights + weighted logistic MLE)."""
    return run_svam(data, "lr", config)
