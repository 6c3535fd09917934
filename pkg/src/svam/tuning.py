"""Hyperparameter selection via held-out trimmed validation error.

The initial scale, the scale increment and the trim fraction are scored
on a held-out split: a model is fitted on the training part for every
(beta1, xi) candidate, and its validation error is the mean per-point
loss after rejecting the largest-loss fraction ``alpha_trim`` (the
validation set may itself contain corruptions).  The search is a full
grid evaluation over the candidate lists.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import objectives
from .data import Dataset
from .engine import SvamConfig, run_svam
from .errors import SvamError, TuningError

__all__ = ["TuneGrid", "ScoreRow", "TuneResult", "trimmed_validation_error", "tune"]

_DEFAULT_BETA1 = tuple(float(b) for b in np.logspace(-3, 1, 7))
_DEFAULT_XI = (1.1, 1.3, 1.5, 2.0, 3.0)
_DEFAULT_TRIM = (0.0, 0.1, 0.2, 0.3, 0.4)


@dataclass(frozen=True)
class TuneGrid:
    """Candidate lists for (beta1, xi, alpha_trim) plus the split fraction."""

    beta1_candidates: tuple[float, ...] = _DEFAULT_BETA1
    xi_candidates: tuple[float, ...] = _DEFAULT_XI
    alpha_trim_candidates: tuple[float, ...] = _DEFAULT_TRIM
    val_fraction: float = 0.2

    def __post_init__(self):
        if not (self.beta1_candidates and self.xi_candidates and self.alpha_trim_candidates):
            raise ValueError("candidate lists must be nonempty")
        if any(b <= 0 for b in self.beta1_candidates):
            raise ValueError("beta1 candidates must be positive")
        if any(x < 1.0 for x in self.xi_candidates):
            raise ValueError("xi candidates must be >= 1")
        if any(not (0.0 <= a <= 0.5) for a in self.alpha_trim_candidates):
            raise ValueError("alpha_trim candidates must lie in [0, 0.5]")
        if not (0.0 < self.val_fraction < 1.0):
            raise ValueError("val_fraction must lie in (0, 1)")


@dataclass
class ScoreRow:
    beta1: float
    xi: float
    alpha_trim: float
    val_error: float
    converged: bool


@dataclass(eq=False)
class TuneResult:
    """Chosen hyperparameters, their score, and the full score table."""

    beta1: float
    xi: float
    alpha_trim: float
    val_error: float
    table: list[ScoreRow]
    best_model: np.ndarray


def trimmed_validation_error(model, val_data: Dataset, task: str, alpha_trim: float) -> float:
    """Mean per-point loss after dropping the ceil(alpha_trim * m) largest.

    Per-point losses are squared residuals (regression), squared
    distances (mean estimation), the logistic loss, or the gamma
    regression loss.
    """
    if not (0.0 <= alpha_trim < 1.0):
        raise ValueError("alpha_trim must lie in [0, 1)")
    errors = objectives.pointwise_loss(
        task, val_data.X, val_data.y, model, phi=val_data.gamma_shape_phi
    )
    m = len(errors)
    drop = int(np.ceil(alpha_trim * m))
    if drop >= m:
        raise ValueError(f"trimming {drop} of {m} validation points leaves nothing to score")
    kept = np.sort(errors)[: m - drop]
    return float(np.mean(kept))


def _subset(data: Dataset, idx: np.ndarray) -> Dataset:
    return replace(
        data,
        X=data.X[idx],
        y=None if data.y is None else data.y[idx],
        corrupted_mask=None if data.corrupted_mask is None else data.corrupted_mask[idx],
    )


def score_table_csv(table: list[ScoreRow], path) -> None:
    """Write the score table with columns beta1,xi,alpha_trim,val_error,converged_flag."""
    with open(path, "w") as fh:
        fh.write("beta1,xi,alpha_trim,val_error,converged_flag\n")
        for row in table:
            fh.write(
                f"{row.beta1:.17g},{row.xi:.17g},{row.alpha_trim:.17g},"
                f"{row.val_error:.17g},{int(row.converged)}\n"
            )


def tune(data: Dataset, task: str, grid: TuneGrid, seed: int,
         max_iters: int = 50, init_model=None) -> TuneResult:
    """Pick (beta1, xi, alpha_trim) by held-out trimmed validation error.

    The split is deterministic given ``seed``.  Every (beta1, xi) pair is
    fitted once on the training part and scored under every trim
    candidate; ties break toward smaller beta1, then smaller xi, then
    smaller alpha_trim.

    Raises
    ------
    TuningError
        If every grid point fails (solver errors or invalid configs);
        the error maps grid points to their failure messages.
    """
    rng = np.random.default_rng(seed)
    n = data.n
    perm = rng.permutation(n)
    n_val = min(n - 1, max(1, int(round(grid.val_fraction * n))))
    val = _subset(data, np.sort(perm[:n_val]))
    train = _subset(data, np.sort(perm[n_val:]))

    table: list[ScoreRow] = []
    failures: dict = {}
    best = None  # (val_error, beta1, xi, alpha_trim, model)
    for b1 in grid.beta1_candidates:
        for xi in grid.xi_candidates:
            try:
                cfg = SvamConfig(beta1=b1, xi=xi, max_iters=max_iters, init_model=init_model)
                trace = run_svam(train, task, cfg)
                model = trace.final_model
                ok = not trace.degenerate
            except (SvamError, ValueError) as exc:
                failures[(b1, xi)] = str(exc)
                for at in grid.alpha_trim_candidates:
                    table.append(ScoreRow(b1, xi, at, np.inf, False))
                continue
            for at in grid.alpha_trim_candidates:
                err = trimmed_validation_error(model, val, task, at)
                table.append(ScoreRow(b1, xi, at, err, ok))
                key = (err, b1, xi, at)
                if np.isfinite(err) and (best is None or key < best[:4]):
                    best = (err, b1, xi, at, model)
    if best is None:
        raise TuningError(failures)
    err, b1, xi, at, model = best
    return TuneResult(beta1=b1, xi=xi, alpha_trim=at, val_error=err,
                      table=table, best_model=model)
