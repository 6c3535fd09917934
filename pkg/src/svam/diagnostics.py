"""Empirical probes of the curvature and smoothness of the weighted objective.

These quantify, on a concrete run, the two quantities that govern the
per-iteration contraction: the smallest eigenvalue of the weighted
Hessian (local weighted strong convexity) and the norm of the weighted
gradient at the true model (local weighted smoothness).  Both require
the ground truth and are simulation-only instrumentation; the estimation
API never needs them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import objectives
from .data import Dataset
from .engine import RunTrace, _compute_weights

__all__ = ["DiagnosticsReport", "lwsc_probe", "lwlc_probe", "weighted_hessian_min_eig",
           "contraction_report", "invariant_flags"]


@dataclass(eq=False)
class DiagnosticsReport:
    """Per-iteration probe values for one run.

    ``bound`` is twice the gradient probe over the curvature probe
    (infinite when the curvature is zero); ``bound_holds[t]`` compares
    the observed distance of the next iterate against it.  The
    comparison set pairs consecutive trace records, so a length-1 trace
    yields no comparisons.  ``invariant_ok`` tracks whether
    ``beta_t * dist_t^2 <= 1`` keeps holding once it first does (the
    gamma task tracks ``beta_t * (exp(dist_t) - 1)^2``).
    """

    iterations: list[int]
    betas: list[float]
    lambda_min: list[float]
    grad_at_truth: list[float]
    bound: list[float]
    observed_dist: list[float]
    bound_holds: list[bool]
    invariant_ok: list[bool]
    first_invariant_iteration: int | None

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iteration,beta,lambda_min,grad_at_truth,bound,observed_dist,bound_holds\n")
            for i in range(len(self.iterations)):
                fh.write(
                    f"{self.iterations[i]},{self.betas[i]:.17g},{self.lambda_min[i]:.17g},"
                    f"{self.grad_at_truth[i]:.17g},{self.bound[i]:.17g},"
                    f"{self.observed_dist[i]:.17g},{int(self.bound_holds[i])}\n"
                )


def lwsc_probe(X, weights) -> float:
    """Smallest eigenvalue of the weighted Gram matrix sum_i s_i x_i x_i^T.

    Tiny negative values from the symmetric eigensolve clamp to zero.
    """
    X = np.asarray(X, dtype=float)
    s = np.asarray(weights, dtype=float)
    H = (X * s[:, None]).T @ X
    lam = float(np.linalg.eigvalsh(H)[0])
    return max(lam, 0.0)


def weighted_hessian_min_eig(data: Dataset, task: str, w_weights, w_eval, beta) -> float:
    """Curvature probe of the full weighted Hessian for any task.

    Weights come from ``w_weights`` at scale ``beta``; the Hessian is
    evaluated at ``w_eval``.  For regression and mean estimation this
    reduces to the weighted Gram matrix / total weight; the logistic and
    gamma tasks include their per-point curvature factors.
    """
    phi = data.gamma_shape_phi if task == "gamma" else None
    s = _compute_weights(task, data, np.asarray(w_weights, dtype=float), beta, phi)
    H = objectives.weighted_hessian(task, data.X, data.y, s, w_eval, phi=phi)
    lam = float(np.linalg.eigvalsh(H)[0])
    return max(lam, 0.0)


def lwlc_probe(data: Dataset, task: str, w_star, w_current, beta) -> float:
    """Norm of the weighted gradient at the true model.

    Weights are computed at ``w_current`` and scale ``beta``; the
    gradient is the same code path the solvers minimize (without any
    ridge term).
    """
    if w_star is None:
        raise ValueError("lwlc probe requires the true model")
    phi = data.gamma_shape_phi if task == "gamma" else None
    s = _compute_weights(task, data, np.asarray(w_current, dtype=float), beta, phi)
    _, grad = objectives.weighted_value_grad(task, data.X, data.y, s, w_star, phi=phi)
    return float(np.linalg.norm(grad))


def invariant_flags(trace: RunTrace) -> tuple[list[bool], int | None]:
    """Check persistence of the scale-times-squared-distance invariant.

    Returns per-record flags (True where the invariant holds or is not
    yet expected to hold) and the first iteration where it held, if any.
    The gamma task uses ``beta * (exp(dist) - 1)^2``.
    """
    flags: list[bool] = []
    first = None
    for rec in trace.records:
        if rec.dist_to_truth is None:
            flags.append(True)
            continue
        if trace.task == "gamma":
            value = rec.beta * (np.expm1(rec.dist_to_truth)) ** 2
        else:
            value = rec.beta * rec.dist_to_truth**2
        holds = value <= 1.0 + 1e-12
        if first is None:
            if holds:
                first = rec.iteration
            flags.append(True)
        else:
            flags.append(holds)
    return flags, first


def contraction_report(trace: RunTrace, data: Dataset, task: str) -> DiagnosticsReport:
    """Probe the contraction bound along a recorded run.

    For each pair of consecutive trace records (u, v) produced at scale
    ``beta``, computes the curvature and gradient probes with weights at
    ``u`` and checks whether the observed distance of ``v`` to the truth
    is at most twice-gradient-over-curvature (plus tolerance).  Zero
    curvature reports an infinite bound, flagged as holding trivially.
    """
    if data.w_true is None:
        raise ValueError("contraction report requires the true model")
    iters, betas, lams, grads, bounds, dists, holds = [], [], [], [], [], [], []
    recs = trace.records
    for prev, cur in zip(recs, recs[1:]):
        beta = cur.beta
        lam = weighted_hessian_min_eig(data, task, prev.model, cur.model, beta)
        grad = lwlc_probe(data, task, data.w_true, prev.model, beta)
        bound = 2.0 * grad / lam if lam > 0 else np.inf
        observed = (
            cur.dist_to_truth
            if cur.dist_to_truth is not None
            else float(np.linalg.norm(cur.model - data.w_true))
        )
        iters.append(cur.iteration)
        betas.append(beta)
        lams.append(lam)
        grads.append(grad)
        bounds.append(bound)
        dists.append(observed)
        holds.append(bool(observed <= bound * (1.0 + 1e-8) + 1e-12))
    inv, first = invariant_flags(trace)
    return DiagnosticsReport(
        iterations=iters,
        betas=betas,
        lambda_min=lams,
        grad_at_truth=grads,
        bound=bounds,
        observed_dist=dists,
        bound_holds=holds,
        invariant_ok=inv,
        first_invariant_iteration=first,
    )
