"""Weighted maximum-likelihood solvers, one per estimation task.

These are the inner argmin steps of the reweighting loop: a closed-form
weighted least-squares solve, a closed-form weighted mean, and damped
Newton minimizers (backtracking line search, gradient-descent fallback)
for the weighted logistic and gamma objectives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import objectives
from .errors import DegenerateWeightsError, NonConvergenceError, SingularSystemError

__all__ = [
    "ToleranceSpec",
    "COND_LIMIT",
    "weighted_least_squares",
    "weighted_mean",
    "weighted_logistic_mle",
    "weighted_gamma_mle",
]

# Condition-number estimate above which the weighted normal equations are
# treated as singular.
COND_LIMIT = 1e12

_ARMIJO = 1e-4
_MAX_HALVINGS = 60


@dataclass(frozen=True)
class ToleranceSpec:
    """Stopping criteria for the iterative solvers."""

    grad_norm: float = 1e-10
    max_iters: int = 100

    def __post_init__(self):
        if self.grad_norm <= 0 or self.max_iters < 1:
            raise ValueError("tolerances must be positive")


def _check_weights(weights) -> np.ndarray:
    s = np.asarray(weights, dtype=float)
    if np.any(~np.isfinite(s)) or np.any(s < 0):
        raise ValueError("weights must be finite and nonnegative")
    if not np.any(s > 0):
        raise DegenerateWeightsError("all observation weights are zero")
    return s


def weighted_least_squares(X, y, weights, jitter: float = 0.0) -> np.ndarray:
    """Minimize ``sum_i s_i (y_i - <w, x_i>)^2`` in closed form.

    Solves the weighted normal equations with a dense symmetric
    positive-definite factorization of the d x d system.

    Parameters
    ----------
    X : ndarray of shape (n, d)
    y : ndarray of shape (n,)
    weights : ndarray of shape (n,)
        Nonnegative per-point weights.
    jitter : float
        Optional value added to the diagonal of the weighted Gram matrix
        before solving (caller-controlled retry knob).

    Raises
    ------
    SingularSystemError
        If the condition estimate of the weighted Gram matrix exceeds
        ``COND_LIMIT`` or the factorization fails.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    s = _check_weights(weights)
    A = (X * s[:, None]).T @ X
    if jitter:
        A = A + jitter * np.eye(A.shape[0])
    b = X.T @ (s * y)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystemError(cond)
    try:
        c, low = scipy.linalg.cho_factor(A)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(cond, f"Cholesky factorization failed: {exc}") from exc
    return scipy.linalg.cho_solve((c, low), b)


def weighted_mean(points, weights) -> np.ndarray:
    """Weighted average of the rows of ``points``; requires sum(weights) > 0."""
    pts = np.asarray(points, dtype=float)
    s = _check_weights(weights)
    return (pts.T @ s) / np.sum(s)


def _newton_minimize(task, X, y, s, init, tol, phi=None, ridge=0.0) -> np.ndarray:
    """Damped Newton with Armijo backtracking; shared by logistic and gamma.

    Falls back to a gradient step whenever the Hessian solve fails, and
    rejects (halves) any step whose objective is non-finite.
    """
    w = np.array(init, dtype=float, copy=True)
    value, grad = objectives.weighted_value_grad(task, X, y, s, w, phi=phi, ridge=ridge)
    if not np.isfinite(value):
        raise ValueError("objective is not finite at the initial point")
    for _ in range(tol.max_iters):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= tol.grad_norm:
            return w
        H = objectives.weighted_hessian(task, X, y, s, w, phi=phi, ridge=ridge)
        direction = None
        try:
            c, low = scipy.linalg.cho_factor(H)
            direction = scipy.linalg.cho_solve((c, low), -grad)
        except scipy.linalg.LinAlgError:
            pass
        if direction is None or not np.all(np.isfinite(direction)):
            direction = -grad  # gradient-descent fallback
        slope = float(grad @ direction)
        if slope >= 0:  # not a descent direction; fall back to steepest descent
            direction = -grad
            slope = -float(grad @ grad)
        step = 1.0
        accepted = False
        # Near the optimum the objective decrease drops below float
        # resolution while the gradient can still contract; steps that
        # leave the objective unchanged at this scale but shrink the
        # gradient are accepted too.
        noise = 16.0 * np.finfo(float).eps * (1.0 + abs(value))
        for _ in range(_MAX_HALVINGS):
            w_new = w + step * direction
            v_new, g_new = objectives.weighted_value_grad(
                task, X, y, s, w_new, phi=phi, ridge=ridge
            )
            if np.isfinite(v_new) and (
                v_new <= value + _ARMIJO * step * slope
                or (v_new <= value + noise and np.linalg.norm(g_new) < gnorm)
            ):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # No decrease possible at float precision; report where we stopped.
            raise NonConvergenceError(gnorm, tol.max_iters)
        w, value, grad = w_new, v_new, g_new
    gnorm = float(np.linalg.norm(grad))
    if gnorm <= tol.grad_norm:
        return w
    raise NonConvergenceError(gnorm, tol.max_iters)


def weighted_logistic_mle(X, y, weights, init=None, tol=None, ridge: float = 0.0) -> np.ndarray:
    """Minimize the weighted logistic loss (labels in {-1, +1}).

    Returns ``w`` with gradient norm of
    ``sum_i s_i log(1 + exp(-y_i <w, x_i>)) + ridge ||w||^2`` at most
    ``tol.grad_norm``; the objective at the returned point never exceeds
    the objective at ``init``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("logistic labels must lie in {-1, +1}")
    s = _check_weights(weights)
    tol = tol or ToleranceSpec()
    if init is None:
        init = np.zeros(X.shape[1])
    return _newton_minimize("lr", X, y, s, init, tol, ridge=ridge)


def weighted_gamma_mle(X, y, weights, phi: float, init=None, tol=None) -> np.ndarray:
    """Minimize ``sum_i s_i [(1-phi)^-1 y_i exp(<w, x_i>) - <w, x_i>]``.

    Labels must be positive; ``phi`` in (0, 1).  Steps that overflow the
    exponential during the line search are rejected and halved.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("gamma labels must be positive")
    if not (0.0 < phi < 1.0):
        raise ValueError(f"gamma shape phi must lie in (0, 1), got {phi!r}")
    s = _check_weights(weights)
    tol = tol or ToleranceSpec()
    if init is None:
        init = np.zeros(X.shape[1])
    return _newton_minimize("gamma", X, y, s, init, tol, phi=phi)
