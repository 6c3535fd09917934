"""Weighted objectives, gradients and Hessians for each estimation task.

One shared implementation backs the inner solvers, the convexity /
smoothness probes in :mod:`svam.diagnostics`, and the per-point losses
used for trimmed validation, so gradients are consistent across all of
them by construction.

Task conventions (``s`` is the per-point weight vector):

- ``rr``   : 0.5 * sum_i s_i (y_i - <w, x_i>)^2
- ``me``   : 0.5 * sum_i s_i ||x_i - w||^2   (``w`` is the mean estimate)
- ``lr``   : sum_i s_i log(1 + exp(-y_i <w, x_i>)) + ridge ||w||^2
- ``gamma``: sum_i s_i [ (1-phi)^-1 y_i exp(<w, x_i>) - <w, x_i> ]
"""

from __future__ import annotations

import numpy as np

TASKS = ("rr", "me", "gamma", "lr")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def weighted_value_grad(task, X, y, s, w, phi=None, ridge=0.0):
    """Objective value and gradient of the weighted task loss at ``w``.

    Returns ``(value, grad)``; overflow in the gamma exponential yields
    ``inf`` value (callers treat that as a rejected point).
    """
    X = np.asarray(X, dtype=float)
    s = np.asarray(s, dtype=float)
    w = np.asarray(w, dtype=float)
    if task == "rr":
        r = y - X @ w
        value = 0.5 * float(s @ r**2)
        grad = -X.T @ (s * r)
    elif task == "me":
        diff = X - w
        value = 0.5 * float(s @ np.sum(diff**2, axis=1))
        grad = -diff.T @ s
    elif task == "lr":
        z = y * (X @ w)
        value = float(s @ np.logaddexp(0.0, -z))
        grad = -X.T @ (s * y * _sigmoid(-z))
        if ridge:
            value += ridge * float(w @ w)
            grad = grad + 2.0 * ridge * w
    elif task == "gamma":
        u = X @ w
        with np.errstate(over="ignore"):
            eu = np.exp(u)
        scale = 1.0 / (1.0 - phi)
        value = float(s @ (scale * y * eu - u))
        if not np.isfinite(value):
            return np.inf, np.full_like(w, np.inf)
        grad = X.T @ (s * (scale * y * eu - 1.0))
    else:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    return value, grad


def weighted_hessian(task, X, y, s, w, phi=None, ridge=0.0) -> np.ndarray:
    """Hessian of the weighted task loss at ``w`` (d x d, symmetric PSD)."""
    X = np.asarray(X, dtype=float)
    s = np.asarray(s, dtype=float)
    d = X.shape[1]
    if task == "rr":
        return (X * s[:, None]).T @ X
    if task == "me":
        return float(np.sum(s)) * np.eye(d)
    if task == "lr":
        z = y * (X @ np.asarray(w, dtype=float))
        sig = _sigmoid(z)
        curv = s * sig * (1.0 - sig)
        H = (X * curv[:, None]).T @ X
        if ridge:
            H = H + 2.0 * ridge * np.eye(d)
        return H
    if task == "gamma":
        u = X @ np.asarray(w, dtype=float)
        with np.errstate(over="ignore"):
            curv = s * np.exp(u) * y / (1.0 - phi)
        return (X * curv[:, None]).T @ X
    raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")


def pointwise_loss(task, X, y, w, phi=None) -> np.ndarray:
    """Per-point prediction error of model ``w``, used for trimmed validation.

    rr: squared residual; me: squared distance to the mean estimate;
    lr: logistic loss; gamma: the gamma regression loss.
    """
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    if task == "rr":
        return (y - X @ w) ** 2
    if task == "me":
        return np.sum((X - w) ** 2, axis=1)
    if task == "lr":
        return np.logaddexp(0.0, -y * (X @ w))
    if task == "gamma":
        u = X @ w
        with np.errstate(over="ignore"):
            return y * np.exp(u) / (1.0 - phi) - u
    raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
