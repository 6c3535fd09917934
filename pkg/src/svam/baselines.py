"""Competitor estimators for the benchmark comparisons.

Fixed-scale reweighting (VAM), plain and oracle MLE, hard-thresholding
least squares, bisquare IRLS, and the coordinate-wise / geometric
medians.  Following the usual benchmark handicap, the hard-thresholding
baseline receives the true corruption rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import time

import numpy as np

from . import solvers
from .data import Dataset
from .engine import RunTrace, SvamConfig, run_svam
from .errors import DegenerateWeightsError

__all__ = [
    "BaselineResult",
    "vam",
    "mle_all",
    "oracle",
    "torrent",
    "tukey_bisquare",
    "coordinate_median",
    "geometric_median",
]


@dataclass(eq=False)
class BaselineResult:
    """Final model of a baseline plus its per-iteration history."""

    method: str
    model: np.ndarray
    trace: list[tuple[int, np.ndarray]]
    wall_ms: float
    run_trace: RunTrace | None = None


def _unit_fit(data: Dataset, task: str, rows=None, lr_ridge: float = 0.0) -> np.ndarray:
    X = data.X if rows is None else data.X[rows]
    y = None if data.y is None else (data.y if rows is None else data.y[rows])
    ones = np.ones(X.shape[0])
    if task == "rr":
        return solvers.weighted_least_squares(X, y, ones)
    if task == "me":
        return solvers.weighted_mean(X, ones)
    if task == "lr":
        return solvers.weighted_logistic_mle(X, y, ones, ridge=lr_ridge)
    if task == "gamma":
        return solvers.weighted_gamma_mle(X, y, ones, data.gamma_shape_phi)
    raise ValueError(f"unknown task {task!r}")


def vam(data: Dataset, task: str, beta_fixed: float, max_iters: int = 50,
        init_model=None) -> BaselineResult:
    """Reweighted MLE at one fixed scale: the loop with scale increment 1."""
    if beta_fixed <= 0:
        raise ValueError("beta_fixed must be positive")
    cfg = SvamConfig(beta1=beta_fixed, xi=1.0, max_iters=max_iters,
                     beta_cap=beta_fixed, init_model=init_model)
    t0 = time.perf_counter()
    trace = run_svam(data, task, cfg)
    wall = (time.perf_counter() - t0) * 1e3
    return BaselineResult(
        method="vam",
        model=trace.final_model,
        trace=[(r.iteration, r.model) for r in trace.records],
        wall_ms=wall,
        run_trace=trace,
    )


def mle_all(data: Dataset, task: str, lr_ridge: float = 0.0) -> BaselineResult:
    """Unweighted likelihood maximization over every point, clean or not."""
    t0 = time.perf_counter()
    model = _unit_fit(data, task, lr_ridge=lr_ridge)
    wall = (time.perf_counter() - t0) * 1e3
    return BaselineResult(method="mle", model=model, trace=[(1, model)], wall_ms=wall)


def oracle(data: Dataset, task: str, lr_ridge: float = 0.0) -> BaselineResult:
    """Unweighted fit on the clean points only; the gold standard."""
    if data.corrupted_mask is None:
        raise ValueError("oracle requires the dataset's corruption mask")
    t0 = time.perf_counter()
    model = _unit_fit(data, task, rows=~data.corrupted_mask, lr_ridge=lr_ridge)
    wall = (time.perf_counter() - t0) * 1e3
    return BaselineResult(method="oracle", model=model, trace=[(1, model)], wall_ms=wall)


def torrent(data: Dataset, alpha_hint: float, max_iters: int = 100,
            tol: float = 1e-12) -> BaselineResult:
    """Hard-thresholding least squares (regression only).

    Alternates an OLS fit on the active set with reselecting the
    ``n - floor(alpha_hint * n)`` smallest-residual points; stops on an
    active-set fixed point, a model step below ``tol``, or ``max_iters``.
    """
    if not (0.0 <= alpha_hint < 1.0):
        raise ValueError("alpha_hint must lie in [0, 1)")
    X, y = data.X, data.y
    n = data.n
    keep = n - int(np.floor(alpha_hint * n))
    w = np.zeros(data.d)
    active = None
    trace = []
    t0 = time.perf_counter()
    for it in range(1, max_iters + 1):
        resid = np.abs(y - X @ w)
        new_active = np.sort(np.argsort(resid, kind="stable")[:keep])
        if active is not None and np.array_equal(new_active, active):
            break
        active = new_active
        w_new = solvers.weighted_least_squares(X[active], y[active], np.ones(keep))
        trace.append((it, w_new))
        step = float(np.linalg.norm(w_new - w))
        w = w_new
        if step < tol:
            break
    wall = (time.perf_counter() - t0) * 1e3
    return BaselineResult(method="torrent", model=w, trace=trace, wall_ms=wall)


def tukey_bisquare(data: Dataset, tuning_c: float = 4.685, max_iters: int = 100,
                   tol: float = 1e-10) -> BaselineResult:
    """Classical bisquare M-estimator via IRLS (regression only).

    Residual scale is the normalized MAD, recomputed each iteration;
    weights are ``(1 - (r / (c s))^2)^2`` inside ``|r| <= c s`` and zero
    outside.
    """
    if tuning_c <= 0:
        raise ValueError("tuning_c must be positive")
    X, y = data.X, data.y
    w = solvers.weighted_least_squares(X, y, np.ones(data.n))
    trace = [(1, w)]
    t0 = time.perf_counter()
    for it in range(2, max_iters + 2):
        r = y - X @ w
        scale = np.median(np.abs(r - np.median(r))) / 0.6745
        if scale < 1e-300:
            # Exact fit on more than half the data: keep the interpolated points.
            weights = (np.abs(r) < 1e-300).astype(float)
        else:
            u = r / (tuning_c * scale)
            weights = np.where(np.abs(u) <= 1.0, (1.0 - u**2) ** 2, 0.0)
        if not np.any(weights > 0):
            raise DegenerateWeightsError("bisquare weights all vanished")
        w_new = solvers.weighted_least_squares(X, y, weights)
        trace.append((it, w_new))
        step = float(np.linalg.norm(w_new - w))
        w = w_new
        if step < tol:
            break
    wall = (time.perf_counter() - t0) * 1e3
    return BaselineResult(method="tukey", model=w, trace=trace, wall_ms=wall)


def coordinate_median(points) -> np.ndarray:
    """Per-dimension median, taking the lower of the two middles on even n."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("points must be a nonempty (n, d) array")
    n = pts.shape[0]
    return np.sort(pts, axis=0)[(n - 1) // 2]


def geometric_median(points, tol: float = 1e-10, max_iters: int = 1000) -> np.ndarray:
    """Geometric median by fixed-point iteration.

    Runs the inverse-distance-weighted averaging step until the step norm
    drops below ``tol``; when an iterate lands on a data point, the
    standard shifted update is used (the iterate acts as a point of unit
    multiplicity) so the objective keeps decreasing.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("points must be a nonempty (n, d) array")
    m = pts.mean(axis=0)
    scale = max(1.0, float(np.max(np.abs(pts))))
    eps = 1e-12 * scale
    for _ in range(max_iters):
        dist = np.linalg.norm(pts - m, axis=1)
        on_point = dist < eps
        if np.any(on_point):
            far = ~on_point
            if not np.any(far):
                return m
            inv = 1.0 / dist[far]
            T = (pts[far].T @ inv) / np.sum(inv)
            R = np.linalg.norm((pts[far] - m).T @ inv)
            k = int(np.sum(on_point))
            if R <= k:
                return m
            ratio = k / R
            m_new = (1.0 - ratio) * T + ratio * m
        else:
            inv = 1.0 / dist
            m_new = (pts.T @ inv) / np.sum(inv)
        step = float(np.linalg.norm(m_new - m))
        m = m_new
        if step <= tol:
            break
    return m
