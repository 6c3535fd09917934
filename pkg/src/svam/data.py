"""Synthetic data generation and adversarial label corruption.

Covariates, realizable labels for each task, and a configurable adversary
(corruption rate, placement strategy, corruption type) with seeded
determinism end to end.  Datasets round-trip through CSV with 17
significant digits so reloads are bitwise exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
import warnings

import numpy as np

__all__ = [
    "Dataset",
    "AdversarySpec",
    "random_unit_vector",
    "gen_covariates",
    "gen_points",
    "gen_labels",
    "leverage_scores",
    "choose_locations",
    "corrupt",
    "save_csv",
    "load_csv",
]

_LOCATIONS = ("random", "magnitude", "leverage")
_KINDS = ("adversarial_model", "sign_flip", "constant", "multiplicative")
_AWARENESS = ("oblivious", "partially_adaptive", "fully_adaptive")


@dataclass(eq=False)
class Dataset:
    """Covariates plus (optional) labels and simulation metadata.

    For mean estimation the rows of ``X`` are the points themselves and
    ``y`` is ``None``.  ``w_true``, ``corrupted_mask``, ``w_adv`` and
    ``gamma_shape_phi`` are simulation metadata: present when the data
    was generated here, absent for externally loaded data.
    """

    X: np.ndarray
    y: np.ndarray | None = None
    w_true: np.ndarray | None = None
    corrupted_mask: np.ndarray | None = None
    w_adv: np.ndarray | None = None
    gamma_shape_phi: float | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class AdversarySpec:
    """How much data gets corrupted, where, and with what values.

    ``awareness`` is metadata describing what information the adversary
    may consult; an oblivious adversary cannot place corruptions using
    the data, so only ``location="random"`` is allowed there.
    ``magnitude``/``leverage`` placements are adaptive by construction.
    """

    alpha: float
    location: str = "random"
    kind: str = "adversarial_model"
    constant_value: float | None = None
    awareness: str = "partially_adaptive"
    multiplicative_range: tuple[float, float] = (10.0, 1000.0)

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"corruption rate alpha must lie in [0, 1), got {self.alpha!r}")
        if self.location not in _LOCATIONS:
            raise ValueError(f"unknown location strategy {self.location!r}")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown corruption kind {self.kind!r}")
        if self.awareness not in _AWARENESS:
            raise ValueError(f"unknown adversary awareness {self.awareness!r}")
        if self.kind == "constant" and (
            self.constant_value is None or not np.isfinite(self.constant_value)
        ):
            raise ValueError("constant corruption requires a finite constant_value")
        if self.awareness == "oblivious" and self.location != "random":
            raise ValueError("an oblivious adversary can only place corruptions at random")
        lo, hi = self.multiplicative_range
        if not (0 < lo <= hi):
            raise ValueError("multiplicative_range must satisfy 0 < low <= high")

    def num_corruptions(self, n: int) -> int:
        return int(np.floor(self.alpha * n))


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random direction on the unit sphere in d dimensions."""
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def gen_covariates(n: int, d: int, dist: str = "std_normal", seed: int | None = 0) -> np.ndarray:
    """Draw an (n, d) covariate matrix, deterministically given ``seed``.

    ``std_normal`` rows are N(0, I_d); ``unit_sphere`` rows are uniform
    on the unit sphere (each row has unit norm).
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    if dist == "std_normal":
        return X
    if dist == "unit_sphere":
        return X / np.linalg.norm(X, axis=1, keepdims=True)
    raise ValueError(f"unknown covariate distribution {dist!r}")


def gen_points(n: int, d: int, mu_true: np.ndarray, seed, var: float | None = None) -> np.ndarray:
    """Sample n points from N(mu_true, var * I_d); default var is 1/d."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if var is None:
        var = 1.0 / d
    return np.asarray(mu_true, dtype=float) + np.sqrt(var) * rng.standard_normal((n, d))


def gen_labels(X, w_true, task: str, noise_beta_star: float | None = None,
               phi: float | None = None, seed=None) -> np.ndarray:
    """Clean labels for a realizable model.

    rr: ``y = X w`` plus N(0, 1/beta_star) noise when ``noise_beta_star``
    is given; lr: ``y = sign(<w, x>)`` in {-1, +1}; gamma:
    ``y = (1 - phi) exp(-<w, x>)`` (the mode of the gamma density whose
    parameter is ``exp(<w, x>)``).
    """
    X = np.asarray(X, dtype=float)
    w_true = np.asarray(w_true, dtype=float)
    z = X @ w_true
    if task == "rr":
        y = z.copy()
        if noise_beta_star is not None:
            if noise_beta_star <= 0:
                raise ValueError("noise_beta_star must be positive")
            rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
            y = y + rng.standard_normal(len(z)) / np.sqrt(noise_beta_star)
        return y
    if task == "lr":
        return np.where(z > 0, 1.0, -1.0)
    if task == "gamma":
        if phi is None or not (0.0 < phi < 1.0):
            raise ValueError("gamma labels require shape phi in (0, 1)")
        return (1.0 - phi) * np.exp(-z)
    raise ValueError(f"gen_labels does not apply to task {task!r}")


def leverage_scores(X) -> np.ndarray:
    """Diagonal of the hat matrix H = X (X^T X)^-1 X^T.

    Scores lie in [0, 1] and sum to rank(X); a rank-deficient design
    falls back to the pseudo-inverse with a warning.
    """
    X = np.asarray(X, dtype=float)
    G = X.T @ X
    try:
        B = np.linalg.solve(G, X.T)
    except np.linalg.LinAlgError:
        warnings.warn("rank-deficient design; leverage scores use the pseudo-inverse")
        B = np.linalg.pinv(G) @ X.T
    scores = np.einsum("ij,ji->i", X, B)
    return np.clip(scores, 0.0, 1.0)


def choose_locations(spec: AdversarySpec, X, y, seed) -> np.ndarray:
    """Indices of the points the adversary will corrupt (sorted, size floor(alpha n)).

    random: uniform without replacement; magnitude: largest ``|y|``;
    leverage: largest leverage scores.  Ties break toward the lowest
    index, and everything is deterministic given ``seed``.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    k = spec.num_corruptions(n)
    if k == 0:
        return np.empty(0, dtype=int)
    if spec.location == "random":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        return np.sort(rng.choice(n, size=k, replace=False))
    if spec.location == "magnitude":
        if y is None:
            raise ValueError("magnitude placement requires labels")
        order = np.argsort(-np.abs(np.asarray(y, dtype=float)), kind="stable")
    else:  # leverage
        order = np.argsort(-leverage_scores(X), kind="stable")
    return np.sort(order[:k])


def corrupt(data: Dataset, spec: AdversarySpec, seed, task: str) -> Dataset:
    """Apply the adversary to a clean dataset; labels off the mask are untouched.

    Exactly ``floor(alpha n)`` labels change.  For ``adversarial_model``
    the adversarial model is an independent random unit vector (for mean
    estimation: the corrupted points are resampled around the adversarial
    center); ``sign_flip`` negates labels; ``constant`` overwrites with
    ``constant_value``; ``multiplicative`` (gamma only) multiplies by
    factors log-uniform over ``multiplicative_range``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if task == "me":
        if spec.kind != "adversarial_model":
            raise ValueError("mean estimation supports only adversarial_model corruption")
        if spec.location != "random":
            raise ValueError("mean estimation placement requires location='random'")
    if spec.kind == "multiplicative" and task != "gamma":
        raise ValueError("multiplicative corruption applies only to the gamma task")
    if spec.kind == "sign_flip" and task not in ("rr", "lr"):
        raise ValueError("sign_flip corruption applies only to rr and lr tasks")
    if spec.kind == "constant" and task == "gamma" and spec.constant_value <= 0:
        raise ValueError("gamma labels must stay positive under constant corruption")

    idx = choose_locations(spec, data.X, data.y, rng)
    mask = np.zeros(data.n, dtype=bool)
    mask[idx] = True
    w_adv = None

    if task == "me":
        # Corrupted points are resampled around the adversarial center.
        X = data.X.copy()
        d = data.d
        w_adv = 6.0 * random_unit_vector(d, rng)
        if len(idx):
            X[idx] = gen_points(len(idx), d, w_adv, rng)
        return replace(data, X=X, corrupted_mask=mask, w_adv=w_adv)

    y = data.y.copy()
    if spec.kind == "adversarial_model":
        w_adv = random_unit_vector(data.d, rng)
        if task == "rr":
            bad = data.X[idx] @ w_adv
        elif task == "lr":
            bad = np.where(data.X[idx] @ w_adv > 0, 1.0, -1.0)
        elif task == "gamma":
            phi = data.gamma_shape_phi
            if phi is None:
                raise ValueError("gamma adversarial_model corruption needs gamma_shape_phi")
            bad = (1.0 - phi) * np.exp(-(data.X[idx] @ w_adv))
        else:
            raise ValueError(f"unknown task {task!r}")
        y[idx] = bad
    elif spec.kind == "sign_flip":
        y[idx] = -y[idx]
    elif spec.kind == "constant":
        y[idx] = spec.constant_value
    else:  # multiplicative
        lo, hi = spec.multiplicative_range
        factors = np.exp(rng.uniform(np.log(lo), np.log(hi), size=len(idx)))
        y[idx] = y[idx] * factors
    return replace(data, y=y, corrupted_mask=mask, w_adv=w_adv)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_csv(data: Dataset, path) -> None:
    """Write covariates, labels and the corruption flag as CSV.

    Header is ``x0,...,x{d-1},y,is_corrupted``; mean-estimation datasets
    (``y is None``) omit the ``y`` column.  Floats carry 17 significant
    digits so a reload is bitwise identical.
    """
    mask = data.corrupted_mask
    if mask is None:
        mask = np.zeros(data.n, dtype=bool)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"x{j}" for j in range(data.d)]
        if data.y is not None:
            header.append("y")
        header.append("is_corrupted")
        writer.writerow(header)
        for i in range(data.n):
            row = [_fmt(v) for v in data.X[i]]
            if data.y is not None:
                row.append(_fmt(data.y[i]))
            row.append(str(int(mask[i])))
            writer.writerow(row)


def load_csv(path) -> Dataset:
    """Read a dataset written by :func:`save_csv` (ground truth is not stored)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        has_y = "y" in header
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: empty dataset")
    ncols = len(header)
    d = ncols - 1 - int(has_y)
    X = np.empty((len(rows), d))
    y = np.empty(len(rows)) if has_y else None
    mask = np.empty(len(rows), dtype=bool)
    for i, row in enumerate(rows):
        if len(row) != ncols:
            raise ValueError(f"{path}: row {i + 2} has {len(row)} fields, expected {ncols}")
        X[i] = [float(v) for v in row[:d]]
        if has_y:
            y[i] = float(row[d])
        mask[i] = bool(int(row[-1]))
    return Dataset(X=X, y=y, corrupted_mask=mask)
