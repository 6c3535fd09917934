"""Variance-altered exponential-family likelihood evaluations.

Each supported family (gaussian, bernoulli with labels in {-1, +1}, and
gamma with shape parameter ``phi``) admits a scale knob ``beta > 0`` that
shrinks the variance of the label distribution at rate ``1/beta`` while
preserving the order and the mode of the density.  The altered densities
are what the reweighting engine uses as per-point weights.

Conventions:

- Gaussian weights are returned unnormalized by default,
  ``exp(-beta/2 * (y - eta)**2)``, because the normalizer is constant
  across points at fixed ``beta`` and cancels in every weighted argmin.
  Pass ``normalized=True`` for the textbook density.
- Gamma weights are full densities whose normalizer depends on the
  point-wise parameter, so they are computed in log space; callers that
  need a well-scaled batch should shift by the batch maximum (see
  :func:`gamma_log_density`).
- Weights below ``WEIGHT_FLOOR`` clamp to exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

__all__ = [
    "FamilySpec",
    "GammaAlteredParams",
    "WEIGHT_FLOOR",
    "gaussian_weight",
    "squared_distance_weight",
    "bernoulli_weight",
    "bernoulli_weight_margin",
    "gamma_altered_params",
    "gamma_density",
    "gamma_log_density",
    "altered_variance",
    "clamp_weights",
]

# Below this value a weight is treated as exactly zero.
WEIGHT_FLOOR = 1e-300

_FAMILIES = ("gaussian", "bernoulli", "gamma")


@dataclass(frozen=True)
class FamilySpec:
    """Which GLM family is in play, plus the gamma shape when relevant.

    Parameters
    ----------
    family_kind : {"gaussian", "bernoulli", "gamma"}
    gamma_shape_phi : float, optional
        Shape parameter of the gamma family, required in (0, 1) when
        ``family_kind == "gamma"`` and ignored otherwise.
    """

    family_kind: str
    gamma_shape_phi: float | None = None

    def __post_init__(self):
        if self.family_kind not in _FAMILIES:
            raise ValueError(f"unknown family {self.family_kind!r}; expected one of {_FAMILIES}")
        if self.family_kind == "gamma":
            phi = self.gamma_shape_phi
            if phi is None or not (0.0 < phi < 1.0):
                raise ValueError("gamma family requires gamma_shape_phi in (0, 1)")


class GammaAlteredParams(NamedTuple):
    """Scale-altered gamma parameters; the mode (1 - phi)/eta is preserved."""

    eta_tilde: float
    phi_tilde: float


def _check_beta(beta) -> None:
    if not np.all(np.isfinite(beta)) or np.any(np.asarray(beta) <= 0):
        raise ValueError(f"scale beta must be a finite positive real, got {beta!r}")


def _check_finite(name, value) -> None:
    if not np.all(np.isfinite(value)):
        raise ValueError(f"{name} must be finite")


def gaussian_weight(y, eta, beta, normalized: bool = False):
    """Scale-altered gaussian likelihood ``exp(-beta/2 (y - eta)^2)``.

    Parameters
    ----------
    y, eta : array_like
        Label(s) and location parameter(s); broadcast together.
    beta : float
        Scale; must be positive.
    normalized : bool
        Multiply by ``sqrt(beta / 2 pi)`` to obtain the proper density.

    Returns
    -------
    ndarray or float
        Nonnegative weight(s), in (0, 1] when unnormalized.
    """
    _check_beta(beta)
    y = np.asarray(y, dtype=float)
    eta = np.asarray(eta, dtype=float)
    _check_finite("y", y)
    _check_finite("eta", eta)
    w = np.exp(-0.5 * beta * (y - eta) ** 2)
    if normalized:
        w = np.sqrt(beta / (2.0 * np.pi)) * w
    return w if w.ndim else float(w)


def squared_distance_weight(points, center, beta):
    """Multivariate gaussian weight ``exp(-beta/2 ||x - center||^2)``.

    This is the product-of-coordinates form used for mean estimation;
    ``points`` is (n, d) and ``center`` is (d,).
    """
    _check_beta(beta)
    points = np.asarray(points, dtype=float)
    center = np.asarray(center, dtype=float)
    _check_finite("points", points)
    _check_finite("center", center)
    sq = np.sum((points - center) ** 2, axis=-1)
    return np.exp(-0.5 * beta * sq)


def _validate_pm1(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("bernoulli labels must lie in {-1, +1}")
    return y


def bernoulli_weight(y, eta, beta):
    """Scale-altered bernoulli likelihood ``(1 + exp(-beta y eta))^-1``.

    Labels must lie in {-1, +1}.  The weight is strictly increasing in
    the margin ``y * eta`` and lies in (0, 1).
    """
    y = _validate_pm1(y)
    eta = np.asarray(eta, dtype=float)
    _check_finite("eta", eta)
    return bernoulli_weight_margin(y * eta, beta)


def bernoulli_weight_margin(margin, beta):
    """Same as :func:`bernoulli_weight` with the margin ``y * eta`` precomputed."""
    _check_beta(beta)
    margin = np.asarray(margin, dtype=float)
    _check_finite("margin", margin)
    # Stable logistic sigmoid of beta * margin.
    z = beta * margin
    w = np.empty_like(z)
    pos = z >= 0
    w[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    w[~pos] = ez / (1.0 + ez)
    return w if w.ndim else float(w)


def gamma_altered_params(eta, phi: float, beta) -> GammaAlteredParams:
    """Map gamma parameters (eta, phi) to their scale-beta altered pair.

    ``phi_tilde = phi / (phi + beta (1 - phi))`` and
    ``eta_tilde = eta * beta / (phi + beta (1 - phi))``; the density mode
    ``(1 - phi)/eta`` is invariant under the map, and ``beta = 1`` is the
    identity.
    """
    _check_beta(beta)
    if not (0.0 < phi < 1.0):
        raise ValueError(f"gamma shape phi must lie in (0, 1), got {phi!r}")
    eta = np.asarray(eta, dtype=float)
    _check_finite("eta", eta)
    if np.any(eta <= 0):
        raise ValueError("gamma parameter eta must be positive")
    denom = phi + beta * (1.0 - phi)
    eta_t = eta * beta / denom
    phi_t = phi / denom
    if eta_t.ndim:
        return GammaAlteredParams(eta_t, float(phi_t))
    return GammaAlteredParams(float(eta_t), float(phi_t))


def gamma_log_density(y, eta, phi):
    """Log of :func:`gamma_density`; prefer this for batch weight work."""
    if np.any(np.asarray(phi) <= 0) or np.any(np.asarray(phi) >= 1):
        raise ValueError(f"gamma shape phi must lie in (0, 1), got {phi!r}")
    y = np.asarray(y, dtype=float)
    eta = np.asarray(eta, dtype=float)
    _check_finite("y", y)
    _check_finite("eta", eta)
    if np.any(y <= 0):
        raise ValueError("gamma labels must be positive")
    if np.any(eta <= 0):
        raise ValueError("gamma parameter eta must be positive")
    inv_phi = 1.0 / phi
    logpdf = (
        -np.log(y)
        - gammaln(inv_phi)
        + inv_phi * (np.log(y) + np.log(eta) - np.log(phi))
        - y * eta / phi
    )
    return logpdf if logpdf.ndim else float(logpdf)


def gamma_density(y, eta, phi):
    """Gamma density ``(y eta / phi)^(1/phi) exp(-y eta / phi) / (y Gamma(1/phi))``.

    Parametrized so that the mean is ``1/eta`` and the mode ``(1 - phi)/eta``.
    Computed in log space and exponentiated on return.
    """
    return np.exp(gamma_log_density(y, eta, phi))


def altered_variance(spec: FamilySpec, eta, beta) -> float:
    """Closed-form variance of the scale-``beta`` altered distribution.

    gaussian: ``1/beta``; gamma: ``(phi/eta^2) (phi + beta(1-phi)) / beta^2``;
    bernoulli: exact variance ``4 p (1 - p)`` of a {-1,+1} variable with
    ``p = (1 + exp(-beta eta))^-1`` (decreasing in beta only for eta != 0).
    """
    _check_beta(beta)
    if spec.family_kind == "gaussian":
        return 1.0 / beta
    if spec.family_kind == "bernoulli":
        p = bernoulli_weight_margin(np.asarray(eta, dtype=float), beta)
        return float(4.0 * p * (1.0 - p))
    if spec.family_kind == "gamma":
        eta = float(eta)
        if eta <= 0:
            raise ValueError("gamma parameter eta must be positive")
        phi = spec.gamma_shape_phi
        return (phi / eta**2) * (phi + beta * (1.0 - phi)) / beta**2
    raise ValueError(f"unsupported family {spec.family_kind!r}")


def clamp_weights(weights: np.ndarray) -> np.ndarray:
    """Zero out weights below ``WEIGHT_FLOOR`` (in place safe copy)."""
    w = np.asarray(weights, dtype=float).copy()
    w[w < WEIGHT_FLOOR] = 0.0
    return w
