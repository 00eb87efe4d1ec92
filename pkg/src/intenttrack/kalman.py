"""Gaussian beliefs and exact conditioning on linear measurements.

Conditioned on a jump history, every motion model in this package is
linear-Gaussian, so the kinematic state admits a closed-form filter. These
functions implement one predict and one update step on a single belief;
innovation covariances are factorised by Cholesky and never inverted
explicitly, and the update reports the log predictive likelihood that the
particle filter uses as its importance weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericError
from .sde import TransitionParams


@dataclass(frozen=True)
class GaussianBelief:
    """Gaussian state belief N(mean, cov).

    Attributes:
        mean: State mean, shape (n,).
        cov: State covariance, shape (n, n).
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.ndim != 1:
            raise DimensionError(f"mean must be a vector, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise DimensionError(f"cov shape {cov.shape} does not match mean size {mean.size}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class ObservationModel:
    """Linear measurement m = H s + e with e ~ N(0, R).

    Attributes:
        H: Measurement matrix, shape (m, n).
        R: Measurement noise covariance, shape (m, m).
    """

    H: np.ndarray
    R: np.ndarray

    def __post_init__(self) -> None:
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        if R.shape != (H.shape[0], H.shape[0]):
            raise DimensionError(f"R shape {R.shape} does not match {H.shape[0]} measurements")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "R", R)


def predict(belief: GaussianBelief, trans: TransitionParams) -> GaussianBelief:
    """Propagate a belief through one window transition.

    Args:
        belief: Current belief over the state.
        trans: Window transition in F-form (linear map, offset, noise cov).

    Returns:
        The predicted belief N(F mean + offset, F cov F^T + Q).
    """
    if trans.F.shape[1] != belief.dim:
        raise DimensionError(
            f"transition acts on dimension {trans.F.shape[1]}, belief has {belief.dim}"
        )
    mean = trans.F @ belief.mean + trans.offset
    cov = trans.F @ belief.cov @ trans.F.T + trans.Q
    return GaussianBelief(mean, 0.5 * (cov + cov.T))


def update(
    belief: GaussianBelief, obs: ObservationModel, measurement: np.ndarray
) -> tuple[GaussianBelief, float]:
    """Condition a belief on one measurement.

    Args:
        belief: Predicted belief.
        obs: Measurement model.
        measurement: Observed vector, shape (m,).

    Returns:
        The posterior belief (Joseph-form covariance) and the log predictive
        likelihood log N(measurement | H mean, H cov H^T + R).

    Raises:
        NumericError: If the innovation covariance is singular or any input
            is non-finite. Nothing is regularised silently.
    """
    H, R = obs.H, obs.R
    if H.shape[1] != belief.dim:
        raise DimensionError(f"H acts on dimension {H.shape[1]}, belief has {belief.dim}")
    m = np.asarray(measurement, dtype=float).reshape(-1)
    if m.size != H.shape[0]:
        raise DimensionError(f"measurement size {m.size} does not match H rows {H.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise NumericError("measurement contains non-finite entries")
    P = belief.cov
    S = H @ P @ H.T + R
    S = 0.5 * (S + S.T)
    try:
        chol = scipy.linalg.cho_factor(S, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NumericError(f"singular innovation covariance: {exc}") from exc
    innovation = m - H @ belief.mean
    gain = scipy.linalg.cho_solve(chol, H @ P).T
    mean = belief.mean + gain @ innovation
    closure = np.eye(belief.dim) - gain @ H
    cov = closure @ P @ closure.T + gain @ R @ gain.T
    whitened = scipy.linalg.cho_solve(chol, innovation)
    log_lik = -0.5 * (
        m.size * math.log(2.0 * math.pi)
        + 2.0 * np.log(np.diag(chol[0])).sum()
        + innovation @ whitened
    )
    if not math.isfinite(log_lik):
        raise NumericError("log predictive likelihood is not finite")
    return GaussianBelief(mean, 0.5 * (cov + cov.T)), float(log_lik)
