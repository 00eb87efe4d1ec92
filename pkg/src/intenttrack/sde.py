"""Discretisation kernels for linear SDEs driven by diffusion and jumps.

These are the building blocks every motion model reduces to: the state
transition matrix over a window, the accumulated diffusion covariance, and
the mean/covariance contributions of Gaussian jumps landing inside the
window. All windows are measured in seconds and all kernels work on the
full stacked state, so callers never special-case the number of axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ContractViolationError, DimensionError, NumericError


@dataclass(frozen=True)
class TransitionParams:
    """One-window linear-Gaussian transition s' = F s + offset + w, w ~ N(0, Q).

    Attributes:
        F: State transition matrix, shape (n, n).
        offset: Deterministic drift added after the linear map, shape (n,).
        Q: Covariance of the additive Gaussian noise, shape (n, n).
    """

    F: np.ndarray
    offset: np.ndarray
    Q: np.ndarray

    @property
    def dim(self) -> int:
        return self.F.shape[0]


def _checked_square(A: np.ndarray, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericError(f"{name} contains non-finite entries")
    return A


def _checked_duration(tau: float) -> float:
    tau = float(tau)
    if not np.isfinite(tau):
        raise NumericError("duration is not finite")
    if tau < 0.0:
        raise ContractViolationError(f"duration must be non-negative, got {tau}")
    return tau


def _as_columns(h: np.ndarray, n: int, name: str) -> np.ndarray:
    """Coerce a direction argument to an (n, m) column matrix."""
    h = np.asarray(h, dtype=float)
    if h.ndim == 1:
        h = h[:, None]
    if h.ndim != 2 or h.shape[0] != n:
        raise DimensionError(f"{name} must have {n} rows, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise NumericError(f"{name} contains non-finite entries")
    return h


def expm(A: np.ndarray, tau: float) -> np.ndarray:
    """Transition matrix e^{A tau} of the deterministic flow.

    Args:
        A: Drift matrix, shape (n, n).
        tau: Elapsed time, must be non-negative.

    Returns:
        The (n, n) matrix exponential; exactly the identity when tau == 0.
    """
    A = _checked_square(A, "A")
    tau = _checked_duration(tau)
    n = A.shape[0]
    if tau == 0.0:
        return np.eye(n)
    out = scipy.linalg.expm(A * tau)
    if not np.all(np.isfinite(out)):
        raise NumericError("matrix exponential overflowed")
    # A zero drift row means that coordinate is frozen by the flow; the exact
    # exponential row is the identity row, but the Pade solve leaves crumbs.
    frozen = ~np.any(A != 0.0, axis=1)
    if np.any(frozen):
        out[frozen, :] = np.eye(n)[frozen, :]
    return out


def process_covariance(A: np.ndarray, L: np.ndarray, tau: float) -> np.ndarray:
    """Diffusion covariance accumulated over a window of length tau.

    Evaluates Q_tau = int_0^tau e^{A(tau-u)} L L^T e^{A^T(tau-u)} du by the
    matrix-fraction decomposition (one exponential of a doubled system
    rather than explicit quadrature).

    Args:
        A: Drift matrix, shape (n, n).
        L: Noise input columns, shape (n, m) or (n,) for a single column.
        tau: Window length, must be non-negative.

    Returns:
        The (n, n) covariance, symmetrised and floored at zero eigenvalues.
        Coordinates untouched by both drift and noise get exact zero
        rows/columns, so invariant sub-states keep zero variance.
    """
    A = _checked_square(A, "A")
    n = A.shape[0]
    L = _as_columns(L, n, "L")
    tau = _checked_duration(tau)
    if tau == 0.0:
        return np.zeros((n, n))
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -A
    block[:n, n:] = L @ L.T
    block[n:, n:] = A.T
    phi = scipy.linalg.expm(block * tau)
    if not np.all(np.isfinite(phi)):
        raise NumericError("covariance exponential overflowed")
    F = phi[n:, n:].T
    Q = F @ phi[:n, n:]
    Q = 0.5 * (Q + Q.T)
    eigvals = np.linalg.eigvalsh(Q)
    if eigvals[0] < 0.0:
        w, V = np.linalg.eigh(Q)
        Q = (V * np.clip(w, 0.0, None)) @ V.T
        Q = 0.5 * (Q + Q.T)
    # Rows with no drift and no noise span an invariant subspace; the exact
    # integral is zero there but the doubled-system solve leaves crumbs.
    inert = ~np.any(A != 0.0, axis=1) & ~np.any(L != 0.0, axis=1)
    if np.any(inert):
        Q[inert, :] = 0.0
        Q[:, inert] = 0.0
    return Q


def jump_contributions(
    A: np.ndarray,
    h_jump: np.ndarray,
    jump_times: "list[float] | np.ndarray",
    t_end: float,
    mu_jump: float,
    sigma_jump: float,
    t_start: "float | None" = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean offset and covariance added by in-window Gaussian jumps.

    Each jump at time tau_k injects an independent N(mu_jump, sigma_jump^2)
    size along every column of ``h_jump`` and is then propagated by the
    deterministic flow to the window end, contributing
    mu_jump * e^{A(t_end - tau_k)} h per column to the mean and
    sigma_jump^2 * (e^{A(t_end - tau_k)} h)(...)^T to the covariance.

    Args:
        A: Drift matrix, shape (n, n).
        h_jump: Jump direction columns, shape (n, m) or (n,).
        jump_times: Jump times, each in (t_start, t_end].
        t_end: Window end time.
        mu_jump: Mean jump size.
        sigma_jump: Jump size standard deviation, must be non-negative.
        t_start: Optional window start; jump times at or before it are
            rejected as a contract violation.

    Returns:
        Tuple of mean offset (n,) and covariance increment (n, n); both zero
        for an empty jump list.
    """
    A = _checked_square(A, "A")
    n = A.shape[0]
    h = _as_columns(h_jump, n, "h_jump")
    if sigma_jump < 0.0:
        raise ContractViolationError("sigma_jump must be non-negative")
    mean = np.zeros(n)
    cov = np.zeros((n, n))
    for tau_k in jump_times:
        tau_k = float(tau_k)
        if tau_k > t_end:
            raise ContractViolationError(f"jump time {tau_k} is after the window end {t_end}")
        if t_start is not None and tau_k <= t_start:
            raise ContractViolationError(
                f"jump time {tau_k} is not inside the window ({t_start}, {t_end}]"
            )
        propagated = expm(A, t_end - tau_k) @ h
        mean += mu_jump * propagated.sum(axis=1)
        cov += sigma_jump**2 * (propagated @ propagated.T)
    return mean, cov
