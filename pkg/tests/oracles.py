"""Independent reference implementations used to pin expected test values.

Everything here deliberately avoids the code paths used by the package:
matrix exponentials come from a scaled Taylor series, covariance integrals
from explicit quadrature with eigendecomposition propagators, and moments
from brute-force simulation. Slower and simpler, by design.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, stats


def expm_taylor(A: np.ndarray, tau: float, terms: int = 30) -> np.ndarray:
    """Matrix exponential of A*tau via scaling, 30-term Taylor series, squaring."""
    M = np.asarray(A, dtype=float) * tau
    norm = np.linalg.norm(M, 1)
    squarings = max(0, int(math.ceil(math.log2(norm)))) + 1 if norm > 0 else 0
    S = M / 2.0**squarings
    n = S.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    for j in range(1, terms + 1):
        term = term @ S / j
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def _propagators(A: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Stack of e^{A v} for each v in offsets, via complex eigendecomposition.

    Requires A to be diagonalisable with a well-conditioned eigenvector
    matrix; callers drawing random systems should resample when
    ``np.linalg.cond`` of the eigenvectors is large.
    """
    w, V = np.linalg.eig(np.asarray(A, dtype=float))
    Vinv = np.linalg.inv(V)
    phases = np.exp(np.outer(offsets, w))
    stack = np.einsum("ij,nj,jk->nik", V, phases, Vinv)
    return stack.real


def q_quadrature(
    A: np.ndarray, L: np.ndarray, tau: float, nodes: int = 10_000, rule: str = "trapezoid"
) -> np.ndarray:
    """Process covariance integral on a uniform grid of ``nodes`` intervals.

    Integrates e^{A(tau-u)} L L^T e^{A^T(tau-u)} over u in [0, tau] with the
    trapezoid or Simpson rule.
    """
    u = np.linspace(0.0, tau, nodes + 1)
    EL = _propagators(A, tau - u) @ np.asarray(L, dtype=float)
    G = np.einsum("nik,njk->nij", EL, EL)
    if rule == "trapezoid":
        return np.trapezoid(G, u, axis=0)
    if rule == "simpson":
        return integrate.simpson(G, x=u, axis=0)
    raise ValueError(f"unknown rule {rule!r}")


def eigvec_condition(A: np.ndarray) -> float:
    """Condition number of A's eigenvector matrix (guards oracle accuracy)."""
    _, V = np.linalg.eig(np.asarray(A, dtype=float))
    return float(np.linalg.cond(V))


def euler_maruyama_moments(
    A: np.ndarray,
    noise_cols: np.ndarray,
    s0: np.ndarray,
    dt_total: float,
    jump_times: list[float],
    jump_dirs: np.ndarray,
    mu_jump: float,
    sigma_jump: float,
    n_paths: int = 100_000,
    n_steps: int = 1000,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the jump-SDE state after ``dt_total``.

    Simulates ds = A s dt + noise_cols dB with Gaussian jumps of size
    N(mu_jump, sigma_jump^2) applied along each column of ``jump_dirs`` at
    the given times. Plain Euler-Maruyama on a fixed grid.
    """
    rng = np.random.default_rng(seed)
    dt = dt_total / n_steps
    sqdt = math.sqrt(dt)
    noise_cols = np.atleast_2d(np.asarray(noise_cols, dtype=float))
    if noise_cols.ndim == 2 and noise_cols.shape[0] != len(s0):
        noise_cols = noise_cols.T
    jump_dirs = np.atleast_2d(np.asarray(jump_dirs, dtype=float))
    if jump_dirs.shape[0] != len(s0):
        jump_dirs = jump_dirs.T
    jump_steps = {int(round(t / dt)) for t in jump_times}
    s = np.tile(np.asarray(s0, dtype=float), (n_paths, 1))
    AT = np.asarray(A, dtype=float).T
    m = noise_cols.shape[1]
    for k in range(1, n_steps + 1):
        dB = rng.standard_normal((n_paths, m)) * sqdt
        s = s + s @ AT * dt + dB @ noise_cols.T
        if k in jump_steps:
            sizes = mu_jump + sigma_jump * rng.standard_normal((n_paths, jump_dirs.shape[1]))
            s = s + sizes @ jump_dirs.T
    mean = s.mean(axis=0)
    cov = np.cov(s.T)
    return mean, np.atleast_2d(cov)


def renewal_mean_count(shape: float, scale: float, horizon: float, terms: int = 200) -> float:
    """Expected renewal count on (0, horizon] for gamma inter-arrivals.

    Uses m(t) = sum_n P(S_n <= t) with S_n ~ Gamma(n*shape, scale); the sum
    is truncated once the tail terms vanish.
    """
    total = 0.0
    for n in range(1, terms + 1):
        p = stats.gamma.cdf(horizon, a=n * shape, scale=scale)
        total += p
        if p < 1e-16:
            break
    return total


def gauss_hermite_moments(
    F: np.ndarray, b: np.ndarray, Q: np.ndarray, mu: np.ndarray, Sigma: np.ndarray, order: int = 40
) -> tuple[np.ndarray, np.ndarray]:
    """Marginal moments of s' = F s + b + w via tensor Gauss-Hermite quadrature.

    Integrates the polynomial moment integrands of N(s | mu, Sigma) exactly
    (up to rounding), then adds the w ~ N(0, Q) contribution. Independent of
    any covariance-propagation identity.
    """
    d = len(mu)
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    grids = np.meshgrid(*([nodes] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([weights] * d), indexing="ij")
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    wts = wts / wts.sum()
    chol = np.linalg.cholesky(Sigma)
    samples = mu + pts @ chol.T
    mapped = samples @ np.asarray(F, dtype=float).T + b
    mean = wts @ mapped
    centred = mapped - mean
    cov = (centred * wts[:, None]).T @ centred + np.asarray(Q, dtype=float)
    return mean, cov
