"""Nadaraya-Watson estimation of the time-varying residual covariance.

Smooths the outer products u_t u_t' over rescaled time with a Gaussian
kernel, giving a pointwise estimate of Sigma(r) on a grid in (0, 1].  The
estimator is biased near the interval edges and at variance break points;
weights are renormalized at the boundary rather than reflected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

__all__ = ["CovarianceCurve", "nw_covariance", "default_bandwidth"]


@dataclass(frozen=True)
class CovarianceCurve:
    """Covariance estimates Sigma_hat(r) on a grid of rescaled times."""

    grid: np.ndarray          # (G,) strictly increasing, within (0, 1]
    estimates: np.ndarray     # (G, d, d), each symmetric
    bandwidth: float

    def block12(self, d1: int) -> np.ndarray:
        """The (G, d1, d2) upper-right blocks: the cross-covariance curve."""
        if not 1 <= d1 < self.estimates.shape[1]:
            raise ValueError(f"d1 out of range for dimension {self.estimates.shape[1]}")
        return self.estimates[:, :d1, d1:]


def default_bandwidth(T: int) -> float:
    """Rule-of-thumb bandwidth T^(-1/5)."""
    return float(T) ** (-0.2)


def nw_covariance(
    residuals: np.ndarray,
    d1: int,
    bandwidth: float | None = None,
    grid_size: int = 200,
) -> CovarianceCurve:
    """Kernel-smoothed covariance curve of a residual matrix.

    Parameters
    ----------
    residuals : ndarray, shape (T, d)
    d1 : int
        Split point; recorded so callers can extract the d1 x d2 block.
    bandwidth : float, optional
        Gaussian kernel bandwidth in rescaled time; defaults to T^(-1/5).
    grid_size : int
        Number of equispaced evaluation points in (0, 1].

    Raises
    ------
    NumericalError
        If the bandwidth is so small that some grid point receives a total
        kernel mass below 1e-12.
    """
    residuals = np.asarray(residuals, dtype=float)
    T, d = residuals.shape
    if T < 10:
        raise ValueError(f"need at least 10 observations, got {T}")
    if not 1 <= d1 < d:
        raise ValueError(f"d1 must satisfy 1 <= d1 < d; got d1={d1}, d={d}")
    if bandwidth is None:
        bandwidth = default_bandwidth(T)
    if not 0.0 < bandwidth:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if grid_size < 1:
        raise ValueError(f"grid_size must be positive, got {grid_size}")

    grid = np.arange(1, grid_size + 1) / grid_size
    times = np.arange(1, T + 1) / T
    z = (times[None, :] - grid[:, None]) / bandwidth
    kernel = np.exp(-0.5 * z * z)  # Gaussian, constant factor cancels
    mass = kernel.sum(axis=1)
    if np.min(mass) < 1e-12:
        r_bad = grid[int(np.argmin(mass))]
        raise NumericalError(
            f"bandwidth {bandwidth:g} leaves grid point r={r_bad:g} with "
            f"kernel mass below 1e-12"
        )
    weights = kernel / mass[:, None]  # (G, T), rows sum to 1

    outer = residuals[:, :, None] * residuals[:, None, :]  # (T, d, d)
    estimates = np.einsum("gt,tij->gij", weights, outer)
    estimates = 0.5 * (estimates + estimates.transpose(0, 2, 1))
    return CovarianceCurve(grid=grid, estimates=estimates, bandwidth=float(bandwidth))
