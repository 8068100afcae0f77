"""Simulation of VAR(1) processes with deterministically time-varying variance.

The innovation covariance is a function of rescaled time, Sigma(t/T), so the
simulated process is a triangular array: changing T changes the covariance at
every date while keeping the shape of the variance pattern fixed.  Innovations
are Gaussian, u_t = L(t/T) eps_t with L the lower Cholesky factor of
Sigma(t/T) and eps_t iid standard normal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .dataio import Dataset
from .errors import NumericalError
from .rng import stream

__all__ = [
    "VarianceProfile",
    "sigma_at",
    "cholesky_lower",
    "simulate_var1",
    "DEFAULT_AR",
]

# Bivariate AR matrix used throughout the simulation experiments; values are
# in the ballpark of a VAR(1) fit to differenced US money-supply / producer
# price data.
DEFAULT_AR = np.array([[0.64, -1.0], [-0.01, 0.44]])

Segment = tuple[float, Union[np.ndarray, Callable[[float], np.ndarray]]]


@dataclass(frozen=True)
class VarianceProfile:
    """Deterministic covariance path r in (0, 1] -> d x d matrix Sigma(r).

    Two parametric families are built in:

    * ``case1`` (no contemporaneous covariance): diagonal with
      ``Sigma11(r) = a - cos(b r)`` and ``Sigma22(r) = a + sin(b r)``;
    * ``case2``: same diagonal plus off-diagonal ``Sigma12(r) = c sin(2 pi r)``,
      which integrates to zero over (0, 1].

    ``custom`` profiles are piecewise: a list of ``(breakpoint, segment)``
    pairs with increasing breakpoints ending at 1.0, where each segment is a
    constant d x d matrix or a callable r -> d x d matrix governing
    ``r <= breakpoint``.
    """

    kind: str
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    segments: Optional[tuple[Segment, ...]] = None
    d: int = 2

    def __post_init__(self):
        if self.kind not in ("case1", "case2", "custom"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "case1" and self.c != 0.0:
            raise ValueError("case1 requires c = 0 (no instantaneous causality)")
        if self.kind == "custom":
            if not self.segments:
                raise ValueError("custom profile requires segments")
            breaks = [bp for bp, _ in self.segments]
            if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
                raise ValueError("segment breakpoints must be strictly increasing")
            if not np.isclose(breaks[-1], 1.0):
                raise ValueError("last segment breakpoint must be 1.0")
            object.__setattr__(self, "segments", tuple(self.segments))

    @classmethod
    def case1(cls, a: float = 1.1, b: float = 11.0) -> "VarianceProfile":
        return cls(kind="case1", a=a, b=b, c=0.0)

    @classmethod
    def case2(cls, a: float = 1.1, b: float = 11.0, c: float = 0.5) -> "VarianceProfile":
        return cls(kind="case2", a=a, b=b, c=c)

    @classmethod
    def custom(cls, segments: Sequence[Segment], d: int) -> "VarianceProfile":
        return cls(kind="custom", segments=tuple(segments), d=d)


def sigma_at(profile: VarianceProfile, r: float) -> np.ndarray:
    """Evaluate Sigma(r) for r in (0, 1]; always symmetric."""
    if not 0.0 < r <= 1.0:
        raise ValueError(f"r must lie in (0, 1], got {r}")
    if profile.kind in ("case1", "case2"):
        a, b, c = profile.a, profile.b, profile.c
        s12 = c * np.sin(2.0 * np.pi * r)
        return np.array([[a - np.cos(b * r), s12], [s12, a + np.sin(b * r)]])
    for breakpoint, segment in profile.segments:
        if r <= breakpoint or np.isclose(r, breakpoint):
            sig = segment(r) if callable(segment) else segment
            sig = np.asarray(sig, dtype=float)
            if sig.shape != (profile.d, profile.d):
                raise ValueError(
                    f"segment produced shape {sig.shape}, expected "
                    f"({profile.d}, {profile.d})"
                )
            return 0.5 * (sig + sig.T)
    raise ValueError(f"no segment covers r={r}")  # unreachable for valid profiles


def cholesky_lower(sigma: np.ndarray) -> np.ndarray:
    """Lower-triangular L with positive diagonal and L L' = sigma.

    Raises
    ------
    NumericalError
        If sigma is not symmetric positive definite.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {sigma.shape}")
    if not np.allclose(sigma, sigma.T, rtol=1e-10, atol=1e-12):
        raise NumericalError("covariance matrix is not symmetric")
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise NumericalError(
            "covariance matrix is not positive definite"
        ) from None


def _sigma_grid(profile: VarianceProfile, T: int) -> np.ndarray:
    """Stack Sigma(t/T) for t = 1..T into a (T, d, d) array."""
    if profile.kind in ("case1", "case2"):
        r = np.arange(1, T + 1) / T
        a, b, c = profile.a, profile.b, profile.c
        sig = np.empty((T, 2, 2))
        sig[:, 0, 0] = a - np.cos(b * r)
        sig[:, 1, 1] = a + np.sin(b * r)
        sig[:, 0, 1] = sig[:, 1, 0] = c * np.sin(2.0 * np.pi * r)
        return sig
    return np.stack([sigma_at(profile, t / T) for t in range(1, T + 1)])


def _cholesky_grid(profile: VarianceProfile, T: int) -> np.ndarray:
    """Factor Sigma(t/T) for every t, reporting the first failing date."""
    sigmas = _sigma_grid(profile, T)
    try:
        return np.linalg.cholesky(sigmas)
    except np.linalg.LinAlgError:
        for t in range(T):
            try:
                np.linalg.cholesky(sigmas[t])
            except np.linalg.LinAlgError:
                raise NumericalError(
                    f"Sigma(t/T) is not positive definite at t={t + 1} "
                    f"(r={(t + 1) / T:.6g})"
                ) from None
        raise


def simulate_var1(
    A: np.ndarray,
    profile: VarianceProfile,
    T: int,
    seed: int,
) -> Dataset:
    """Simulate X_t = A X_{t-1} + u_t for t = 1..T with X_0 = 0.

    ``u_t = L(t/T) eps_t`` where L is the lower Cholesky factor of the
    profile at rescaled time t/T and eps_t are iid standard normal drawn
    from the Philox stream keyed by ``seed``.  No burn-in is applied: a
    burn-in would shift the variance profile of the triangular array, at
    the cost of a small initialization bias near the left edge.

    Raises
    ------
    ValueError
        If the spectral radius of A is >= 1 or T < 1.
    NumericalError
        If the profile is not positive definite at some t/T.
    """
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    if A.shape != (d, d):
        raise ValueError(f"A must be square, got shape {A.shape}")
    rho = np.max(np.abs(np.linalg.eigvals(A)))
    if rho >= 1.0:
        raise ValueError(f"unstable AR matrix: spectral radius {rho:.6g} >= 1")
    if T < 1:
        raise ValueError(f"T must be positive, got {T}")

    lowers = _cholesky_grid(profile, T)
    if lowers.shape[1] != d:
        raise ValueError(
            f"profile dimension {lowers.shape[1]} does not match A dimension {d}"
        )
    eps = stream(seed).standard_normal((T, d))
    u = np.einsum("tij,tj->ti", lowers, eps)

    x = np.empty((T, d))
    prev = np.zeros(d)
    for t in range(T):
        prev = A @ prev + u[t]
        x[t] = prev
    return Dataset(values=x, series_names=tuple(f"x{j + 1}" for j in range(d)))
