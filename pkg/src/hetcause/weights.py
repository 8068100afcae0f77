"""Cross-covariance statistics of VAR residuals and their weight matrices.

Given residuals u_t = (u1_t', u2_t')' split after column d1, the scores are
theta_t = u2_t kron u1_t = vec(u1_t u2_t'), their scaled partial sums form
the path delta_s, and three competing estimators weight the endpoint:

* ``omega_st`` - product of the block second-moment matrices (valid for iid
  Gaussian errors with constant variance);
* ``omega_w``  - White-type average of score outer products;
* ``omega_varhac`` - VARHAC: prewhiten the scores with a vector
  autoregression of order m and correct by A(1)^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

__all__ = [
    "CrossStatPath",
    "cross_stat_path",
    "omega_st",
    "omega_w",
    "omega_varhac",
    "varhac_order_aic",
]


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def _split(residuals: np.ndarray, d1: int) -> tuple[np.ndarray, np.ndarray]:
    residuals = np.asarray(residuals, dtype=float)
    if residuals.ndim != 2:
        raise ValueError(f"residuals must be a T x d matrix, got {residuals.shape}")
    d = residuals.shape[1]
    if not 1 <= d1 < d:
        raise ValueError(f"d1 must satisfy 1 <= d1 < d; got d1={d1}, d={d}")
    return residuals[:, :d1], residuals[:, d1:]


def _scores(residuals: np.ndarray, d1: int) -> np.ndarray:
    """T x (d1 d2) matrix with rows u2_t kron u1_t."""
    u1, u2 = _split(residuals, d1)
    return (u2[:, :, None] * u1[:, None, :]).reshape(u1.shape[0], -1)


@dataclass(frozen=True)
class CrossStatPath:
    """The score series and its scaled partial-sum path.

    Attributes
    ----------
    vartheta : ndarray, shape (T, d1*d2)
        Rows are the scores u2_t kron u1_t.
    delta_path : ndarray, shape (T, d1*d2)
        Row t is T^{-1/2} * sum of the first t score rows.
    delta_T : ndarray, shape (d1*d2,)
        The final row of ``delta_path``.
    """

    vartheta: np.ndarray
    delta_path: np.ndarray
    delta_T: np.ndarray

    @property
    def T(self) -> int:
        return self.vartheta.shape[0]


def cross_stat_path(residuals: np.ndarray, d1: int) -> CrossStatPath:
    """Build the score series and partial-sum path from a residual matrix."""
    vartheta = _scores(residuals, d1)
    T = vartheta.shape[0]
    delta_path = np.cumsum(vartheta, axis=0) / np.sqrt(T)
    return CrossStatPath(
        vartheta=vartheta, delta_path=delta_path, delta_T=delta_path[-1].copy()
    )


def omega_st(residuals: np.ndarray, d1: int) -> np.ndarray:
    """Kronecker product of the block sample second-moment matrices."""
    u1, u2 = _split(residuals, d1)
    T = u1.shape[0]
    s11 = _symmetrize(u1.T @ u1 / T)
    s22 = _symmetrize(u2.T @ u2 / T)
    return np.kron(s22, s11)


def omega_w(residuals: np.ndarray, d1: int) -> np.ndarray:
    """White-type weight matrix: average outer product of the scores."""
    vartheta = _scores(residuals, d1)
    return _score_outer_mean(vartheta)


def _score_outer_mean(vartheta: np.ndarray) -> np.ndarray:
    T = vartheta.shape[0]
    return _symmetrize(vartheta.T @ vartheta / T)


def varhac_order_aic(vartheta: np.ndarray, m_max: int) -> int:
    """Pick the prewhitening order in {0..m_max} by Gaussian AIC."""
    T, q = vartheta.shape
    best_m, best_aic = 0, np.inf
    for m in range(m_max + 1):
        _, zhat = _prewhiten(vartheta, m)
        sigma_z = _score_outer_mean(zhat)
        sign, logdet = np.linalg.slogdet(sigma_z)
        if sign <= 0:
            continue
        aic = logdet + 2.0 * m * q * q / T
        if aic < best_aic:
            best_m, best_aic = m, aic
    return best_m


def _prewhiten(vartheta: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """LS regression of theta_t on theta_{t-1}..theta_{t-m}, theta_t = 0 for t <= 0.

    Returns the stacked coefficient matrix (q x m*q, empty for m = 0) and the
    T x q residual matrix of the regression.
    """
    T, q = vartheta.shape
    if m == 0:
        return np.empty((q, 0)), vartheta
    if T <= m * q:
        raise ValueError(f"need T > m*q for the VARHAC regression; T={T}, m={m}, q={q}")
    # lagged regressor matrix with zeros before the sample start
    lags = np.zeros((T, m * q))
    for k in range(1, m + 1):
        lags[k:, (k - 1) * q : k * q] = vartheta[:-k]
    gram = lags.T @ lags
    rcond = 1.0 / np.linalg.cond(gram)
    if not np.isfinite(rcond) or rcond < 1e-12:
        raise NumericalError(
            f"singular Gram matrix in the VARHAC regression (order m={m})"
        )
    coef = np.linalg.solve(gram, lags.T @ vartheta)  # (m*q, q)
    zhat = vartheta - lags @ coef
    return coef.T, zhat


def omega_varhac(
    residuals: np.ndarray,
    d1: int,
    m: int | None = None,
    m_max: int | None = None,
) -> tuple[np.ndarray, int]:
    """VARHAC weight matrix A(1)^{-1} Sigma_z A(1)^{-1}' and the order used.

    Parameters
    ----------
    residuals : ndarray, shape (T, d)
    d1 : int
        Split point of the residual vector.
    m : int, optional
        Fixed prewhitening order.  If None, the order is chosen by AIC over
        {0..m_max}.
    m_max : int, optional
        Upper bound for the AIC search; defaults to floor(T^(1/3)).

    Returns
    -------
    (omega, m) : (ndarray, int)
        The symmetrized weight matrix and the order actually used.  For
        m = 0 the result equals :func:`omega_w` exactly.
    """
    vartheta = _scores(residuals, d1)
    T, q = vartheta.shape
    if m is None:
        if m_max is None:
            m_max = int(np.floor(T ** (1.0 / 3.0)))
        m_max = min(m_max, max(0, (T - 1) // q))
        m = varhac_order_aic(vartheta, m_max)
    elif m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")

    coef, zhat = _prewhiten(vartheta, m)
    sigma_z = _score_outer_mean(zhat)
    if m == 0:
        return sigma_z, 0
    a_one = np.eye(q)
    for k in range(m):
        a_one -= coef[:, k * q : (k + 1) * q]
    rcond = 1.0 / np.linalg.cond(a_one)
    if not np.isfinite(rcond) or rcond < 1e-12:
        raise NumericalError("singular A(1) in the VARHAC correction")
    a_inv = np.linalg.solve(a_one, np.eye(q))
    return _symmetrize(a_inv @ sigma_z @ a_inv.T), m
