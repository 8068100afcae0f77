"""OLS estimation of VAR(p) models without intercept, plus a residual diagnostic.

The model is X_t = A_1 X_{t-1} + ... + A_p X_{t-p} + u_t.  The first p rows
of the dataset serve as the presample, so a dataset with T_total rows yields
T_total - p residual rows.  There is no intercept; demean the data first if
needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .causality import chi_square_survival
from .dataio import Dataset
from .errors import DataError, NumericalError

__all__ = ["VarFit", "fit_ols", "coefficient_se_matrices", "box_pierce_diagnostic"]

# reciprocal condition number below this means the regressor Gram matrix is
# treated as singular
RCOND_MIN = 1e-12


@dataclass(frozen=True)
class VarFit:
    """A fitted VAR(p): coefficients, residuals and White-type standard errors.

    Attributes
    ----------
    coefficients : tuple of ndarray
        The p estimated d x d lag matrices A_1..A_p.
    theta_hat : ndarray, shape (p*d*d,)
        vec of the stacked coefficient matrix [A_1 ... A_p] (column-major).
    residuals : ndarray, shape (T_effective, d)
        One row per post-presample observation.
    robust_se : ndarray, shape (p*d*d,)
        Sandwich standard errors aligned with ``theta_hat``.
    """

    coefficients: tuple[np.ndarray, ...]
    theta_hat: np.ndarray
    residuals: np.ndarray
    robust_se: np.ndarray
    p: int
    d: int
    T_effective: int


def _lag_design(values: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Response rows X_t and regressor rows (X_{t-1}', ..., X_{t-p}')'."""
    T_total, d = values.shape
    Y = values[p:]
    Z = np.hstack([values[p - k : T_total - k] for k in range(1, p + 1)])
    return Y, Z


def fit_ols(ds: Dataset, p: int) -> VarFit:
    """Fit a VAR(p) to the dataset by multivariate least squares.

    Parameters
    ----------
    ds : Dataset
    p : int
        Lag order; assumed well adjusted by the caller (see
        :func:`box_pierce_diagnostic` for an advisory check).

    Raises
    ------
    DataError
        If the sample is too short (need T_total > p*d + p).
    NumericalError
        If the regressor Gram matrix is numerically singular.
    """
    if p < 1:
        raise ValueError(f"lag order p must be a positive integer, got {p}")
    values = ds.values
    T_total, d = values.shape
    if T_total <= p * d + p:
        raise DataError(
            f"insufficient sample: {T_total} rows for VAR({p}) in dimension {d}; "
            f"need more than {p * d + p}"
        )

    Y, Z = _lag_design(values, p)
    gram = Z.T @ Z
    rcond = 1.0 / np.linalg.cond(gram)
    if not np.isfinite(rcond) or rcond < RCOND_MIN:
        raise NumericalError(
            f"singular regressor Gram matrix (reciprocal condition number {rcond:.3g})"
        )
    B = np.linalg.solve(gram, Z.T @ Y)  # (p*d, d)
    residuals = Y - Z @ B
    A_full = B.T  # d x (p*d), columns grouped by lag
    coefficients = tuple(A_full[:, k * d : (k + 1) * d].copy() for k in range(p))
    theta_hat = A_full.flatten(order="F")

    # White sandwich: (Z'Z (x) I_d)^{-1} [sum_t Z_t Z_t' (x) u_t u_t'] (same)^{-1}
    meat = np.einsum("ta,ti,tb,tj->aibj", Z, residuals, Z, residuals)
    q = p * d * d
    meat = meat.reshape(q, q)
    bread = np.kron(np.linalg.inv(gram), np.eye(d))
    cov = bread @ meat @ bread
    robust_se = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    return VarFit(
        coefficients=coefficients,
        theta_hat=theta_hat,
        residuals=residuals,
        robust_se=robust_se,
        p=p,
        d=d,
        T_effective=Y.shape[0],
    )


def coefficient_se_matrices(fit: VarFit) -> tuple[np.ndarray, ...]:
    """Reshape ``robust_se`` into p matrices aligned with the coefficients."""
    d = fit.d
    se_full = fit.robust_se.reshape(fit.p * d, d).T  # inverse of column-major vec
    return tuple(se_full[:, k * d : (k + 1) * d].copy() for k in range(fit.p))


def box_pierce_diagnostic(fit: VarFit, h: int) -> dict:
    """Classical multivariate Box-Pierce test on residual autocorrelations.

    This is the heteroscedasticity-naive version: its chi-square reference
    on d^2 (h - p) degrees of freedom assumes a constant error variance, so
    treat it as advisory when the variance is suspected to drift.

    Parameters
    ----------
    fit : VarFit
    h : int
        Number of autocovariance lags; must satisfy p < h < T_effective.

    Returns
    -------
    dict with keys statistic, p_value, df and note.
    """
    if h <= fit.p:
        raise ValueError(
            f"h must exceed the lag order p={fit.p} for positive degrees of freedom"
        )
    if h >= fit.T_effective:
        raise ValueError(f"h={h} must be smaller than T_effective={fit.T_effective}")
    U = fit.residuals
    T, d = U.shape
    df = max(d * d * (h - fit.p), 1)

    if not np.any(U):
        # degenerate autocorrelation; no evidence against whiteness
        return {"statistic": 0.0, "p_value": 1.0, "df": df, "note": "heteroscedasticity-naive"}

    C0 = U.T @ U / T
    rcond = 1.0 / np.linalg.cond(C0)
    if not np.isfinite(rcond) or rcond < RCOND_MIN:
        raise NumericalError("singular lag-0 residual covariance in Box-Pierce")
    C0_inv = np.linalg.inv(C0)
    stat = 0.0
    for j in range(1, h + 1):
        Cj = U[j:].T @ U[:-j] / T
        stat += float(np.trace(Cj.T @ C0_inv @ Cj @ C0_inv))
    stat *= T
    return {
        "statistic": stat,
        "p_value": chi_square_survival(max(stat, 0.0), df),
        "df": df,
        "note": "heteroscedasticity-naive",
    }
