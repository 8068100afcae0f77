"""Instantaneous-causality tests for VAR processes with time-varying variance."""

__version__ = "0.1.0"

from .causality import (
    TestResult,
    chi_square_survival,
    sup_statistic,
    wald_test,
    wild_bootstrap_test,
)
from .dataio import (
    Dataset,
    Partition,
    demean,
    difference,
    load_csv,
    select_columns,
    select_partition,
    write_csv,
)
from .dgp import DEFAULT_AR, VarianceProfile, cholesky_lower, sigma_at, simulate_var1
from .errors import DataError, HetcauseError, NumericalError
from .kernelvar import CovarianceCurve, nw_covariance
from .montecarlo import (
    ExperimentConfig,
    RejectionTable,
    WaldSizeAnalysis,
    power_curve,
    run_experiment,
    wald_size_eigenvalues,
)
from .varfit import VarFit, box_pierce_diagnostic, fit_ols
from .weights import (
    CrossStatPath,
    cross_stat_path,
    omega_st,
    omega_varhac,
    omega_w,
)

__all__ = [
    "__version__",
    "TestResult",
    "chi_square_survival",
    "sup_statistic",
    "wald_test",
    "wild_bootstrap_test",
    "Dataset",
    "Partition",
    "demean",
    "difference",
    "load_csv",
    "select_columns",
    "select_partition",
    "write_csv",
    "DEFAULT_AR",
    "VarianceProfile",
    "cholesky_lower",
    "sigma_at",
    "simulate_var1",
    "DataError",
    "HetcauseError",
    "NumericalError",
    "CovarianceCurve",
    "nw_covariance",
    "ExperimentConfig",
    "RejectionTable",
    "WaldSizeAnalysis",
    "power_curve",
    "run_experiment",
    "wald_size_eigenvalues",
    "VarFit",
    "box_pierce_diagnostic",
    "fit_ols",
    "CrossStatPath",
    "cross_stat_path",
    "omega_st",
    "omega_varhac",
    "omega_w",
]
