"""Kurtosis test statistics and their null distributions.

Three test kinds share one statistic, the average squared Mahalanobis norm

    B_p = (1/N) sum_n (x(n)^T S^{-1} x(n))^2,

computed with the biased sample covariance of the centered data. They
differ in the null moments used to standardize it:

* ``MARDIA_IID``: closed form for i.i.d. samples, any dimension;
* ``COLORED_SCALAR``: closed form for stationary scalar processes, driven
  by the lagged autocovariances of the data;
* ``COLORED_BIVARIATE``: Monte Carlo calibration against a Gaussian
  process matched to the estimated covariance sequence (p = 2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .core import (
    CovarianceSequence,
    DegenerateSampleError,
    MomentSource,
    NullMoments,
    TestReport,
    TimeSeriesSample,
    center,
    sample_covariance,
    sample_cross_covariance,
)

__all__ = [
    "KurtosisValue",
    "TestKind",
    "colored_bivariate_null_moments",
    "colored_scalar_null_moments",
    "iid_null_moments",
    "mardia_kurtosis",
    "run_test",
    "two_sided_p_value",
]

_MAX_CONDITION = 1e12


class TestKind(enum.Enum):
    __test__ = False  # not a pytest class, despite the name

    MARDIA_IID = "iid"
    COLORED_SCALAR = "colored1"
    COLORED_BIVARIATE = "colored2"


@dataclass(frozen=True)
class KurtosisValue:
    value: float
    p: int
    n: int

    def __post_init__(self) -> None:
        # Cauchy-Schwarz: the average of q^2 is at least (avg q)^2 = p^2 >= p.
        if self.value < self.p * (1.0 - 1e-9):
            raise ValueError(f"kurtosis {self.value} below the lower bound p={self.p}")


def _degenerate(s: np.ndarray) -> bool:
    """True when a covariance matrix is unusable for the statistic.

    The condition number alone misses the scalar case (cond of a 1x1 matrix
    is 1 whatever its value), so the diagonal is checked as well.
    """
    cond = np.linalg.cond(s)
    return (not np.isfinite(cond)) or cond > _MAX_CONDITION or np.any(np.diag(s) <= 0)


def _mardia_values(batch: np.ndarray) -> np.ndarray:
    """Statistic for a batch of samples, shape (R, p, N) -> (R,).

    Centers each sample, inverts each 2x2/3x3 covariance, and averages the
    squared Mahalanobis norms. Raises on singular covariances.
    """
    x = batch - batch.mean(axis=2, keepdims=True)
    n = x.shape[2]
    s = np.einsum("rin,rjn->rij", x, x) / n
    cond = np.linalg.cond(s)
    diag = np.einsum("rii->ri", s)
    if np.any(~np.isfinite(cond)) or np.any(cond > _MAX_CONDITION) or np.any(diag <= 0):
        raise DegenerateSampleError(
            "sample covariance is numerically singular; check for collinear "
            "or constant channels"
        )
    q = np.einsum("rin,rin->rn", np.linalg.solve(s, x), x)
    values = np.mean(q * q, axis=1)
    if not np.all(np.isfinite(values)):
        raise DegenerateSampleError("kurtosis statistic overflowed")
    return values


def mardia_kurtosis(x: TimeSeriesSample) -> KurtosisValue:
    """Evaluate the kurtosis statistic on one sample (centering included)."""
    xc = center(x)
    s = sample_covariance(xc)
    if _degenerate(s):
        raise DegenerateSampleError(
            "sample covariance is numerically singular; check for collinear "
            "or constant channels"
        )
    q = np.sum(xc.data * np.linalg.solve(s, xc.data), axis=0)
    value = float(np.mean(q * q))
    if not np.isfinite(value):
        raise DegenerateSampleError("kurtosis statistic overflowed")
    return KurtosisValue(value, x.p, x.n)


def iid_null_moments(p: int, n: int) -> NullMoments:
    """Asymptotic null mean p(p+2)(N-1)/(N+1) and variance 8p(p+2)/N."""
    if p < 1 or n < 2:
        raise ValueError("need p >= 1 and N >= 2")
    return NullMoments(
        mean=p * (p + 2) * (n - 1) / (n + 1),
        variance=8.0 * p * (p + 2) / n,
        source=MomentSource.IID_CLOSED_FORM,
    )


def colored_scalar_null_moments(cov: CovarianceSequence, n: int) -> NullMoments:
    """Null moments of B_1 for a stationary scalar process.

    mean = 3 - 6/N - (12/N^2) sum_{tau=1}^{L} (N-tau) S(tau)^2 / S(0)^2
    var  = (24/N) [1 + (2/N) sum_{tau=1}^{L} (N-tau) S(tau)^4 / S(0)^4]

    Both are asymptotic (o(1/N) remainders dropped); with an all-zero tail
    they reduce to the i.i.d. case up to O(1/N^2) in the mean.
    """
    if cov.p != 1:
        raise ValueError(f"scalar moments need p=1, got p={cov.p}")
    s0 = cov.lags[0, 0, 0]
    if not s0 > 0:
        raise DegenerateSampleError(f"S(0) must be positive, got {s0}")
    L = min(cov.max_lag, n - 1)
    tau = np.arange(1, L + 1)
    r2 = (cov.lags[1 : L + 1, 0, 0] / s0) ** 2
    mean = 3.0 - 6.0 / n - (12.0 / n**2) * float(np.sum((n - tau) * r2))
    var = (24.0 / n) * (1.0 + (2.0 / n) * float(np.sum((n - tau) * r2**2)))
    return NullMoments(mean, var, MomentSource.COLORED_SCALAR_CLOSED_FORM, max_lag=L)


def colored_bivariate_null_moments(cov: CovarianceSequence, n: int, budget=None) -> NullMoments:
    """Null moments of B_2 for a stationary bivariate process, by parametric
    Monte Carlo against a Gaussian surrogate matching ``cov``.

    Closed forms exist only as leading terms (8 - 16/N and 64/N plus lag
    corrections); the calibration replaces them and reports its own
    uncertainty through the budget's replicate count.
    """
    from .calibrate import CalibrationBudget, GaussianSurrogate, calibrate_null

    if cov.p != 2:
        raise ValueError(f"bivariate moments need p=2, got p={cov.p}")
    if budget is None:
        budget = CalibrationBudget()
    max_lag = budget.resolve_max_lag(n)
    surrogate = GaussianSurrogate(cov.truncated(max_lag), n)
    result = calibrate_null(surrogate, budget=budget)
    return result.as_null_moments(max_lag=max_lag)


def two_sided_p_value(z: float) -> float:
    """2 (1 - Phi(|z|)), evaluated via erfc so small values keep precision."""
    return float(erfc(abs(z) / math.sqrt(2.0)))


def run_test(
    x: TimeSeriesSample,
    kind: TestKind,
    alpha: float,
    max_lag: int | None = None,
    budget=None,
) -> TestReport:
    """Run one normality test and report statistic, z-score, p-value and
    decision at level alpha.

    ``max_lag`` truncates the lag sums of the colored scalar test (default:
    the full range N-1). The calibration budget only matters for
    ``COLORED_BIVARIATE``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if kind == TestKind.COLORED_SCALAR and x.p != 1:
        raise ValueError(f"{kind.value} requires p=1, got p={x.p}")
    if kind == TestKind.COLORED_BIVARIATE and x.p != 2:
        raise ValueError(f"{kind.value} requires p=2, got p={x.p}")

    stat = mardia_kurtosis(x)
    if kind == TestKind.MARDIA_IID:
        moments = iid_null_moments(x.p, x.n)
    else:
        xc = center(x)
        if kind == TestKind.COLORED_SCALAR:
            lag = x.n - 1 if max_lag is None else min(max_lag, x.n - 1)
            cov = sample_cross_covariance(xc, lag)
            moments = colored_scalar_null_moments(cov, x.n)
        else:
            from .calibrate import CalibrationBudget

            if budget is None:
                budget = CalibrationBudget(max_lag=max_lag)
            lag = budget.resolve_max_lag(x.n)
            cov = sample_cross_covariance(xc, lag)
            moments = colored_bivariate_null_moments(cov, x.n, budget)

    z = (stat.value - moments.mean) / math.sqrt(moments.variance)
    p_value = two_sided_p_value(z)
    return TestReport(
        statistic=stat.value,
        z=z,
        p_value=p_value,
        alpha=alpha,
        reject=bool(p_value < alpha),
        null_moments=moments,
    )
