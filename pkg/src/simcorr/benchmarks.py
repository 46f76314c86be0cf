"""Reference correlation estimators used for comparison.

All estimators follow the zero-mean convention of the rest of the package:
no demeaning happens here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError
from .similarity import as_sample

__all__ = [
    "BenchmarkEstimate",
    "sample_correlation",
    "kendall_tau",
    "greiner_map",
    "quadrant_correlation",
]


@dataclass(frozen=True)
class BenchmarkEstimate:
    """Value of one benchmark estimator, tagged by its name."""

    value: float
    estimator: str


def _bivariate_values(sample) -> np.ndarray:
    sample = as_sample(sample)
    if sample.n != 2:
        raise DataError(f"benchmark estimators need a 2-column sample, got n={sample.n}")
    return sample.values


def sample_correlation(sample) -> float:
    """Zero-mean sample correlation sum(x1*x2)/sqrt(sum(x1^2)*sum(x2^2))."""
    x = _bivariate_values(sample)
    ss1 = float(np.sum(x[:, 0] ** 2))
    ss2 = float(np.sum(x[:, 1] ** 2))
    if ss1 == 0.0 or ss2 == 0.0:
        col = 1 if ss1 == 0.0 else 2
        raise DataError(f"column {col} is identically zero")
    r = float(np.sum(x[:, 0] * x[:, 1])) / math.sqrt(ss1 * ss2)
    return min(1.0, max(-1.0, r))


def kendall_tau(sample) -> float:
    """Kendall rank correlation, tau-a normalization.

    (2/(T(T-1))) * sum_{i<j} sign(x1_i - x1_j) * sign(x2_i - x2_j);
    tied pairs contribute zero.
    """
    x = _bivariate_values(sample)
    T = x.shape[0]
    if T < 2:
        raise DataError("kendall_tau needs at least two observations")
    s1 = np.sign(x[:, 0][:, None] - x[:, 0][None, :])
    s2 = np.sign(x[:, 1][:, None] - x[:, 1][None, :])
    total = float(np.sum(np.triu(s1 * s2, k=1)))
    return 2.0 * total / (T * (T - 1))


def greiner_map(tau: float) -> float:
    """Map a rank correlation to the linear correlation: sin(pi*tau/2)."""
    if not (-1.0 <= tau <= 1.0) or not math.isfinite(tau):
        raise DomainError(f"tau must lie in [-1, 1], got {tau!r}")
    return math.sin(math.pi * tau / 2.0)


def quadrant_correlation(sample) -> float:
    """Quadrant estimator -cos(pi * P_hat) with P_hat the fraction of
    sign-concordant rows; rows with an exact zero coordinate count 1/2."""
    x = _bivariate_values(sample)
    prod = x[:, 0] * x[:, 1]
    weights = np.where(prod > 0.0, 1.0, np.where(prod < 0.0, 0.0, 0.5))
    p_hat = float(np.mean(weights))
    return -math.cos(math.pi * p_hat)
