"""Point and interval estimation of correlations from the similarity scale.

Intervals are built on the Fisher scale, where the estimator's law is
pivotal, and then mapped to the correlation scale through the inverse
transform. For bivariate samples the exact finite-sample quantiles are
available for any T; for equicorrelated panels the bias-corrected
estimator is paired with either the asymptotic normal law or the exact
product law of the Logistic-Beta characteristic function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .distributions import (
    EquicorrelationMeanLaw,
    finite_sample_cdf,
    finite_sample_quantile,
    logistic_beta_variance,
)
from .errors import DataError, DomainError
from .similarity import (
    BivariateSample,
    MultivariateSample,
    as_sample,
    equicorr_phi_inverse,
    gamma_hat,
    inverse_fisher,
)
from .special import omega_n

__all__ = [
    "ConfidenceInterval",
    "ZeroCorrelationTest",
    "standardize",
    "correlation_ci",
    "zero_correlation_test",
    "EXACT_LAW_MAX_T",
]

# default law switches from exact to asymptotic above this sample size
EXACT_LAW_MAX_T = 100


@dataclass(frozen=True)
class ConfidenceInterval:
    """Correlation-scale interval with its Fisher-scale parent.

    ``law`` records which sampling law produced the quantile ("exact-T" or
    "asymptotic"); ``target`` is "rho" or "xi"; ``caveats`` carries
    qualifications such as conservativeness or standardization effects.
    """

    lower: float
    upper: float
    level: float
    law: str
    target: str
    fisher_lower: float
    fisher_upper: float
    gamma_hat: float
    T: int
    n: int
    caveats: tuple[str, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class ZeroCorrelationTest:
    """Two-sided test of zero correlation based on the exact law."""

    statistic: float
    p_value: float
    level: float
    reject: bool


def standardize(sample, method: str = "sample-stdev",
                scales=None):
    """Divide each column by a positive scale.

    ``method="sample-stdev"`` uses sqrt(mean(x^2)) per column, fitting the
    zero-mean convention; ``method="external-scales"`` divides by the given
    positive scales instead.
    """
    sample = as_sample(sample)
    values = sample.values
    n = values.shape[1]
    if method == "sample-stdev":
        scale_vec = np.sqrt(np.mean(values ** 2, axis=0))
    elif method == "external-scales":
        if scales is None:
            raise DomainError("external-scales needs a scales sequence")
        scale_vec = np.asarray(scales, dtype=float)
        if scale_vec.shape != (n,):
            raise DomainError(f"expected {n} scales, got shape {scale_vec.shape}")
    else:
        raise DomainError(f"unknown standardization method {method!r}")
    bad = ~(scale_vec > 0.0) | ~np.isfinite(scale_vec)
    if bad.any():
        col = int(np.argmax(bad))
        raise DataError(f"column {col} has no positive dispersion/scale")
    out = values / scale_vec
    return BivariateSample(out) if n == 2 else MultivariateSample(out)


def _resolve_law(law: str, T: int) -> str:
    if law == "auto":
        return "exact-T" if T <= EXACT_LAW_MAX_T else "asymptotic"
    if law in ("exact", "exact-T"):
        return "exact-T"
    if law == "asymptotic":
        return "asymptotic"
    raise DomainError(f"law must be 'exact', 'asymptotic' or 'auto', got {law!r}")


def correlation_ci(sample, level: float, law: str = "auto",
                   target: str = "rho",
                   standardization: str = "none") -> ConfidenceInterval:
    """Confidence interval for the correlation (or the resemblance
    coefficient xi) from the similarity estimator.

    Bivariate samples use the pivotal standardized law: the Fisher-scale
    half width is q_(1+level)/2 * (pi/2)/sqrt(T) with q exact or normal.
    Equicorrelated panels (n > 2) correct the estimator by omega_n first
    and use the Logistic-Beta asymptotic variance or the exact product
    law. ``standardization`` only annotates the result: intervals computed
    after sample-stdev standardization are approximately exact because the
    rescaled columns need not have exactly homogeneous variances.
    """
    if not (0.0 < level < 1.0):
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    if target not in ("rho", "xi"):
        raise DomainError(f"target must be 'rho' or 'xi', got {target!r}")
    sample = as_sample(sample)
    est = gamma_hat(sample)
    T, n = est.T, est.n
    law_used = _resolve_law(law, T)
    caveats = []
    if standardization == "sample":
        caveats.append("approximately-exact: sample-stdev standardization does "
                       "not guarantee homogeneous variances")

    p = (1.0 + level) / 2.0
    if n == 2:
        if target == "xi":
            caveats.append("conservative-for-rho: |xi| <= |rho| and the "
                           "similarity variance is bounded by the homogeneous case")
        if law_used == "exact-T":
            q = finite_sample_quantile(p, T)
        else:
            q = float(norm.ppf(p))
        half = q * (math.pi / 2.0) / math.sqrt(T)
        flo, fhi = est.gamma_hat - half, est.gamma_hat + half
        lo, hi = inverse_fisher(flo), inverse_fisher(fhi)
    else:
        if target == "xi":
            raise DomainError("target 'xi' is defined for bivariate samples only")
        g = est.gamma_hat + omega_n(n)
        if law_used == "exact-T":
            law_obj = EquicorrelationMeanLaw(n, T)
            q_lo = law_obj.quantile((1.0 - level) / 2.0)
            q_hi = law_obj.quantile(p)
            flo, fhi = g - q_hi, g - q_lo
        else:
            half = float(norm.ppf(p)) * math.sqrt(logistic_beta_variance(n) / T)
            flo, fhi = g - half, g + half
        lo = equicorr_phi_inverse(flo, n)
        hi = equicorr_phi_inverse(fhi, n)

    return ConfidenceInterval(
        lower=lo, upper=hi, level=level, law=law_used, target=target,
        fisher_lower=flo, fisher_upper=fhi, gamma_hat=est.gamma_hat,
        T=T, n=n, caveats=tuple(caveats))


def zero_correlation_test(sample, level: float = 0.05) -> ZeroCorrelationTest:
    """Two-sided exact test of zero correlation.

    Bivariate: p = 2*(1 - F_T(|z|)) with z the standardized estimator and
    F_T its exact CDF. Equicorrelated panels test the bias-corrected
    estimator against the exact mean law at rho = 0.
    """
    if not (0.0 < level < 1.0):
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    sample = as_sample(sample)
    est = gamma_hat(sample)
    T, n = est.T, est.n
    if n == 2:
        z = math.sqrt(T) * est.gamma_hat / (math.pi / 2.0)
        p_value = 2.0 * (1.0 - finite_sample_cdf(abs(z), T))
        stat = z
    else:
        d = est.gamma_hat + omega_n(n)
        law_obj = EquicorrelationMeanLaw(n, T)
        cdf = law_obj.cdf(d)
        p_value = 2.0 * min(cdf, 1.0 - cdf)
        stat = d
    p_value = min(1.0, max(0.0, p_value))
    return ZeroCorrelationTest(statistic=stat, p_value=p_value,
                               level=level, reject=p_value < level)
