"""Fisher-scale similarity measures and covariance parameter maps.

The per-observation similarity of a pair (x1, x2) is the Fisher transform
of the resemblance ratio 2*x1*x2 / (x1^2 + x2^2), which reduces to the
half-log ratio of the squared sum to the squared difference. Its n-variate
generalization is the (1/n)-log ratio of the variation of the observation
along the vector of ones to the variation along the orthogonal complement.
Averaging the per-observation values over a sample gives the similarity
estimator on the Fisher scale.

Numerical conventions used throughout:

* the bivariate value is computed as ``log(|x1+x2| / |x1-x2|)``; taking the
  log of the quotient (rather than the difference of two logs) makes the
  result bit-identical under exact power-of-two rescaling of the data, and
  the float quotient of a sum and difference of finite doubles cannot
  overflow or underflow once inputs are brought into a safe exponent range;
* the multivariate quadratic forms use x'Px = S^2/n and x'P_perp x =
  sum((x_i - S/n)^2) - (sum(x_i - S/n))^2 / n with exact compensated
  summation; the correction term removes the cancellation error of the
  computed mean, so nearly-aligned observations are handled accurately;
* degeneracy is decided on exact arithmetic zeros only; no closeness
  tolerance is applied, so rescaling a sample can never change which rows
  are degenerate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import fsum
from typing import Union

import numpy as np

from .errors import DataError, DegenerateObservationError, DomainError
from .special import omega_n

__all__ = [
    "BivariateSample",
    "MultivariateSample",
    "SimilarityEstimate",
    "BivariateCovariance",
    "Equicorrelation",
    "CovarianceSpec",
    "fisher",
    "inverse_fisher",
    "phi_r_bivariate",
    "phi_r_multivariate",
    "gamma_hat",
    "gamma_hat_bias_corrected",
    "resemblance_coefficient",
    "equicorr_phi",
    "equicorr_phi_inverse",
    "as_sample",
]

# exponent window within which sums/squares of doubles are overflow-safe
_SAFE_EXPONENT = 400


# ---------------------------------------------------------------------------
# samples


def _validated_values(data, min_cols: int) -> np.ndarray:
    values = np.asarray(data, dtype=float)
    if values.ndim != 2:
        raise DataError(f"sample must be two-dimensional, got shape {values.shape}")
    T, n = values.shape
    if T < 1:
        raise DataError("sample must contain at least one observation")
    if n < min_cols:
        raise DataError(f"sample must have at least {min_cols} columns, got {n}")
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise DataError(f"non-finite entry at row {bad[0]}, column {bad[1]}")
    return values


@dataclass(frozen=True, eq=False)
class BivariateSample:
    """T x 2 panel of zero-mean observations."""

    values: np.ndarray

    def __post_init__(self):
        values = _validated_values(self.values, 2)
        if values.shape[1] != 2:
            raise DataError(f"bivariate sample needs exactly 2 columns, got {values.shape[1]}")
        object.__setattr__(self, "values", values)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return 2


@dataclass(frozen=True, eq=False)
class MultivariateSample:
    """T x n panel of zero-mean observations, n >= 2."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _validated_values(self.values, 2))

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


Sample = Union[BivariateSample, MultivariateSample]


def as_sample(data) -> Sample:
    """Coerce array-like data into the sample type matching its width."""
    if isinstance(data, (BivariateSample, MultivariateSample)):
        return data
    values = _validated_values(data, 2)
    if values.shape[1] == 2:
        return BivariateSample(values)
    return MultivariateSample(values)


@dataclass(frozen=True)
class SimilarityEstimate:
    """Fisher-scale similarity estimate with its sample metadata."""

    gamma_hat: float
    T: int
    n: int
    bias_corrected: bool = False


# ---------------------------------------------------------------------------
# covariance parameter bundles


@dataclass(frozen=True)
class BivariateCovariance:
    """Positive definite 2x2 covariance: variances and one covariance."""

    sigma1_sq: float
    sigma2_sq: float
    sigma12: float

    def __post_init__(self):
        s1, s2, s12 = self.sigma1_sq, self.sigma2_sq, self.sigma12
        if not (s1 > 0.0 and s2 > 0.0 and math.isfinite(s1) and math.isfinite(s2)
                and math.isfinite(s12)):
            raise DomainError("variances must be finite and positive")
        if not s12 * s12 < s1 * s2:
            raise DomainError("covariance matrix is not positive definite")

    @property
    def correlation(self) -> float:
        return self.sigma12 / math.sqrt(self.sigma1_sq * self.sigma2_sq)

    @property
    def resemblance(self) -> float:
        """xi = 2*sigma12 / (sigma1^2 + sigma2^2)."""
        return 2.0 * self.sigma12 / (self.sigma1_sq + self.sigma2_sq)

    @property
    def phase_gap(self) -> float:
        """Angle separating the sum and difference projections of the
        lower-triangular factor, driving the similarity variance."""
        s1 = math.sqrt(self.sigma1_sq)
        # second column height of the Cholesky factor: sigma2*sqrt(1-rho^2)
        c = math.sqrt(self.sigma2_sq - self.sigma12 * self.sigma12 / self.sigma1_sq)
        phi1 = math.atan2(c, s1 + self.sigma12 / s1)
        phi2 = math.atan2(-c, s1 - self.sigma12 / s1)
        return phi2 - phi1

    def matrix(self) -> np.ndarray:
        return np.array([[self.sigma1_sq, self.sigma12],
                         [self.sigma12, self.sigma2_sq]])


@dataclass(frozen=True)
class Equicorrelation:
    """Common-variance, common-correlation covariance in dimension n."""

    sigma_sq: float
    rho: float
    n: int

    def __post_init__(self):
        if self.n < 2 or int(self.n) != self.n:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n!r}")
        if not (self.sigma_sq > 0.0 and math.isfinite(self.sigma_sq)):
            raise DomainError("sigma_sq must be finite and positive")
        lo = -1.0 / (self.n - 1)
        if not (lo < self.rho < 1.0):
            raise DomainError(
                f"rho must lie in ({lo:.6g}, 1) for n={self.n}, got {self.rho!r}")

    @property
    def lambda_plus(self) -> float:
        return self.sigma_sq * (1.0 + (self.n - 1) * self.rho)

    @property
    def lambda_minus(self) -> float:
        return self.sigma_sq * (1.0 - self.rho)

    @property
    def phi(self) -> float:
        return equicorr_phi(self.rho, self.n)

    def matrix(self) -> np.ndarray:
        n = self.n
        return self.sigma_sq * ((1.0 - self.rho) * np.eye(n)
                                + self.rho * np.ones((n, n)))


CovarianceSpec = Union[BivariateCovariance, Equicorrelation]


# ---------------------------------------------------------------------------
# scalar transforms


def fisher(rho: float) -> float:
    """Fisher transform 0.5*log((1+rho)/(1-rho)) for |rho| < 1."""
    if not (-1.0 < rho < 1.0):
        raise DomainError(f"fisher requires |rho| < 1, got {rho!r}")
    return math.atanh(rho)


def inverse_fisher(g: float) -> float:
    """Inverse Fisher transform tanh(g); maps the real line into (-1, 1)."""
    if not math.isfinite(g):
        raise DomainError(f"inverse_fisher requires a finite argument, got {g!r}")
    return math.tanh(g)


def equicorr_phi(rho: float, n: int) -> float:
    """Off-diagonal element of the log of an equicorrelation matrix.

    (1/n) * log((1 + (n-1)rho) / (1 - rho)); the n = 2 case coincides with
    the Fisher transform.
    """
    if n < 2 or int(n) != n:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    if not (-1.0 / (n - 1) < rho < 1.0):
        raise DomainError(
            f"rho must lie in ({-1.0 / (n - 1):.6g}, 1) for n={n}, got {rho!r}")
    return math.log((1.0 + (n - 1) * rho) / (1.0 - rho)) / n


def equicorr_phi_inverse(phi: float, n: int) -> float:
    """Inverse of :func:`equicorr_phi`; range is (-1/(n-1), 1)."""
    if n < 2 or int(n) != n:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    if not math.isfinite(phi):
        raise DomainError(f"phi must be finite, got {phi!r}")
    # evaluate with the decaying exponential to stay overflow-free
    if phi >= 0.0:
        e = math.exp(-n * phi)
        return (1.0 - e) / (1.0 + (n - 1) * e)
    e = math.exp(n * phi)
    return (e - 1.0) / (e + n - 1.0)


def resemblance_coefficient(spec: BivariateCovariance) -> float:
    """xi = 2*sigma12/(sigma1^2+sigma2^2); |xi| <= |rho| with equality
    only under homogeneous variances."""
    if not isinstance(spec, BivariateCovariance):
        raise DomainError("resemblance_coefficient takes a bivariate covariance")
    return spec.resemblance


# ---------------------------------------------------------------------------
# per-observation similarity


def _prescale(values: np.ndarray) -> np.ndarray:
    """Exact power-of-two rescale into a safe exponent window."""
    m = float(np.max(np.abs(values)))
    if m == 0.0:
        return values
    e = math.frexp(m)[1]
    if abs(e) <= _SAFE_EXPONENT:
        return values
    return np.ldexp(values, -e)


def phi_r_bivariate(x1: float, x2: float) -> float:
    """Fisher-scale similarity of a single pair: 0.5*log((x1+x2)^2/(x1-x2)^2).

    Scale-free: multiplying both coordinates by any nonzero constant leaves
    the value unchanged (bit-exactly so for power-of-two factors).
    """
    x1 = float(x1)
    x2 = float(x2)
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise DomainError(f"coordinates must be finite, got ({x1!r}, {x2!r})")
    m = max(abs(x1), abs(x2))
    if m == 0.0:
        raise DegenerateObservationError(
            "observation is the zero vector", locus="zero")
    e = math.frexp(m)[1]
    if abs(e) > _SAFE_EXPONENT:
        x1 = math.ldexp(x1, -e)
        x2 = math.ldexp(x2, -e)
    s = x1 + x2
    d = x1 - x2
    if d == 0.0:
        raise DegenerateObservationError(
            "observation lies on the x1 = x2 locus (r = 1)", locus="sum")
    if s == 0.0:
        raise DegenerateObservationError(
            "observation lies on the x1 = -x2 locus (r = -1)", locus="difference")
    return math.log(abs(s) / abs(d))


def phi_r_multivariate(x) -> float:
    """Joint similarity of one n-vector: (1/n)*log(x'P x / x'P_perp x)
    with P the projector onto the vector of ones."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise DomainError(f"expected a vector of dimension >= 2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("coordinates must be finite")
    n = x.shape[0]
    if not np.any(x != 0.0):
        raise DegenerateObservationError(
            "observation is the zero vector", locus="zero")
    x = _prescale(x)
    s = fsum(x)
    xbar = s / n
    d = x - xbar
    # corrected two-pass sum of squared deviations
    q2 = fsum(d * d) - fsum(d) ** 2 / n
    if q2 <= 0.0:
        if np.all(d == 0.0):
            raise DegenerateObservationError(
                "observation is proportional to the vector of ones", locus="sum")
        q2 = fsum(d * d)  # correction overshot in the last ulp; fall back
    if s == 0.0:
        raise DegenerateObservationError(
            "observation is orthogonal to the vector of ones", locus="difference")
    q1 = s * s / n
    ratio = q1 / q2
    if ratio == 0.0 or math.isinf(ratio):
        # quotient left the double range; evaluate through logs instead
        return (2.0 * math.log(abs(s)) - math.log(n) - math.log(q2)) / n
    return math.log(ratio) / n


# ---------------------------------------------------------------------------
# the similarity estimator


def _phi_rows_bivariate(values: np.ndarray) -> np.ndarray:
    """Per-row bivariate similarity with degeneracy detection."""
    s = values[:, 0] + values[:, 1]
    d = values[:, 0] - values[:, 1]
    zero_d = d == 0.0
    zero_s = s == 0.0
    if zero_d.any() or zero_s.any():
        row = int(np.argmax(zero_d | zero_s))
        if zero_d[row] and zero_s[row]:
            locus = "zero"
        elif zero_d[row]:
            locus = "sum"
        else:
            locus = "difference"
        raise DegenerateObservationError(
            f"degenerate observation at row {row} ({locus} locus)",
            locus=locus, row=row)
    with np.errstate(over="ignore", divide="ignore"):
        phi = np.log(np.abs(s) / np.abs(d))
    bad = ~np.isfinite(phi)
    if bad.any():
        # rows whose sums leave the double range; redo them with rescaling
        for row in np.nonzero(bad)[0]:
            phi[row] = phi_r_bivariate(values[row, 0], values[row, 1])
    return phi


def gamma_hat(sample) -> SimilarityEstimate:
    """Similarity estimator: sample mean of the per-observation similarity."""
    sample = as_sample(sample)
    values = sample.values
    T, n = values.shape
    if n == 2:
        phi = _phi_rows_bivariate(values)
        g = fsum(phi) / T
    else:
        acc = []
        for t in range(T):
            try:
                acc.append(phi_r_multivariate(values[t]))
            except DegenerateObservationError as err:
                raise DegenerateObservationError(
                    f"degenerate observation at row {t} ({err.locus} locus)",
                    locus=err.locus, row=t) from None
        g = fsum(acc) / T
    return SimilarityEstimate(gamma_hat=g, T=T, n=n, bias_corrected=False)


def gamma_hat_bias_corrected(sample) -> SimilarityEstimate:
    """Bias-corrected similarity estimator gamma_hat + omega_n.

    The correction removes the dimension bias of the joint similarity
    measure; it vanishes for n = 2.
    """
    est = gamma_hat(sample)
    return SimilarityEstimate(
        gamma_hat=est.gamma_hat + omega_n(est.n),
        T=est.T, n=est.n, bias_corrected=True)
