"""Exact sampling laws of the similarity measures.

Four laws live here:

* the hyperbolic-secant law of the bivariate similarity under homogeneous
  variances (density sech(x - center)/pi, variance pi^2/4);
* the closed-form variance of the bivariate similarity under heterogeneous
  variances, pi^2/6 - sum_k cos(2 k theta)/k^2 with theta the phase gap of
  the covariance;
* the Logistic-Beta law of the n-variate joint similarity under
  equicorrelation, with digamma bias omega_n and trigamma variance;
* the finite-sample law of the standardized similarity estimator,
  z = sqrt(T) * (gamma_hat - center) / (pi/2), recovered from its
  characteristic function sech(u/sqrt(T))^T by Gil-Pelaez inversion.

The estimator CF is integrated over the whole real line. The sech kernel
is a valid characteristic function everywhere, and inversion restricted to
a bounded frequency window would not reproduce the tabulated quantiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import loggamma

from .errors import DomainError, NumericalError
from .similarity import BivariateCovariance
from .special import digamma, omega_n, trigamma

__all__ = [
    "SechLaw",
    "LogisticBetaLaw",
    "FiniteSampleLaw",
    "EquicorrelationMeanLaw",
    "sech_pdf",
    "sech_cdf",
    "hetero_variance",
    "omega_n",
    "logistic_beta_pdf",
    "logistic_beta_variance",
    "finite_sample_cf",
    "finite_sample_cdf",
    "finite_sample_quantile",
]

# CF magnitudes below this are numerically invisible to the inversion
_CF_FLOOR = 1e-16
_LOG_CF_FLOOR = math.log(_CF_FLOOR)
_QUAD_TOL = 1e-13


def _log_sech(x: float) -> float:
    ax = abs(x)
    return math.log(2.0) - ax - math.log1p(math.exp(-2.0 * ax))


def sech_pdf(x: float, center: float = 0.0) -> float:
    """Hyperbolic-secant density sech(x - center) / pi."""
    t = x - center
    if not math.isfinite(t):
        raise DomainError("sech_pdf requires finite arguments")
    # sech through the decaying exponential; underflows cleanly to 0
    at = abs(t)
    return (2.0 / math.pi) * math.exp(-at) / (1.0 + math.exp(-2.0 * at))


def sech_cdf(x: float, center: float = 0.0) -> float:
    """Distribution function of the hyperbolic-secant law,
    (2/pi) * arctan(exp(x - center))."""
    t = x - center
    if not math.isfinite(t):
        raise DomainError("sech_cdf requires finite arguments")
    if t > 709.0:  # exp would overflow; the value is 1 to all bits
        return 1.0
    return (2.0 / math.pi) * math.atan(math.exp(t))


@dataclass(frozen=True)
class SechLaw:
    """Law of the bivariate similarity around its Fisher-scale center."""

    center: float = 0.0

    def pdf(self, x: float) -> float:
        return sech_pdf(x, self.center)

    def cdf(self, x: float) -> float:
        return sech_cdf(x, self.center)

    def variance(self) -> float:
        return math.pi ** 2 / 4.0


# ---------------------------------------------------------------------------
# heterogeneous-variance similarity variance


def _cos_series(theta: float) -> float:
    """sum_{k>=1} cos(k*theta)/k^2 = pi^2/6 - pi*theta/2 + theta^2/4
    for theta in [0, 2*pi]."""
    return math.pi ** 2 / 6.0 - math.pi * theta / 2.0 + theta * theta / 4.0


def hetero_variance(spec: BivariateCovariance) -> float:
    """Variance of the bivariate similarity for a positive definite
    covariance; equals pi^2/4 exactly under homogeneous variances and is
    strictly smaller otherwise."""
    if not isinstance(spec, BivariateCovariance):
        raise DomainError("hetero_variance takes a bivariate covariance")
    theta = 2.0 * spec.phase_gap
    theta = math.fmod(theta, 2.0 * math.pi)
    if theta < 0.0:
        theta += 2.0 * math.pi
    return math.pi ** 2 / 6.0 - _cos_series(theta)


# ---------------------------------------------------------------------------
# Logistic-Beta law of the joint similarity


def _log_beta_half(n: int) -> float:
    """log B(1/2, (n-1)/2)."""
    return float(loggamma(0.5) + loggamma((n - 1) / 2.0) - loggamma(n / 2.0))


def logistic_beta_pdf(x: float, n: int, center: float = 0.0) -> float:
    """Density of the joint similarity in dimension n around its center:
    n * exp(n*t/2) / (B(1/2,(n-1)/2) * (1 + exp(n*t))^{n/2}), t = x - center."""
    if n < 2 or int(n) != n:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    t = n * (x - center)
    if not math.isfinite(t):
        raise DomainError("logistic_beta_pdf requires finite arguments")
    # log1p(exp(t)) evaluated without overflow on either tail
    softplus = max(t, 0.0) + math.log1p(math.exp(-abs(t)))
    logpdf = math.log(n) - _log_beta_half(int(n)) + 0.5 * t - 0.5 * n * softplus
    return math.exp(logpdf)


def logistic_beta_variance(n: int) -> float:
    """Variance of the joint similarity: (trigamma((n-1)/2) + pi^2/2)/n^2."""
    if n < 2 or int(n) != n:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    n = int(n)
    return (trigamma((n - 1) / 2.0) + math.pi ** 2 / 2.0) / (n * n)


@dataclass(frozen=True)
class LogisticBetaLaw:
    """Law of the n-variate joint similarity around the log-matrix center.

    The mean sits omega_n below the center; the n = 2 case coincides with
    :class:`SechLaw`.
    """

    n: int
    center: float = 0.0

    def __post_init__(self):
        if self.n < 2 or int(self.n) != self.n:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n!r}")

    def pdf(self, x: float) -> float:
        return logistic_beta_pdf(x, self.n, self.center)

    def mean(self) -> float:
        return self.center - omega_n(self.n)

    def variance(self) -> float:
        return logistic_beta_variance(self.n)


# ---------------------------------------------------------------------------
# finite-sample law of the standardized estimator


def finite_sample_cf(u: float, T: int) -> float:
    """Characteristic function sech(u/sqrt(T))^T of the standardized
    estimator; even, equals 1 at the origin, underflows cleanly to 0."""
    if T < 1 or int(T) != T:
        raise DomainError(f"T must be an integer >= 1, got {T!r}")
    if not math.isfinite(u):
        raise DomainError("u must be finite")
    return math.exp(T * _log_sech(u / math.sqrt(T)))


@dataclass(frozen=True)
class FiniteSampleLaw:
    """Exact law of z = sqrt(T)*(gamma_hat - center)/(pi/2) for T
    homogeneous bivariate observations.

    The distribution is symmetric with unit variance and positive excess
    kurtosis 2/T; it approaches the standard normal as T grows. The
    quadrature cutoff (frequency beyond which the CF is below 1e-16) is
    cached at construction.
    """

    T: int
    u_star: float = field(init=False)

    def __post_init__(self):
        if self.T < 1 or int(self.T) != self.T:
            raise DomainError(f"T must be an integer >= 1, got {self.T!r}")
        object.__setattr__(self, "T", int(self.T))
        v = math.acosh(math.exp(-_LOG_CF_FLOOR / self.T))
        object.__setattr__(self, "u_star", math.sqrt(self.T) * v)

    def cf(self, u: float) -> float:
        return finite_sample_cf(u, self.T)

    def cdf(self, z: float) -> float:
        """Gil-Pelaez inversion 1/2 + (1/pi) * int_0^inf sin(u z) cf(u)/u du."""
        if not math.isfinite(z):
            raise DomainError("z must be finite")
        T = self.T
        sqrtT = math.sqrt(T)

        def integrand(u: float) -> float:
            if u == 0.0:
                return z
            return math.sin(u * z) * math.exp(T * _log_sech(u / sqrtT)) / u

        value, err = quad(integrand, 0.0, self.u_star,
                          epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=500)
        if err > 1e-8:
            raise NumericalError(
                "characteristic-function inversion did not converge",
                diagnostics={"z": z, "T": T, "estimate": value, "error": err})
        return min(1.0, max(0.0, 0.5 + value / math.pi))

    def pdf(self, z: float) -> float:
        """Density by cosine inversion (1/pi) * int_0^inf cos(u z) cf(u) du."""
        T = self.T
        sqrtT = math.sqrt(T)

        def integrand(u: float) -> float:
            return math.cos(u * z) * math.exp(T * _log_sech(u / sqrtT))

        value, _ = quad(integrand, 0.0, self.u_star,
                        epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=500)
        return max(0.0, value / math.pi)

    def quantile(self, p: float) -> float:
        """Inverse CDF by bracketing root search; symmetric in p <-> 1-p."""
        if not (0.0 < p < 1.0):
            raise DomainError(f"p must lie in (0, 1), got {p!r}")
        if p == 0.5:
            return 0.0
        lo, hi = -15.0, 15.0
        while self.cdf(lo) > p:
            lo *= 2.0
        while self.cdf(hi) < p:
            hi *= 2.0
        return brentq(lambda z: self.cdf(z) - p, lo, hi, xtol=1e-10)

    def standardized_moment(self, k: int, half_width: float = 60.0) -> float:
        """k-th moment by quadrature against the inverted density."""
        value, _ = quad(lambda z: z ** k * self.pdf(z),
                        -half_width, half_width, limit=400)
        return value


@lru_cache(maxsize=256)
def _law(T: int) -> FiniteSampleLaw:
    return FiniteSampleLaw(T)


def finite_sample_cdf(z: float, T: int) -> float:
    """CDF of the standardized estimator for sample size T."""
    return _law(int(T)).cdf(z)


@lru_cache(maxsize=4096)
def finite_sample_quantile(p: float, T: int) -> float:
    """Quantile of the standardized estimator for sample size T."""
    return _law(int(T)).quantile(p)


# ---------------------------------------------------------------------------
# exact finite-sample law of the equicorrelation estimator


@dataclass(frozen=True)
class EquicorrelationMeanLaw:
    """Exact law of the centered bias-corrected estimator
    gamma_hat + omega_n - center for T equicorrelated n-variate draws.

    The single-draw CF comes from the Logistic-Beta moment generating
    function continued to the imaginary axis; the T-sample CF is its
    product. The law is asymmetric for n > 2, so lower and upper tails
    must be handled separately.
    """

    n: int
    T: int
    u_star: float = field(init=False)

    def __post_init__(self):
        if self.n < 2 or int(self.n) != self.n:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n!r}")
        if self.T < 1 or int(self.T) != self.T:
            raise DomainError(f"T must be an integer >= 1, got {self.T!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "T", int(self.T))
        u = 8.0
        while abs(self.cf(u)) > _CF_FLOOR and u < 2 ** 40:
            u *= 2.0
        object.__setattr__(self, "u_star", u)

    def _cf_single(self, v: float) -> complex:
        n = self.n
        lg = (loggamma((n - 1) / 2.0 - 1j * v / n) + loggamma(0.5 + 1j * v / n)
              - loggamma((n - 1) / 2.0) - loggamma(0.5))
        return complex(np.exp(1j * v * omega_n(n) + lg))

    def cf(self, u: float) -> complex:
        """CF of the mean of T centered draws."""
        return self._cf_single(u / self.T) ** self.T

    def cdf(self, x: float) -> float:
        """Gil-Pelaez for a complex CF:
        1/2 - (1/pi) * int_0^inf Im(exp(-iux) cf(u))/u du."""
        if not math.isfinite(x):
            raise DomainError("x must be finite")

        def integrand(u: float) -> float:
            if u == 0.0:
                return -x  # limit of Im(e^{-iux} cf(u))/u for a mean-zero law
            c = self.cf(u)
            return (math.cos(u * x) * c.imag - math.sin(u * x) * c.real) / u

        value, err = quad(integrand, 0.0, self.u_star,
                          epsabs=1e-12, epsrel=1e-12, limit=800)
        if err > 1e-7:
            raise NumericalError(
                "characteristic-function inversion did not converge",
                diagnostics={"x": x, "n": self.n, "T": self.T,
                             "estimate": value, "error": err})
        return min(1.0, max(0.0, 0.5 - value / math.pi))

    def quantile(self, p: float) -> float:
        if not (0.0 < p < 1.0):
            raise DomainError(f"p must lie in (0, 1), got {p!r}")
        scale = math.sqrt(logistic_beta_variance(self.n) / self.T)
        lo, hi = -10.0 * scale, 10.0 * scale
        while self.cdf(lo) > p:
            lo *= 2.0
        while self.cdf(hi) < p:
            hi *= 2.0
        return brentq(lambda x: self.cdf(x) - p, lo, hi, xtol=1e-12)
