import math

import numpy as np
import pytest
from scipy import stats

from simcorr.errors import DataError, DomainError
from simcorr.similarity import equicorr_phi, fisher
from simcorr.simulation import (
    EllipticalFamily,
    SeededRng,
    build_equicorrelation,
    mc_sampling_study,
    sample_elliptical,
)
from simcorr.special import omega_n
from simcorr.distributions import logistic_beta_variance


def test_family_validation():
    eye = np.eye(2)
    with pytest.raises(DomainError):
        EllipticalFamily(kind="uniform", scatter=eye)
    with pytest.raises(DomainError):
        EllipticalFamily(kind="student-t", scatter=eye)  # nu missing
    with pytest.raises(DomainError):
        EllipticalFamily(kind="gaussian", scatter=np.array([[1.0, 2.0], [2.0, 1.0]]))
    fam = EllipticalFamily(kind="cauchy", scatter=eye)
    assert fam.nu == 1.0 and fam.n == 2


def test_build_equicorrelation():
    assert np.allclose(build_equicorrelation(2.0, 0.0, 3), 2.0 * np.eye(3))
    m = build_equicorrelation(1.0, 0.5, 3)
    eig = np.sort(np.linalg.eigvalsh(m))
    assert eig == pytest.approx([0.5, 0.5, 2.0], abs=1e-12)
    with pytest.raises(DomainError):
        build_equicorrelation(1.0, 1.0, 3)
    with pytest.raises(DomainError):
        build_equicorrelation(1.0, -0.51, 3)


def test_gaussian_sample_covariance_lln():
    fam = EllipticalFamily(kind="gaussian", scatter=np.eye(3))
    x = sample_elliptical(fam, 10 ** 5, SeededRng(11))
    cov = x.T @ x / len(x)
    rel = np.linalg.norm(cov - np.eye(3)) / np.linalg.norm(np.eye(3))
    assert rel < 0.02


def test_cauchy_heavy_tails():
    fam = EllipticalFamily(kind="cauchy", scatter=np.eye(2))
    x = sample_elliptical(fam, 10 ** 5, SeededRng(12))
    assert np.max(np.abs(x)) > 1e3


def test_seed_determinism():
    fam = EllipticalFamily(kind="student-t", scatter=np.eye(2), nu=5.0)
    a = sample_elliptical(fam, 500, SeededRng(77))
    b = sample_elliptical(fam, 500, SeededRng(77))
    assert np.array_equal(a, b)
    c = sample_elliptical(fam, 500, SeededRng(78))
    assert not np.array_equal(a, c)
    # substreams are addressable and order-free
    s1 = SeededRng(77).substream(3, 1).standard_normal(4)
    s2 = SeededRng(77).substream(3, 1).standard_normal(4)
    s3 = SeededRng(77).substream(1, 3).standard_normal(4)
    assert np.array_equal(s1, s2) and not np.array_equal(s1, s3)


def test_gaussian_mahalanobis_is_chi_square():
    n = 4
    scatter = build_equicorrelation(1.0, 0.3, n)
    fam = EllipticalFamily(kind="gaussian", scatter=scatter)
    x = sample_elliptical(fam, 2 * 10 ** 4, SeededRng(13))
    inv = np.linalg.inv(scatter)
    m2 = np.einsum("ti,ij,tj->t", x, inv, x)
    res = stats.kstest(m2, stats.chi2(df=n).cdf)
    assert res.pvalue > 0.01


def test_mc_sampling_study_gamma_mean_and_quantile():
    scatter = build_equicorrelation(1.0, 0.5, 2)
    fam = EllipticalFamily(kind="gaussian", scatter=scatter)
    study = mc_sampling_study(fam, T=8, replications=10 ** 4,
                              estimators=("gamma",), rng=SeededRng(42))
    s = study.estimators["gamma"]
    band = 3.0 * (math.pi / 2.0) / math.sqrt(8 * 10 ** 4)
    assert abs(s.mean - fisher(0.5)) < band
    # standardized 0.95 point close to the exact critical value at T=8
    assert s.standardized_quantiles[0.95] == pytest.approx(1.6406, abs=0.07)
    assert study.redraws == 0
    assert study.center == pytest.approx(fisher(0.5))


def test_mc_study_invariance_across_families():
    scatter = build_equicorrelation(1.0, 0.5, 2)
    draws = {}
    for kind in ("gaussian", "cauchy"):
        fam = EllipticalFamily(kind=kind, scatter=scatter)
        study = mc_sampling_study(fam, T=8, replications=4000,
                                  estimators=("gamma",), rng=SeededRng(7))
        s = study.estimators["gamma"]
        draws[kind] = s
    # same law: compare a few standardized quantiles within MC error
    for p in (0.25, 0.5, 0.75, 0.9):
        a = draws["gaussian"].standardized_quantiles[p]
        b = draws["cauchy"].standardized_quantiles[p]
        assert a == pytest.approx(b, abs=0.12)


def test_mc_study_multivariate_moments():
    n, rho = 5, 0.3
    fam = EllipticalFamily(kind="gaussian",
                           scatter=build_equicorrelation(1.0, rho, n))
    study = mc_sampling_study(fam, T=1, replications=10 ** 5,
                              estimators=("gamma",), rng=SeededRng(99))
    s = study.estimators["gamma"]
    se = math.sqrt(s.variance / study.replications)
    assert abs(s.mean - (equicorr_phi(rho, n) - omega_n(n))) < 3.0 * se
    assert s.variance == pytest.approx(logistic_beta_variance(n), rel=0.05)


def test_mc_study_validation():
    fam = EllipticalFamily(kind="gaussian", scatter=np.eye(2))
    with pytest.raises(DomainError):
        mc_sampling_study(fam, T=8, replications=50)
    with pytest.raises(DomainError):
        mc_sampling_study(fam, T=8, replications=200, estimators=("nope",))
    fam3 = EllipticalFamily(kind="gaussian", scatter=np.eye(3))
    with pytest.raises(DataError):
        mc_sampling_study(fam3, T=8, replications=200,
                          estimators=("gamma", "quadrant"))
