"""Acceptance suite.

Each test prints one ``ACCEPTANCE <k>: PASS|FAIL`` line (run pytest with
``-s`` to see the lines for passing criteria) and then asserts.

Criterion 1 compares the quantile command against the published
critical-value tabulation at 4-decimal agreement. Four of the 396
tabulated cells are known to disagree in the last printed digit; an
independent 40-digit evaluation (embedded below) confirms the computed
values, so the discrepancy lies in the reference tabulation. The
assertion is kept faithful to the stated tolerance and therefore fails;
see the repository notes for the analysis.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats
from scipy.interpolate import PchipInterpolator

from simcorr.cli import TABLE_P_GRID, main
from simcorr.distributions import (
    FiniteSampleLaw,
    finite_sample_cdf,
    finite_sample_quantile,
    hetero_variance,
    logistic_beta_variance,
    omega_n,
)
from simcorr.garch import (
    CorrDynamicsParams,
    EgarchParams,
    FitConfig,
    bivariate_corr_filter,
    deco_corr_filter,
    fit_two_step,
    simulate_model,
)
from simcorr.inference import correlation_ci
from simcorr.similarity import (
    BivariateCovariance,
    equicorr_phi,
    equicorr_phi_inverse,
    fisher,
    inverse_fisher,
    phi_r_bivariate,
    phi_r_multivariate,
)
from simcorr.simulation import (
    EllipticalFamily,
    SeededRng,
    build_equicorrelation,
    sample_elliptical,
)

PI = math.pi

# Published critical values of the standardized estimator (4 d.p.);
# rows are sample sizes, columns the probability grid TABLE_P_GRID.
REFERENCE_ROWS = """\
1 1.1731 1.6183 1.7609 1.9444 2.0606 2.2028 2.3860 2.6442 3.0855 3.5268 4.5514
2 1.2210 1.6314 1.7585 1.9197 2.0205 2.1427 2.2984 2.5151 2.8793 3.2373 4.0516
3 1.2391 1.6353 1.7561 1.9082 2.0027 2.1168 2.2613 2.4609 2.7933 3.1168 3.8432
4 1.2488 1.6373 1.7547 1.9018 1.9929 2.1024 2.2407 2.4310 2.7456 3.0497 3.7264
5 1.2549 1.6386 1.7538 1.8978 1.9867 2.0934 2.2277 2.4119 2.7151 3.0067 3.6511
6 1.2590 1.6394 1.7532 1.8950 1.9824 2.0871 2.2187 2.3987 2.6940 2.9768 3.5983
7 1.2621 1.6401 1.7528 1.8930 1.9793 2.0826 2.2122 2.3890 2.6784 2.9547 3.5592
8 1.2644 1.6406 1.7525 1.8915 1.9770 2.0791 2.2072 2.3817 2.6665 2.9377 3.5289
9 1.2662 1.6410 1.7522 1.8903 1.9751 2.0764 2.2032 2.3758 2.6571 2.9242 3.5049
10 1.2677 1.6414 1.7520 1.8894 1.9736 2.0742 2.2000 2.3711 2.6494 2.9133 3.4853
11 1.2689 1.6416 1.7519 1.8886 1.9724 2.0724 2.1974 2.3672 2.6431 2.9042 3.4690
12 1.2699 1.6419 1.7518 1.8879 1.9714 2.0708 2.1952 2.3639 2.6377 2.8966 3.4552
13 1.2708 1.6421 1.7517 1.8874 1.9705 2.0696 2.1933 2.3611 2.6332 2.8901 3.4434
14 1.2715 1.6423 1.7516 1.8869 1.9698 2.0684 2.1917 2.3587 2.6292 2.8844 3.4332
15 1.2722 1.6424 1.7515 1.8865 1.9691 2.0675 2.1903 2.3566 2.6258 2.8795 3.4243
16 1.2727 1.6426 1.7515 1.8861 1.9685 2.0666 2.1890 2.3548 2.6228 2.8752 3.4164
17 1.2732 1.6427 1.7514 1.8858 1.9680 2.0659 2.1880 2.3532 2.6201 2.8713 3.4094
18 1.2737 1.6428 1.7514 1.8855 1.9676 2.0652 2.1870 2.3517 2.6178 2.8679 3.4031
19 1.2741 1.6429 1.7513 1.8853 1.9672 2.0646 2.1861 2.3504 2.6156 2.8648 3.3975
20 1.2745 1.6430 1.7513 1.8851 1.9668 2.0641 2.1853 2.3492 2.6137 2.8620 3.3924
21 1.2748 1.6431 1.7512 1.8849 1.9665 2.0636 2.1846 2.3482 2.6119 2.8595 3.3878
22 1.2751 1.6431 1.7512 1.8847 1.9662 2.0632 2.1840 2.3472 2.6103 2.8572 3.3836
23 1.2754 1.6432 1.7512 1.8845 1.9659 2.0627 2.1834 2.3463 2.6089 2.8551 3.3797
24 1.2756 1.6433 1.7512 1.8843 1.9657 2.0624 2.1828 2.3455 2.6075 2.8531 3.3761
25 1.2759 1.6433 1.7511 1.8842 1.9655 2.0620 2.1823 2.3447 2.6063 2.8514 3.3728
30 1.2768 1.6436 1.7511 1.8836 1.9645 2.0607 2.1803 2.3417 2.6013 2.8441 3.3596
35 1.2775 1.6438 1.7510 1.8832 1.9639 2.0597 2.1789 2.3395 2.5977 2.8390 3.3500
40 1.2780 1.6439 1.7510 1.8829 1.9634 2.0589 2.1778 2.3379 2.5950 2.8350 3.3428
45 1.2784 1.6440 1.7509 1.8827 1.9630 2.0584 2.1769 2.3366 2.5929 2.8320 3.3371
50 1.2787 1.6441 1.7509 1.8825 1.9627 2.0579 2.1762 2.3356 2.5912 2.8295 3.3325
55 1.2789 1.6441 1.7509 1.8823 1.9625 2.0575 2.1757 2.3348 2.5899 2.8275 3.3288
60 1.2792 1.6442 1.7509 1.8822 1.9623 2.0572 2.1752 2.3341 2.5887 2.8258 3.3257
70 1.2795 1.6443 1.7508 1.8820 1.9619 2.0567 2.1745 2.3330 2.5869 2.8232 3.3207
80 1.2798 1.6444 1.7508 1.8819 1.9617 2.0564 2.1739 2.3322 2.5855 2.8212 3.3170
90 1.2800 1.6444 1.7508 1.8817 1.9615 2.0561 2.1735 2.3315 2.5844 2.8196 3.3141
100 1.2801 1.6445 1.7508 1.8816 1.9613 2.0558 2.1732 2.3310 2.5836 2.8184 3.3118
"""

REFERENCE_NORMAL_ROW = (1.2816, 1.6449, 1.7507, 1.8808, 1.9600, 2.0537,
                        2.1701, 2.3263, 2.5758, 2.8070, 3.2905)


def _reference_table():
    table = {}
    for line in REFERENCE_ROWS.strip().splitlines():
        parts = line.split()
        T = int(parts[0])
        for p, v in zip(TABLE_P_GRID, parts[1:]):
            table[(T, p)] = float(v)
    return table


def _report(k: int, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {k}: {'PASS' if ok else 'FAIL'} - {detail}")


def _highprec_quantile(p: float, T: int) -> float:
    """Independent 40-digit Gil-Pelaez inversion (oracle for disputes)."""
    import mpmath as mp

    mp.mp.dps = 40
    rT = mp.sqrt(T)

    def cdf(z):
        f = lambda u: mp.sin(u * z) * mp.sech(u / rT) ** T / u
        return 0.5 + mp.quad(f, [0, 5, 10, 20, 40, 80]) / mp.pi

    return float(mp.findroot(lambda z: cdf(z) - mp.mpf(p), mp.mpf(2.0)))


# ---------------------------------------------------------------------------


def test_criterion_1_reference_table_reproduction(tmp_path, capsys):
    """Full critical-value grid through the CLI at 4-decimal agreement."""
    t0 = time.time()
    out = tmp_path / "table.csv"
    code = main(["quantiles", "--format", "csv", "-o", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    computed = {}
    for line in lines[1:]:
        cells = line.split(",")
        if cells[0] == "normal":
            continue
        T = int(cells[0])
        for p, cell in zip(TABLE_P_GRID, cells[1:]):
            computed[(T, p)] = float(cell)
    reference = _reference_table()
    assert set(computed) == set(reference)

    mismatches = []
    for key in sorted(reference):
        if abs(computed[key] - reference[key]) > 5e-5:
            mismatches.append(key)
    elapsed = time.time() - t0
    ok = not mismatches
    detail = (f"{len(reference) - len(mismatches)}/{len(reference)} cells at "
              f"4-decimal agreement in {elapsed:.1f}s")
    if mismatches:
        detail += f"; disagreeing cells (T, p): {mismatches}"
    _report(1, ok, detail)
    assert elapsed < 60.0

    if mismatches:
        # independent high-precision evaluations confirm the computed values,
        # placing the last-digit error in the reference tabulation
        evidence = []
        for T, p in mismatches:
            true_q = _highprec_quantile(p, T)
            assert abs(finite_sample_quantile(p, T) - true_q) < 1e-6
            evidence.append(f"(T={T}, p={p}): computed={computed[(T, p)]:.4f} "
                            f"independent-40-digit={true_q:.7f} "
                            f"printed={reference[(T, p)]:.4f}")
        pytest.fail(
            "4-decimal agreement fails on "
            f"{len(mismatches)}/{len(reference)} cells. Independent "
            "high-precision inversion confirms the computed quantiles; the "
            "reference tabulation is off by ~1e-5 at these cells:\n  "
            + "\n  ".join(evidence))


def test_criterion_2_closed_form_cross_check():
    worst = 0.0
    for z in np.linspace(-5.0, 5.0, 201):
        closed = (2.0 / PI) * math.atan(math.exp(PI * z / 2.0))
        worst = max(worst, abs(finite_sample_cdf(float(z), 1) - closed))
    ok = worst <= 1e-9
    _report(2, ok, f"max |CF-inverted - closed form| on [-5,5] = {worst:.2e}")
    assert ok


def _draw_gamma_z(kind, rho, T, reps, seed, nu=None):
    scatter = build_equicorrelation(1.0, rho, 2)
    fam = EllipticalFamily(kind=kind, scatter=scatter, nu=nu)
    x = sample_elliptical(fam, T * reps, SeededRng(seed)).reshape(reps, T, 2)
    s = x[..., 0] + x[..., 1]
    d = x[..., 0] - x[..., 1]
    gam = np.log(np.abs(s) / np.abs(d)).mean(axis=-1)
    z = math.sqrt(T) * (gam - fisher(rho)) / (PI / 2.0)
    return x, z


def _exact_cdf_interpolator(T):
    law = FiniteSampleLaw(T)
    zs = np.linspace(-8.0, 8.0, 1601)
    return PchipInterpolator(zs, np.array([law.cdf(float(z)) for z in zs]))


def test_criterion_3_sampling_law_invariance():
    reps = 10 ** 4
    families = (("gaussian", None, 301), ("student-t", 5.0, 302),
                ("cauchy", None, 303))
    all_ok = True
    details = []
    fisher_draws = {}
    for T in (8, 40):
        F = _exact_cdf_interpolator(T)
        zdraws = {}
        for kind, nu, seed in families:
            x, z = _draw_gamma_z(kind, 0.5, T, reps, seed + T, nu=nu)
            zdraws[kind] = z
            res = stats.kstest(np.clip(z, -7.99, 7.99), F)
            all_ok = all_ok and res.pvalue > 0.01
            details.append(f"{kind} T={T} KS p={res.pvalue:.3f}")
            num = (x[..., 0] * x[..., 1]).sum(axis=-1)
            den = np.sqrt((x[..., 0] ** 2).sum(-1) * (x[..., 1] ** 2).sum(-1))
            fisher_draws[(kind, T)] = np.arctanh(
                np.clip(num / den, -1 + 1e-15, 1 - 1e-15))
        # the standardized law is also indistinguishable across families
        for kind in ("student-t", "cauchy"):
            res2 = stats.ks_2samp(zdraws["gaussian"], zdraws[kind])
            all_ok = all_ok and res2.pvalue > 0.01
            details.append(f"gaussian~{kind} T={T} two-sample p={res2.pvalue:.3f}")

    # demonstration (not a gate): the Fisher-transformed sample correlation
    # is NOT invariant across families
    demo = stats.ks_2samp(fisher_draws[("gaussian", 40)],
                          fisher_draws[("cauchy", 40)])
    details.append(f"fisher-sample gaussian~cauchy T=40: KS stat="
                   f"{demo.statistic:.3f} p={demo.pvalue:.2e} (demonstration)")
    _report(3, all_ok, "; ".join(details))
    assert all_ok


def test_criterion_4_interval_coverage():
    reps = 10 ** 4
    qs = {(T, lv): finite_sample_quantile((1.0 + lv) / 2.0, T)
          for T in (8, 40, 78) for lv in (0.90, 0.95)}
    worst = 0.0
    all_ok = True
    seed = 400
    for kind, nu in (("gaussian", None), ("student-t", 5.0), ("cauchy", None)):
        for rho in (0.0, 0.5, 0.9):
            for T in (8, 40, 78):
                seed += 1
                _, z = _draw_gamma_z(kind, rho, T, reps, seed, nu=nu)
                for lv in (0.90, 0.95):
                    cov = float(np.mean(np.abs(z) <= qs[(T, lv)]))
                    gap = abs(cov - lv)
                    worst = max(worst, gap)
                    all_ok = all_ok and gap <= 0.015
    # the API builds the same intervals it is being graded on
    x, z = _draw_gamma_z("gaussian", 0.5, 8, 50, 499)
    for r in range(50):
        ci = correlation_ci(x[r], level=0.90, law="exact")
        assert (ci.lower <= 0.5 <= ci.upper) == (abs(z[r]) <= qs[(8, 0.90)] + 1e-12)
    _report(4, all_ok,
            f"54 coverage cells (3 families x 3 rho x 3 T x 2 levels), "
            f"max |empirical - nominal| = {worst:.4f} (tolerance 0.015)")
    assert all_ok


def test_criterion_5_joint_similarity_moments():
    draws = 10 ** 5
    rho = 0.3
    all_ok = True
    details = []
    for idx, n in enumerate((3, 5, 9)):
        fam = EllipticalFamily(kind="gaussian",
                               scatter=build_equicorrelation(1.0, rho, n))
        x = sample_elliptical(fam, draws, SeededRng(500 + idx))
        S = x.sum(axis=-1)
        D = x - (S / n)[..., None]
        q2 = (D ** 2).sum(axis=-1) - D.sum(axis=-1) ** 2 / n
        phi = np.log((S ** 2 / n) / q2) / n
        # vectorized rows must agree with the scalar implementation
        for t in range(50):
            assert phi[t] == pytest.approx(phi_r_multivariate(x[t]), abs=1e-12)
        mean_se = float(phi.std(ddof=1)) / math.sqrt(draws)
        mean_gap = abs(float(phi.mean()) - (equicorr_phi(rho, n) - omega_n(n)))
        m2 = float(phi.var(ddof=1))
        m4 = float(((phi - phi.mean()) ** 4).mean())
        var_se = math.sqrt(max(m4 - m2 * m2, 0.0) / draws)
        var_gap = abs(m2 - logistic_beta_variance(n))
        ok = mean_gap <= 3.0 * mean_se and var_gap <= 3.0 * var_se
        all_ok = all_ok and ok
        details.append(f"n={n}: |mean dev|={mean_gap / mean_se:.2f}se, "
                       f"|var dev|={var_gap / var_se:.2f}se")
    exact_zero = omega_n(2) == 0.0
    all_ok = all_ok and exact_zero
    details.append(f"omega_2 == 0: {exact_zero}")
    _report(5, all_ok, "; ".join(details))
    assert all_ok


def test_criterion_6_heterogeneous_variance():
    gen = np.random.default_rng(600)
    k = np.arange(1, 10 ** 6 + 1, dtype=float)
    worst = 0.0
    for _ in range(50):
        s1 = float(gen.uniform(0.2, 5.0))
        s2 = float(gen.uniform(0.2, 5.0))
        rho = float(gen.uniform(-0.9, 0.9))
        spec = BivariateCovariance(s1, s2, rho * math.sqrt(s1 * s2))
        series = PI ** 2 / 6.0 - float(np.sum(np.cos(2.0 * k * spec.phase_gap) / k ** 2))
        worst = max(worst, abs(hetero_variance(spec) - series))
    series_ok = worst <= 1e-9
    homog_ok = all(
        abs(hetero_variance(BivariateCovariance(v, v, c * v)) - PI ** 2 / 4.0) < 1e-12
        for v in (0.5, 1.0, 3.0) for c in (-0.6, 0.0, 0.8))

    # MC mean of the similarity equals fisher(xi) on heterogeneous specs
    mc_ok = True
    mc_details = []
    for idx, (s1, s2, s12) in enumerate(((1.0, 4.0, 1.2), (2.0, 0.5, -0.4),
                                         (1.0, 9.0, 2.0))):
        spec = BivariateCovariance(s1, s2, s12)
        fam = EllipticalFamily(kind="gaussian",
                               scatter=np.array([[s1, s12], [s12, s2]]))
        x = sample_elliptical(fam, 10 ** 5, SeededRng(650 + idx))
        phi = np.log(np.abs(x[:, 0] + x[:, 1]) / np.abs(x[:, 0] - x[:, 1]))
        se = float(phi.std(ddof=1)) / math.sqrt(len(phi))
        gap = abs(float(phi.mean()) - fisher(spec.resemblance))
        mc_ok = mc_ok and gap <= 3.0 * se
        mc_details.append(f"{gap / se:.2f}se")
        # the empirical variance should also match the closed form
        assert float(phi.var(ddof=1)) == pytest.approx(hetero_variance(spec), rel=0.05)
    ok = series_ok and homog_ok and mc_ok
    _report(6, ok, f"closed-vs-series worst gap {worst:.1e} over 50 specs; "
                   f"homogeneous = pi^2/4: {homog_ok}; "
                   f"MC mean deviations: {', '.join(mc_details)}")
    assert ok


def test_criterion_7_asymptotic_agreement_at_T100():
    from scipy.stats import norm

    reference = _reference_table()
    ok = True
    for p, ref_normal in zip(TABLE_P_GRID, REFERENCE_NORMAL_ROW):
        exact = finite_sample_quantile(p, 100)
        ok = ok and round(exact, 4) == reference[(100, p)]
        ok = ok and round(float(norm.ppf(p)), 4) == ref_normal
    example = (finite_sample_quantile(0.95, 100), float(norm.ppf(0.95)))
    _report(7, ok, f"T=100 row and N(0,1) row match to 4 decimals "
                   f"(0.95 column: {example[0]:.4f} vs {example[1]:.4f})")
    assert ok


def _recovery_rep(mode, n, seed):
    eg_true = EgarchParams(alpha=-0.05, beta=0.95, kappa=0.10, eta=0.5)
    corr_true = CorrDynamicsParams(alpha=0.02, beta=0.90, kappa=0.05,
                                   mode=mode, n=n)
    r, _ = simulate_model([eg_true] * n, corr_true, T=5000,
                          rng=SeededRng(seed), rho0=0.3)
    fit = fit_two_step(r, FitConfig(mode=mode))
    est = np.array([fit.corr.alpha, fit.corr.beta, fit.corr.kappa])
    truth = np.array([0.02, 0.90, 0.05])
    assert fit.corr_se is not None
    return bool(np.all(np.abs(est - truth) <= 3.0 * fit.corr_se))


def test_criterion_8_garch_recovery_and_outlier_invariance():
    t0 = time.time()
    hits_biv = sum(_recovery_rep("bivariate", 2, 800 + i) for i in range(20))
    hits_deco = sum(_recovery_rep("deco", 9, 900 + i) for i in range(20))

    # scale-invariance of the innovation: rescaling one observation vector
    # by an exactly-representable factor (2**20 ~ 1.05e6) leaves the whole
    # filtered path bit-identical
    bit_ok = True
    for mode, n in (("bivariate", 2), ("deco", 9)):
        z = np.random.default_rng(42).standard_normal((500, n))
        scaled = z.copy()
        scaled[123] *= 2.0 ** 20
        params = CorrDynamicsParams(alpha=0.02, beta=0.9, kappa=0.05,
                                    mode=mode, n=n)
        run = bivariate_corr_filter if mode == "bivariate" else deco_corr_filter
        pa, ra = run(z, params, phi0=0.2)
        pb, rb = run(scaled, params, phi0=0.2)
        bit_ok = bit_ok and np.array_equal(pa, pb) and np.array_equal(ra, rb)

    ok = hits_biv >= 18 and hits_deco >= 18 and bit_ok
    _report(8, ok, f"bivariate {hits_biv}/20 and deco(n=9) {hits_deco}/20 "
                   f"within 3 SE; outlier path bit-identical: {bit_ok}; "
                   f"{time.time() - t0:.0f}s")
    assert ok


def test_criterion_9_randomized_invariant_suite():
    gen = np.random.default_rng(90210)
    cases = 10 ** 4
    checks = {}

    # scale invariance (exact, power-of-two factors)
    x = gen.uniform(-100.0, 100.0, size=(cases, 2))
    x = x[np.abs(x[:, 0] + x[:, 1]) > 1e-9]
    x = x[np.abs(x[:, 0] - x[:, 1]) > 1e-9][: cases - 2]
    ks = gen.integers(-40, 41, size=len(x))
    signs = gen.choice([-1.0, 1.0], size=len(x))
    ok = True
    for row, kk, sg in zip(x, ks, signs):
        c = sg * math.ldexp(1.0, int(kk))
        ok = ok and (phi_r_bivariate(c * row[0], c * row[1])
                     == phi_r_bivariate(row[0], row[1]))
    checks[f"scale invariance exact ({len(x)} cases)"] = ok

    # permutation symmetry (n = 5) and swap symmetry (bivariate)
    ok = True
    xm = gen.standard_normal((cases // 2, 5))
    for row in xm:
        perm = gen.permutation(5)
        ok = ok and phi_r_multivariate(row[perm]) == phi_r_multivariate(row)
    for row in x[: cases // 2]:
        ok = ok and (phi_r_bivariate(row[1], row[0])
                     == phi_r_bivariate(row[0], row[1]))
    checks[f"permutation symmetry ({cases // 2 + cases // 2} cases)"] = ok

    # sign antisymmetry
    ok = all(abs(phi_r_bivariate(row[0], -row[1]) + phi_r_bivariate(row[0], row[1]))
             < 1e-12 for row in x)
    checks[f"sign antisymmetry ({len(x)} cases)"] = ok

    # round trips
    rhos = gen.uniform(-0.9995, 0.9995, cases)
    ok = all(abs(inverse_fisher(fisher(float(r))) - float(r)) < 1e-12 for r in rhos)
    for n in (2, 3, 5, 10, 50):
        lo = -1.0 / (n - 1)
        rr = lo + (1.0 - lo) * gen.uniform(1e-4, 1.0 - 1e-4, cases // 5)
        ok = ok and all(
            abs(equicorr_phi_inverse(equicorr_phi(float(r), n), n) - float(r)) < 1e-12
            for r in rr)
    checks[f"transform round trips ({cases + 5 * (cases // 5)} cases)"] = ok

    # bivariate reduction of the joint similarity
    ok = all(abs(phi_r_multivariate(row) - phi_r_bivariate(row[0], row[1])) < 1e-12
             for row in x)
    checks[f"n=2 reduction ({len(x)} cases)"] = ok

    # range bounds: strict interior where the interior is representable in
    # doubles (|n*phi| below ~36), closed bounds under saturation
    phis = gen.uniform(-3.5, 3.5, cases)
    ns = gen.integers(2, 11, cases)
    ok = all(-1.0 / (int(n) - 1) < equicorr_phi_inverse(float(p), int(n)) < 1.0
             for p, n in zip(phis, ns))
    gs = gen.uniform(-17.0, 17.0, cases)
    ok = ok and all(-1.0 < inverse_fisher(float(g)) < 1.0 for g in gs)
    extreme = gen.uniform(-700.0, 700.0, cases)
    ok = ok and all(
        abs(inverse_fisher(float(g))) <= 1.0
        and -1.0 / (int(n) - 1) <= equicorr_phi_inverse(float(g) / 10.0, int(n)) <= 1.0
        for g, n in zip(extreme, ns))
    checks[f"range bounds ({3 * cases} cases)"] = ok

    all_ok = all(checks.values())
    _report(9, all_ok, "; ".join(f"{name}: {'ok' if v else 'FAIL'}"
                                 for name, v in checks.items()))
    assert all_ok
