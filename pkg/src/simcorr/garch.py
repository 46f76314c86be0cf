"""Robust correlation GARCH: EGARCH volatilities plus a Fisher-scale
correlation recursion driven by the similarity measure.

Bivariate mode updates the Fisher-transformed correlation; deco mode
updates the common off-diagonal element of the log correlation matrix
under equicorrelation. Both recursions keep the filtered correlation
matrix positive definite by construction, and the similarity innovation
makes the filter insensitive to the magnitude of return outliers.

Estimation is two-step Gaussian QML: per-asset EGARCH fits produce
standardized residuals, then the correlation stage is maximized on those
residuals. The optimizer is a derivative-free simplex with |beta| < 1
enforced through a tanh reparameterization and a small deterministic
multi-start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import _filters as k
from .errors import DataError, DomainError, EstimationError
from .similarity import equicorr_phi, fisher
from .special import omega_n
from .simulation import SeededRng

__all__ = [
    "EgarchParams",
    "CorrDynamicsParams",
    "FilteredPaths",
    "FitConfig",
    "GarchFit",
    "egarch_filter",
    "bivariate_corr_filter",
    "deco_corr_filter",
    "fit_two_step",
    "simulate_model",
]

_BETA_BOUND_FLAG = 0.999


@dataclass(frozen=True)
class EgarchParams:
    """EGARCH(1,1) parameter set for one asset:
    log h_t = alpha + beta*log h_{t-1} + kappa*(z_{t-1} + eta*(|z_{t-1}| - E|z|))."""

    alpha: float
    beta: float
    kappa: float
    eta: float

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.kappa, self.eta)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("EGARCH parameters must be finite")
        if not abs(self.beta) < 1.0:
            raise DomainError(f"stationarity needs |beta| < 1, got beta={self.beta!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.kappa, self.eta])


@dataclass(frozen=True)
class CorrDynamicsParams:
    """Correlation recursion phi_t = alpha + beta*phi_{t-1} + kappa*phi_r,t-1."""

    alpha: float
    beta: float
    kappa: float
    mode: str = "bivariate"
    n: int = 2

    def __post_init__(self):
        if self.mode not in ("bivariate", "deco"):
            raise DomainError(f"mode must be 'bivariate' or 'deco', got {self.mode!r}")
        vals = (self.alpha, self.beta, self.kappa)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("correlation parameters must be finite")
        if not abs(self.beta) < 1.0:
            raise DomainError(f"stationarity needs |beta| < 1, got beta={self.beta!r}")
        if self.mode == "bivariate" and self.n != 2:
            raise DomainError("bivariate mode requires n = 2")
        if self.n < 2 or int(self.n) != self.n:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n!r}")


@dataclass(frozen=True)
class FilteredPaths:
    """Filtered state paths: conditional variances, Fisher-scale
    correlation, correlation, standardized residuals, and the estimated
    constant means."""

    h: np.ndarray
    phi: np.ndarray
    rho: np.ndarray
    z: np.ndarray
    mu: np.ndarray


@dataclass(frozen=True)
class FitConfig:
    """Two-step estimation settings."""

    mode: str = "bivariate"
    min_obs: int = 100
    multistart_betas: tuple[float, ...] = (0.80, 0.85, 0.90, 0.95, 0.97)
    max_iter: int = 4000
    compute_se: bool = True
    innovation_cap: float = math.inf  # optional winsorization of phi_r shocks

    def __post_init__(self):
        if self.mode not in ("bivariate", "deco"):
            raise DomainError(f"mode must be 'bivariate' or 'deco', got {self.mode!r}")


@dataclass(frozen=True)
class GarchFit:
    """Two-step estimation result."""

    egarch: tuple[EgarchParams, ...]
    corr: CorrDynamicsParams
    paths: FilteredPaths
    loglik_volatility: tuple[float, ...]
    loglik_correlation: float
    egarch_se: tuple[np.ndarray, ...] | None
    corr_se: np.ndarray | None
    diagnostics: dict = field(default_factory=dict)

    @property
    def loglik_total(self) -> float:
        return sum(self.loglik_volatility) + self.loglik_correlation


# ---------------------------------------------------------------------------
# filters (validated wrappers around the kernels)


def egarch_filter(returns, params: EgarchParams, mu: float, h0: float):
    """Run the EGARCH(1,1) recursion; returns (h, z) paths."""
    r = np.ascontiguousarray(returns, dtype=float)
    if r.ndim != 1 or r.shape[0] < 1:
        raise DataError("returns must be a non-empty vector")
    if not np.all(np.isfinite(r)):
        raise DataError(f"non-finite return at index {int(np.argmax(~np.isfinite(r)))}")
    if not (h0 > 0.0 and math.isfinite(h0)):
        raise DomainError(f"h0 must be finite and positive, got {h0!r}")
    h, z, ok = k.egarch_filter(r, float(mu), params.alpha, params.beta,
                               params.kappa, params.eta, float(h0))
    if not ok:
        raise EstimationError(
            f"variance recursion left the floating range at index {int(h[0])}",
            diagnostics={"first_bad_index": int(h[0])})
    return h, z


def _corr_filter(z, params: CorrDynamicsParams, phi0: float, cap: float):
    zz = np.ascontiguousarray(z, dtype=float)
    if zz.ndim != 2 or zz.shape[0] < 1 or zz.shape[1] < 2:
        raise DataError("standardized residuals must form a T x n panel, n >= 2")
    if not math.isfinite(phi0):
        raise DomainError(f"phi0 must be finite, got {phi0!r}")
    if params.mode == "bivariate":
        if zz.shape[1] != 2:
            raise DataError(f"bivariate filter needs 2 columns, got {zz.shape[1]}")
        return k.corr_filter_bivariate(zz, params.alpha, params.beta,
                                       params.kappa, float(phi0), cap)
    return k.corr_filter_deco(zz, params.alpha, params.beta,
                              params.kappa, float(phi0), cap)


def bivariate_corr_filter(z, params: CorrDynamicsParams, phi0: float,
                          innovation_cap: float = math.inf):
    """Fisher-scale correlation filter; returns (phi, rho) paths with
    rho always strictly inside (-1, 1)."""
    if params.mode != "bivariate":
        raise DomainError("params.mode must be 'bivariate'")
    return _corr_filter(z, params, phi0, innovation_cap)


def deco_corr_filter(z, params: CorrDynamicsParams, phi0: float,
                     innovation_cap: float = math.inf):
    """Equicorrelation filter on the log-matrix scale; rho stays strictly
    inside (-1/(n-1), 1)."""
    if params.mode != "deco":
        raise DomainError("params.mode must be 'deco'")
    return _corr_filter(z, params, phi0, innovation_cap)


# ---------------------------------------------------------------------------
# two-step estimation


def _simplex(fun, x0, max_iter):
    return minimize(fun, x0, method="Nelder-Mead",
                    options=dict(xatol=1e-7, fatol=1e-9,
                                 maxiter=max_iter, maxfev=2 * max_iter))


def _multistart(fun, starts, max_iter):
    best = None
    for x0 in starts:
        res = _simplex(fun, np.asarray(x0, dtype=float), max_iter)
        if best is None or res.fun < best.fun:
            best = res
    # one polishing restart from the incumbent
    res = _simplex(fun, best.x, max_iter)
    if res.fun <= best.fun:
        best = res
    return best


def _hessian_se(fun, x, step=1e-4):
    """Standard errors from a central-difference Hessian of the nll."""
    m = len(x)
    H = np.empty((m, m))
    I = np.eye(m)
    f0 = fun(x)
    hs = [step * max(1.0, abs(v)) for v in x]
    for i in range(m):
        for j in range(i, m):
            hi, hj = hs[i], hs[j]
            if i == j:
                H[i, i] = (fun(x + 2 * hi * I[i]) - 2 * f0
                           + fun(x - 2 * hi * I[i])) / (4 * hi * hi)
            else:
                H[i, j] = H[j, i] = (
                    fun(x + hi * I[i] + hj * I[j]) - fun(x + hi * I[i] - hj * I[j])
                    - fun(x - hi * I[i] + hj * I[j]) + fun(x - hi * I[i] - hj * I[j])
                ) / (4 * hi * hj)
    try:
        cov = np.linalg.inv(H)
        diag = np.diag(cov)
        if np.any(diag <= 0.0):
            return None
        return np.sqrt(diag)
    except np.linalg.LinAlgError:
        return None


def _fit_one_egarch(r, config: FitConfig):
    mu = float(np.mean(r))
    h0 = float(np.var(r))
    if not h0 > 0.0:
        raise DataError("asset series has zero variance")
    rc = np.ascontiguousarray(r, dtype=float)

    def nll(theta):
        a, b_raw, kap, eta = theta
        return k.egarch_nll(rc, mu, a, math.tanh(b_raw), kap, eta, h0)

    logv = math.log(h0)
    starts = [np.array([(1.0 - b) * logv, math.atanh(b), 0.10, 0.30])
              for b in config.multistart_betas]
    best = _multistart(nll, starts, config.max_iter)
    if not math.isfinite(best.fun) or best.fun >= 1e11:
        raise EstimationError("EGARCH stage failed to find a finite likelihood",
                              best=best.x,
                              diagnostics={"nll": float(best.fun)})
    params = EgarchParams(alpha=float(best.x[0]), beta=math.tanh(float(best.x[1])),
                          kappa=float(best.x[2]), eta=float(best.x[3]))
    se = None
    if config.compute_se:
        def nll_raw(theta):
            return k.egarch_nll(rc, mu, theta[0], theta[1], theta[2], theta[3], h0)
        se = _hessian_se(nll_raw, params.as_array())
    return mu, h0, params, -float(best.fun), se, bool(best.success)


def _initial_phi(z, mode: str, n: int) -> float:
    """Unconditional starting state: sample similarity mean, bias-corrected
    in deco mode; degenerate rows are skipped here."""
    vals = []
    for t in range(z.shape[0]):
        if mode == "deco":
            v, ok = k.phi_r_vector(z[t])
        else:
            v, ok = k.phi_r_pair(z[t, 0], z[t, 1])
        if ok:
            vals.append(v)
    if not vals:
        return 0.0
    phi0 = float(np.mean(vals))
    if mode == "deco":
        phi0 += omega_n(n)
    return phi0


def fit_two_step(panel, config: FitConfig = FitConfig()) -> GarchFit:
    """Estimate the model by two-step Gaussian QML.

    Step 1 fits one EGARCH per asset and standardizes the returns; step 2
    maximizes the correlation-stage likelihood in (alpha, beta, kappa) on
    the standardized panel. Raises :class:`EstimationError` with the best
    point found when an optimizer stalls.
    """
    panel = np.asarray(panel, dtype=float)
    if panel.ndim != 2:
        raise DataError(f"panel must be T x n, got shape {panel.shape}")
    T, n = panel.shape
    if n < 2:
        raise DataError(f"need at least two assets, got n={n}")
    if config.mode == "bivariate" and n != 2:
        raise DataError(f"bivariate mode needs exactly 2 columns, got {n}")
    if T < config.min_obs:
        raise DataError(f"need at least {config.min_obs} observations, got {T}")
    if not np.all(np.isfinite(panel)):
        bad = np.argwhere(~np.isfinite(panel))[0]
        raise DataError(f"non-finite entry at row {bad[0]}, column {bad[1]}")

    mus = np.empty(n)
    h0s = np.empty(n)
    eg_params: list[EgarchParams] = []
    eg_ll: list[float] = []
    eg_se: list[np.ndarray] = []
    eg_converged = True
    zcols = []
    for i in range(n):
        mu, h0, params, ll, se, ok = _fit_one_egarch(panel[:, i], config)
        mus[i] = mu
        h0s[i] = h0
        eg_params.append(params)
        eg_ll.append(ll)
        eg_se.append(se)
        eg_converged = eg_converged and ok
        _, zi = egarch_filter(panel[:, i], params, mu, h0)
        zcols.append(zi)
    z = np.ascontiguousarray(np.column_stack(zcols))

    phi0 = _initial_phi(z, config.mode, n)
    cap = config.innovation_cap
    nll_kernel = k.corr_nll_deco if config.mode == "deco" else k.corr_nll_bivariate

    def corr_nll(theta):
        a, b_raw, kap = theta
        return nll_kernel(z, a, math.tanh(b_raw), kap, phi0, cap)

    starts = [np.array([(1.0 - b) * phi0, math.atanh(b), 0.05])
              for b in config.multistart_betas]
    best = _multistart(corr_nll, starts, config.max_iter)
    if not math.isfinite(best.fun) or best.fun >= 1e11:
        raise EstimationError("correlation stage failed to find a finite likelihood",
                              best=best.x,
                              diagnostics={"nll": float(best.fun), "phi0": phi0})
    corr = CorrDynamicsParams(alpha=float(best.x[0]),
                              beta=math.tanh(float(best.x[1])),
                              kappa=float(best.x[2]),
                              mode=config.mode, n=n)

    corr_se = None
    if config.compute_se:
        def corr_nll_raw(theta):
            return nll_kernel(z, theta[0], theta[1], theta[2], phi0, cap)
        corr_se = _hessian_se(corr_nll_raw,
                              np.array([corr.alpha, corr.beta, corr.kappa]))

    # assemble filtered paths under fitted parameters
    hcols = []
    for i in range(n):
        hi, _ = egarch_filter(panel[:, i], eg_params[i], mus[i], h0s[i])
        hcols.append(hi)
    phi_path, rho_path = _corr_filter(z, corr, phi0, cap)
    paths = FilteredPaths(h=np.column_stack(hcols), phi=phi_path,
                          rho=rho_path, z=z, mu=mus)

    diagnostics = {
        "phi0": phi0,
        "step1_converged": eg_converged,
        "step2_converged": bool(best.success),
        "beta_near_boundary": abs(corr.beta) > _BETA_BOUND_FLAG
        or any(abs(p.beta) > _BETA_BOUND_FLAG for p in eg_params),
    }
    return GarchFit(
        egarch=tuple(eg_params),
        corr=corr,
        paths=paths,
        loglik_volatility=tuple(eg_ll),
        loglik_correlation=-float(best.fun),
        egarch_se=tuple(eg_se) if config.compute_se else None,
        corr_se=corr_se,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# model simulation (for studies and recovery tests)


def simulate_model(egarch: list[EgarchParams] | tuple[EgarchParams, ...],
                   corr: CorrDynamicsParams,
                   T: int,
                   rng: SeededRng,
                   mus=None,
                   burn: int = 500,
                   rho0: float | None = None):
    """Simulate a return panel from the joint model with Gaussian shocks.

    The recursion starts at the unconditional variance of each EGARCH and
    at rho0 (default: the correlation's fixed point if kappa were zero),
    and a burn-in prefix is discarded. Returns (returns, paths).
    """
    n = len(egarch)
    if n < 2:
        raise DomainError("need at least two assets")
    if corr.mode == "bivariate" and n != 2:
        raise DomainError("bivariate mode requires exactly two assets")
    if corr.n != n:
        raise DomainError(f"corr.n={corr.n} does not match the asset count {n}")
    mus = np.zeros(n) if mus is None else np.asarray(mus, dtype=float)
    eg = np.array([p.as_array() for p in egarch])
    h0s = np.exp(eg[:, 0] / (1.0 - eg[:, 1]))  # unconditional log-variance level
    if rho0 is None:
        phi0 = corr.alpha / (1.0 - corr.beta)
    else:
        phi0 = (fisher(rho0) if corr.mode == "bivariate"
                else equicorr_phi(rho0, n))
    gen = rng.generator()
    eps = gen.standard_normal((int(T) + burn, n))
    cq = np.array([corr.alpha, corr.beta, corr.kappa])
    r, z, h, phi, rho = k.simulate_panel(eps, mus, eg, cq, h0s, phi0,
                                         corr.mode == "deco")
    sl = slice(burn, None)
    paths = FilteredPaths(h=h[sl], phi=phi[sl], rho=rho[sl], z=z[sl], mu=mus)
    return r[sl], paths
