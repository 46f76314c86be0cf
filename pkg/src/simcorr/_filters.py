"""Jit-compiled recursions for the volatility and correlation filters.

Pure float64 kernels; all model-facing validation lives in garch.py.
Likelihood kernels return a large penalty instead of raising so the
simplex optimizer can traverse bad regions.
"""

import math

import numpy as np
from numba import njit

SQRT_2_OVER_PI = 0.7978845608028654  # E|z| for standard normal z
_PENALTY = 1e12
_LOG_2PI = math.log(2.0 * math.pi)


@njit(cache=True)
def phi_r_pair(z1, z2):
    """Bivariate similarity of one pair; ok=False marks a degenerate pair."""
    s = z1 + z2
    d = z1 - z2
    if s == 0.0 or d == 0.0:
        return 0.0, False
    return math.log(abs(s) / abs(d)), True


@njit(cache=True)
def phi_r_vector(row):
    """Joint similarity of one row (corrected two-pass quadratic forms)."""
    n = row.shape[0]
    s = 0.0
    for i in range(n):
        s += row[i]
    xbar = s / n
    q2 = 0.0
    dsum = 0.0
    for i in range(n):
        d = row[i] - xbar
        q2 += d * d
        dsum += d
    q2 -= dsum * dsum / n
    q1 = s * s / n
    if q1 <= 0.0 or q2 <= 0.0:
        return 0.0, False
    return math.log(q1 / q2) / n, True


@njit(cache=True)
def rho_from_phi_equi(phi, n):
    """Inverse of the equicorrelation log-matrix map, overflow-safe."""
    npf = n * phi
    if npf >= 0.0:
        e = math.exp(-npf)
        return (1.0 - e) / (1.0 + (n - 1.0) * e)
    e = math.exp(npf)
    return (e - 1.0) / (e + n - 1.0)


@njit(cache=True)
def egarch_filter(r, mu, alpha, beta, kappa, eta, h0):
    """EGARCH(1,1) pass: returns (h, z, ok). ok=False flags the recursing
    log-variance leaving the exp-safe range; h holds the last good index
    in h[0] when that happens."""
    T = r.shape[0]
    h = np.empty(T)
    z = np.empty(T)
    h[0] = h0
    z[0] = (r[0] - mu) / math.sqrt(h0)
    logh = math.log(h0)
    for t in range(1, T):
        g = z[t - 1] + eta * (abs(z[t - 1]) - SQRT_2_OVER_PI)
        logh = alpha + beta * logh + kappa * g
        if not (-690.0 < logh < 690.0):
            h[0] = t
            return h, z, False
        h[t] = math.exp(logh)
        z[t] = (r[t] - mu) / math.sqrt(h[t])
    return h, z, True


@njit(cache=True)
def egarch_nll(r, mu, alpha, beta, kappa, eta, h0):
    """Gaussian negative log-likelihood of the EGARCH(1,1) recursion."""
    T = r.shape[0]
    logh = math.log(h0)
    zprev = (r[0] - mu) / math.sqrt(h0)
    nll = 0.5 * (_LOG_2PI + logh + zprev * zprev)
    for t in range(1, T):
        g = zprev + eta * (abs(zprev) - SQRT_2_OVER_PI)
        logh = alpha + beta * logh + kappa * g
        if not (-690.0 < logh < 690.0):
            return _PENALTY
        h = math.exp(logh)
        z = (r[t] - mu) / math.sqrt(h)
        nll += 0.5 * (_LOG_2PI + logh + z * z)
        zprev = z
    if not math.isfinite(nll):
        return _PENALTY
    return nll


@njit(cache=True)
def corr_filter_bivariate(z, alpha, beta, kappa, phi0, innov_cap):
    """Fisher-scale correlation recursion on standardized pairs."""
    T = z.shape[0]
    phi = np.empty(T)
    rho = np.empty(T)
    phi[0] = phi0
    for t in range(1, T):
        innov, ok = phi_r_pair(z[t - 1, 0], z[t - 1, 1])
        if not ok:
            innov = 0.0
        elif innov > innov_cap:
            innov = innov_cap
        elif innov < -innov_cap:
            innov = -innov_cap
        phi[t] = alpha + beta * phi[t - 1] + kappa * innov
    for t in range(T):
        rho[t] = math.tanh(phi[t])
    return phi, rho


@njit(cache=True)
def corr_filter_deco(z, alpha, beta, kappa, phi0, innov_cap):
    """Log-matrix equicorrelation recursion on standardized rows."""
    T, n = z.shape
    phi = np.empty(T)
    rho = np.empty(T)
    phi[0] = phi0
    for t in range(1, T):
        innov, ok = phi_r_vector(z[t - 1])
        if not ok:
            innov = 0.0
        elif innov > innov_cap:
            innov = innov_cap
        elif innov < -innov_cap:
            innov = -innov_cap
        phi[t] = alpha + beta * phi[t - 1] + kappa * innov
    for t in range(T):
        rho[t] = rho_from_phi_equi(phi[t], n)
    return phi, rho


@njit(cache=True)
def corr_nll_bivariate(z, alpha, beta, kappa, phi0, innov_cap):
    """Gaussian nll of the bivariate correlation stage."""
    T = z.shape[0]
    phi = phi0
    nll = 0.0
    for t in range(T):
        if t > 0:
            innov, ok = phi_r_pair(z[t - 1, 0], z[t - 1, 1])
            if not ok:
                innov = 0.0
            elif innov > innov_cap:
                innov = innov_cap
            elif innov < -innov_cap:
                innov = -innov_cap
            phi = alpha + beta * phi + kappa * innov
            if not (-350.0 < phi < 350.0):
                return _PENALTY
        rho = math.tanh(phi)
        om = 1.0 - rho * rho
        if om < 1e-300:
            return _PENALTY
        q = (z[t, 0] * z[t, 0] + z[t, 1] * z[t, 1]
             - 2.0 * rho * z[t, 0] * z[t, 1]) / om
        nll += 0.5 * (_LOG_2PI * 2.0 + math.log(om) + q)
    if not math.isfinite(nll):
        return _PENALTY
    return nll


@njit(cache=True)
def corr_nll_deco(z, alpha, beta, kappa, phi0, innov_cap):
    """Gaussian nll of the equicorrelation stage; the determinant and
    inverse use the closed equicorrelation forms."""
    T, n = z.shape
    phi = phi0
    nll = 0.0
    for t in range(T):
        if t > 0:
            innov, ok = phi_r_vector(z[t - 1])
            if not ok:
                innov = 0.0
            elif innov > innov_cap:
                innov = innov_cap
            elif innov < -innov_cap:
                innov = -innov_cap
            phi = alpha + beta * phi + kappa * innov
            if not (-350.0 < phi < 350.0):
                return _PENALTY
        rho = rho_from_phi_equi(phi, n)
        om = 1.0 - rho
        lam = 1.0 + (n - 1.0) * rho
        if om < 1e-300 or lam < 1e-300:
            return _PENALTY
        ssq = 0.0
        ssum = 0.0
        for i in range(n):
            ssq += z[t, i] * z[t, i]
            ssum += z[t, i]
        q = (ssq - rho * ssum * ssum / lam) / om
        nll += 0.5 * (_LOG_2PI * n + (n - 1.0) * math.log(om) + math.log(lam) + q)
    if not math.isfinite(nll):
        return _PENALTY
    return nll


@njit(cache=True)
def simulate_panel(eps, mus, eg_params, corr_params, h0s, phi0, deco):
    """Simulate returns from the joint model given N(0,1) innovations.

    eg_params: (n, 4) rows of (alpha, beta, kappa, eta); corr_params:
    (alpha, beta, kappa). Correlation shocks are built as C_t^{1/2} eps_t
    with the closed-form equicorrelation square root in deco mode.
    """
    T, n = eps.shape
    r = np.empty((T, n))
    z = np.empty((T, n))
    h = np.empty((T, n))
    phi_path = np.empty(T)
    rho_path = np.empty(T)
    logh = np.empty(n)
    for i in range(n):
        logh[i] = math.log(h0s[i])
    phi = phi0
    for t in range(T):
        if t > 0:
            for i in range(n):
                zp = z[t - 1, i]
                g = zp + eg_params[i, 3] * (abs(zp) - SQRT_2_OVER_PI)
                logh[i] = (eg_params[i, 0] + eg_params[i, 1] * logh[i]
                           + eg_params[i, 2] * g)
            if deco:
                innov, ok = phi_r_vector(z[t - 1])
            else:
                innov, ok = phi_r_pair(z[t - 1, 0], z[t - 1, 1])
            if not ok:
                innov = 0.0
            phi = corr_params[0] + corr_params[1] * phi + corr_params[2] * innov
        if deco:
            rho = rho_from_phi_equi(phi, n)
            a = math.sqrt(1.0 - rho)
            b = (math.sqrt(1.0 + (n - 1.0) * rho) - a) / n
            esum = 0.0
            for i in range(n):
                esum += eps[t, i]
            for i in range(n):
                z[t, i] = a * eps[t, i] + b * esum
        else:
            rho = math.tanh(phi)
            z[t, 0] = eps[t, 0]
            z[t, 1] = rho * eps[t, 0] + math.sqrt(1.0 - rho * rho) * eps[t, 1]
        phi_path[t] = phi
        rho_path[t] = rho
        for i in range(n):
            h[t, i] = math.exp(logh[i])
            r[t, i] = mus[i] + math.sqrt(h[t, i]) * z[t, i]
    return r, z, h, phi_path, rho_path
