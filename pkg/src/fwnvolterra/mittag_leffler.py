r"""Two-parameter Mittag-Leffler function on the negative real axis.

:math:`E_{a,b}(z) = \sum_k z^k / \Gamma(ak + b)` is summed directly for small
arguments.  Elsewhere it is obtained by numerical inversion of its Laplace
transform :math:`s^{a-b}/(s^a - z)` along an optimal parabolic contour, adding
the residues of the poles the contour leaves out (R. Garrappa, SIAM J. Numer.
Anal. 53 (2015); this is a port of the published algorithm restricted to
:math:`\gamma = 1`).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = ["mittag_leffler", "mittag_leffler_series"]

_LOG_EPS = math.log(np.finfo(float).eps)
_SERIES_ABS_Z = 10.0
_SERIES_GROWTH = 9.0


def mittag_leffler_series(a: float, b: float, z, terms: int | None = None):
    """Plain power series; accurate only while ``E_{a,|z|}`` is moderate."""
    z = np.asarray(z, dtype=float)
    az = np.abs(z)
    if terms is None:
        zmax = float(az.max()) if az.size else 0.0
        terms = 30
        # stop once |z|^k / Gamma(ak+b) is negligible for the largest argument
        while terms < 5000:
            if terms * math.log(max(zmax, 1e-300)) - special.gammaln(a * terms + b) < -40:
                break
            terms += 30
    k = np.arange(terms)
    rg = special.rgamma(a * k + b)
    out = np.zeros(z.shape)
    power = np.ones(z.shape)
    for kk in range(terms):
        out = out + power * rg[kk]
        power = power * z
    return out


def _optimal_param_rb(t, phi_j, phi_j1, pj, qj, log_epsilon):
    fac = 1.01
    f_max = math.exp(log_epsilon - _LOG_EPS)
    sq_j = math.sqrt(phi_j)
    threshold = 2 * math.sqrt((log_epsilon - _LOG_EPS) / t)
    sq_j1 = min(math.sqrt(phi_j1), threshold - sq_j)
    f_bar = 1.0
    adm = False
    if pj < 1e-14 and qj < 1e-14:
        sqb_j, sqb_j1 = sq_j, sq_j1
        adm = True
    elif pj < 1e-14:
        sqb_j = sq_j
        f_min = fac * (sq_j / (sq_j1 - sq_j)) ** qj if sq_j > 0 else fac
        if f_min < f_max:
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fq = f_bar ** (-1 / qj)
            sqb_j1 = (2 * sq_j1 - fq * sq_j) / (2 + fq)
            adm = True
    elif qj < 1e-14:
        sqb_j1 = sq_j1
        f_min = fac * (sq_j1 / (sq_j1 - sq_j)) ** pj
        if f_min < f_max:
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fp = f_bar ** (-1 / pj)
            sqb_j = (2 * sq_j + fp * sq_j1) / (2 - fp)
            adm = True
    else:
        f_min = fac * (sq_j + sq_j1) / (sq_j1 - sq_j) ** max(pj, qj)
        if f_min < f_max:
            f_min = max(f_min, 1.5)
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fp = f_bar ** (-1 / pj)
            fq = f_bar ** (-1 / qj)
            w = -phi_j1 * t / log_epsilon
            den = 2 + w - (1 + w) * fp + fq
            sqb_j = ((2 + w + fq) * sq_j + fp * sq_j1) / den
            sqb_j1 = (-(1 + w) * fq * sq_j + (2 + w - (1 + w) * fp) * sq_j1) / den
            adm = True
    if not adm:
        return 0.0, 0.0, math.inf
    log_epsilon = log_epsilon - math.log(f_bar)
    w = -sqb_j1**2 * t / log_epsilon
    mu = (((1 + w) * sqb_j + sqb_j1) / (2 + w)) ** 2
    h = -2 * math.pi / log_epsilon * (sqb_j1 - sqb_j) / ((1 + w) * sqb_j + sqb_j1)
    n = math.ceil(math.sqrt(1 - log_epsilon / t / mu) / h)
    return mu, h, n


def _optimal_param_ru(t, phi_j, pj, log_epsilon):
    sq_phi = math.sqrt(phi_j)
    phibar = phi_j * 1.01 if phi_j > 0 else 0.01
    sqb = math.sqrt(phibar)
    f_min, f_max, f_tar = 1.0, 10.0, 5.0
    while True:
        phi_t = phibar * t
        log_eps_phi_t = log_epsilon / phi_t
        n = math.ceil(phi_t / math.pi * (1 - 3 * log_eps_phi_t / 2 + math.sqrt(1 - 2 * log_eps_phi_t)))
        A = math.pi * n / phi_t
        sq_mu = sqb * abs(4 - A) / abs(7 - math.sqrt(1 + 12 * A))
        fbar = ((sqb - sq_phi) / sq_mu) ** (-pj)
        if pj < 1e-14 or f_min < fbar < f_max:
            break
        sqb = f_tar ** (-1 / pj) * sq_mu + sq_phi
        phibar = sqb**2
    mu = sq_mu**2
    h = (-3 * A - 2 + 2 * math.sqrt(1 + 12 * A)) / (4 - A) / n
    threshold = (log_epsilon - _LOG_EPS) / t
    if mu > threshold:
        q = 0.0 if abs(pj) < 1e-14 else f_tar ** (-1 / pj) * math.sqrt(mu)
        phibar = (q + math.sqrt(phi_j)) ** 2
        if phibar < threshold:
            w = math.sqrt(_LOG_EPS / (_LOG_EPS - log_epsilon))
            u = math.sqrt(-phibar * t / _LOG_EPS)
            mu = threshold
            n = math.ceil(w * log_epsilon / 2 / math.pi / (u * w - 1))
            h = math.sqrt(_LOG_EPS / (_LOG_EPS - log_epsilon)) / n
        else:
            n, h = math.inf, 0.0
    return mu, h, n


def _ml_contour(a: float, b: float, z: float) -> float:
    """Laplace-inversion evaluation of ``E_{a,b}(z)`` for one real ``z < 0``."""
    t = 1.0
    log_epsilon = math.log(1e-15)
    theta = math.pi  # arg z on the negative axis
    kmin = math.ceil(-a / 2 - theta / 2 / math.pi)
    kmax = math.floor(a / 2 - theta / 2 / math.pi)
    k = np.arange(kmin, kmax + 1)
    s_star = abs(z) ** (1 / a) * np.exp(1j * (theta + 2 * k * math.pi) / a)
    phi = (s_star.real + np.abs(s_star)) / 2
    order = np.argsort(phi, kind="stable")
    s_star, phi = s_star[order], phi[order]
    keep = phi > 1e-15
    s_star = np.concatenate(([0.0], s_star[keep]))
    phi = np.concatenate(([0.0], phi[keep]))
    j1 = s_star.size
    p = np.concatenate(([max(0.0, -2 * (a - b + 1))], np.ones(j1 - 1)))
    q = np.concatenate((np.ones(j1 - 1), [math.inf]))
    phi = np.concatenate((phi, [math.inf]))
    admissible = [i for i in range(j1)
                  if phi[i] < (log_epsilon - _LOG_EPS) / t and phi[i] < phi[i + 1]]
    while True:
        params = {}
        for i in admissible:
            if i < j1 - 1:
                params[i] = _optimal_param_rb(t, phi[i], phi[i + 1], p[i], q[i], log_epsilon)
            else:
                params[i] = _optimal_param_ru(t, phi[i], p[i], log_epsilon)
        best = min(admissible, key=lambda i: params[i][2])
        if params[best][2] > 200:
            log_epsilon += math.log(10)
        else:
            break
    mu, h, n = params[best]
    u = h * np.arange(-n, n + 1)
    zc = mu * (1j * u + 1) ** 2
    zd = -2 * mu * u + 2j * mu
    f = zc ** (a - b) / (zc**a - z) * zd
    integral = h * np.sum(np.exp(zc * t) * f) / (2j * math.pi)
    poles = s_star[best + 1:]
    residues = np.sum(poles ** (1 - b) * np.exp(t * poles)) / a if poles.size else 0.0
    return float((integral + residues).real)


def mittag_leffler(a: float, b: float, z):
    r"""Mittag-Leffler function :math:`E_{a,b}(z)` for real ``z <= 0``.

    Parameters
    ----------
    a, b : float
        Positive parameters.
    z : float or array_like
        Nonpositive arguments.
    """
    a = float(a)
    b = float(b)
    if not (a > 0 and b > 0):
        raise ValueError("Mittag-Leffler parameters must be positive")
    z = np.asarray(z, dtype=float)
    if np.any(z > 0) or np.any(~np.isfinite(z)):
        raise ValueError("only finite nonpositive arguments are supported")
    flat = z.ravel()
    out = np.empty(flat.shape)
    az = np.abs(flat)
    small = (az <= _SERIES_ABS_Z) & (az ** (1.0 / a) <= _SERIES_GROWTH)
    if np.any(small):
        out[small] = mittag_leffler_series(a, b, flat[small])
    for i in np.nonzero(~small)[0]:
        out[i] = _ml_contour(a, b, flat[i])
    out = out.reshape(z.shape)
    return out if out.ndim else float(out)
