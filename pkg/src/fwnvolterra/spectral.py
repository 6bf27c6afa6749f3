r"""Spectral Galerkin simulation of the stochastic Volterra equation.

The solution is represented through its modal coefficients

.. math:: X_n(t) = \sqrt{\gamma_n}\int_0^t s_n(t-\tau)\,d\beta_n(\tau), \qquad u(t) = \sum_n X_n(t) e_n,

where :math:`s_n` is the scalar resolvent of mode :math:`n` (or the fundamental
solution :math:`r_n` for the fractional-in-time problem) and :math:`\beta_n` are
independent fBm.  On a grid of step :math:`h` the response is piecewise constant
with the value :math:`s_n(t_j - t_i)` on the cell :math:`[t_i, t_{i+1})`, so the
Monte Carlo estimator and the deterministic Lambda_H-norm formula describe the
same Gaussian law exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .fbm import SeedSpec, sample_noise_coefficients
from .fraccalc import SampledFunction, check_hurst, lambda_h_norm, time_reversal_shift
from .kernels import KernelSpec, rho as kernel_rho
from .resolvent import _ml_fundamental, resolvent_cq, rn_hdot_norm, rn_window

__all__ = [
    "SpectralModel",
    "KernelDynamics",
    "FractionalDynamics",
    "SolutionEnsemble",
    "SeriesCondition",
    "check_hypothesis_e",
    "mode_responses",
    "variance_spectral",
    "increment_variance_spectral",
    "covariance_eigenvalues",
    "simulate_solution",
    "evaluate_field",
    "deterministic_part",
    "structure_function_time",
    "structure_function_space",
    "series_condition",
    "regularity_conditions",
    "theorem42_example_conditions",
    "sigma_conditions",
    "alpha2_local_condition",
]

_SQRT_2_PI = math.sqrt(2.0 / math.pi)


# ---------------------------------------------------------------------------
# Model and dynamics
# ---------------------------------------------------------------------------

def _sine(n, xi):
    return _SQRT_2_PI * np.sin(n * xi)


def _sine_grad(n, xi):
    return _SQRT_2_PI * n * np.cos(n * xi)


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Eigenvalues ``mu``, noise weights ``gamma`` and eigenfunctions of the spatial operator.

    Attributes
    ----------
    mu, gamma : ndarray
        Mode ``n`` (1-based) is stored at index ``n - 1``.
    eigenfunction, gradient : callable
        ``f(n, xi)`` with integer array ``n`` broadcast against ``xi``.
    domain : tuple
        Interval ``G``.
    m, l : float or None
        Exponents of the power-law example (``mu_k = k^(2m)``, ``gamma_k = k^-l``).
    """

    mu: np.ndarray
    gamma: np.ndarray
    eigenfunction: Callable = field(default=_sine)
    gradient: Callable | None = field(default=_sine_grad)
    domain: tuple[float, float] = (0.0, math.pi)
    m: float | None = None
    l: float | None = None

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        gamma = np.array(self.gamma, dtype=float)
        if mu.shape != gamma.shape or mu.ndim != 1 or mu.size == 0:
            raise ValueError("mu and gamma must be 1-d arrays of equal length")
        if np.any(mu <= 0) or np.any(np.diff(mu) < 0):
            raise ValueError("eigenvalues must be positive and nondecreasing")
        if np.any(gamma < 0) or not np.all(np.isfinite(gamma)):
            raise ValueError("noise weights must be finite and nonnegative")
        for a in (mu, gamma):
            a.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def example(cls, m: int, l: float, N: int) -> "SpectralModel":
        """Sine eigenfunctions on ``(0, pi)`` with ``mu_k = k^(2m)`` and ``gamma_k = k^-l``."""
        if int(m) != m or m < 1:
            raise ValueError("m must be a positive integer")
        if not l > 1:
            raise ValueError("l must exceed 1 for a trace-class covariance")
        if N < 1:
            raise ValueError("N must be positive")
        k = np.arange(1, N + 1, dtype=float)
        return cls(k ** (2 * m), k ** (-float(l)), m=int(m), l=float(l))

    @property
    def N(self) -> int:
        return self.mu.size

    @property
    def is_example(self) -> bool:
        return self.m is not None and self.l is not None

    def truncated(self, N: int) -> "SpectralModel":
        if N > self.N:
            raise ValueError(f"model has only {self.N} modes")
        return SpectralModel(self.mu[:N], self.gamma[:N], self.eigenfunction, self.gradient,
                             self.domain, self.m, self.l)

    def eval(self, xi) -> np.ndarray:
        """Matrix ``E[n - 1, p] = e_n(xi_p)``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        lo, hi = self.domain
        if np.any(xi < lo) or np.any(xi > hi):
            raise ValueError(f"points must lie in the closed domain [{lo}, {hi}]")
        n = np.arange(1, self.N + 1)[:, None]
        return self.eigenfunction(n, xi[None, :])

    def eval_gradient(self, xi) -> np.ndarray:
        if self.gradient is None:
            raise ValueError("model has no gradient evaluator")
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        n = np.arange(1, self.N + 1)[:, None]
        return self.gradient(n, xi[None, :])

    def to_config(self) -> dict:
        if self.is_example:
            return {"family": "example", "m": self.m, "l": self.l, "N": self.N}
        return {"family": "tabulated", "mu": self.mu.tolist(), "gamma": self.gamma.tolist()}


@dataclass(frozen=True)
class KernelDynamics:
    """Modes follow the resolvent of a memory kernel."""

    kernel: KernelSpec

    def rho(self) -> float:
        return kernel_rho(self.kernel).rho

    def to_config(self) -> dict:
        return {"type": "kernel", "kernel": self.kernel.to_config()}


@dataclass(frozen=True)
class FractionalDynamics:
    """Modes follow the fundamental solution ``t^(beta-1) E_{alpha,beta}(-mu t^alpha)``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def rho(self) -> float:
        return kernel_rho(KernelSpec.riemann_liouville(self.alpha)).rho

    def to_config(self) -> dict:
        return {"type": "fractional", "alpha": self.alpha, "beta": self.beta}


Dynamics = KernelDynamics | FractionalDynamics


def check_hypothesis_e(model: SpectralModel, xi_grid: Sequence[float], N: int | None = None,
                       growth_tol: float = 0.05) -> dict:
    r"""Check :math:`\sup|e_n| \le C` and :math:`\sup|\nabla e_n| \le C\mu_n^{1/2}` with one constant.

    The per-mode constant :math:`c_n = \max(\sup|e_n|, \sup|\nabla e_n|/\sqrt{\mu_n})`
    is computed on ``xi_grid``; the hypothesis is accepted when :math:`c_n` shows
    no growth in :math:`n` (log-log slope over the upper half of the modes at most
    ``growth_tol``).  ``C`` is the fitted constant :math:`\max_n c_n`.
    """
    mdl = model if N is None else model.truncated(N)
    xi = np.asarray(xi_grid, dtype=float)
    e = np.abs(mdl.eval(xi)).max(axis=1)
    g = np.abs(mdl.eval_gradient(xi)).max(axis=1) / np.sqrt(mdl.mu)
    c = np.maximum(e, g)
    n = np.arange(1, mdl.N + 1)
    half = n >= max(1, mdl.N // 2)
    slope = float(np.polyfit(np.log(n[half]), np.log(c[half]), 1)[0]) if half.sum() >= 2 else 0.0
    return {"passed": bool(slope <= growth_tol), "C": float(c.max()), "growth_slope": slope,
            "per_mode": c.tolist()}


# ---------------------------------------------------------------------------
# Mode responses and deterministic moments
# ---------------------------------------------------------------------------

def _resolvent_nodes(kernel: KernelSpec, mu: float, step: float, n_steps: int,
                     per_scale: int = 80, max_nodes: int = 2**20) -> np.ndarray:
    """``s(t_j)`` for ``j = 0..n_steps`` from a convolution-quadrature solve on a refined step.

    The step is refined to ``per_scale`` points per time scale ``mu^(-1/rho)``,
    up to ``max_nodes`` nodes in total; the scheme is stable beyond that cap.
    """
    try:
        rho_value = kernel_rho(kernel).rho
    except ValueError:
        rho_value = 2.0
    scale = mu ** (-1.0 / rho_value)
    q = max(1, int(math.ceil(step / (scale / per_scale))))
    q = min(q, max(1, max_nodes // n_steps))
    sol = resolvent_cq(kernel, mu, step / q, n_steps * step)
    return sol.values[::q][: n_steps + 1]


def mode_responses(model: SpectralModel, dynamics: Dynamics, step: float, n_steps: int,
                   N: int | None = None) -> np.ndarray:
    """Response of each mode at ``t_1..t_{n_steps}``; array of shape ``(N, n_steps)``.

    Column ``j - 1`` holds ``s_n(t_j)`` (or ``r_n(t_j)``).  The value at ``t = 0`` is
    never needed because cells take right-endpoint values.
    """
    N = model.N if N is None else N
    out = np.empty((N, n_steps))
    t = step * np.arange(1, n_steps + 1)
    for i in range(N):
        mu = float(model.mu[i])
        if isinstance(dynamics, KernelDynamics):
            out[i] = _resolvent_nodes(dynamics.kernel, mu, step, n_steps)[1:]
        else:
            out[i] = _ml_fundamental(dynamics.alpha, dynamics.beta, mu, t)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite mode response")
    return out


def _shifted(resp_row: np.ndarray, step: float, j: int) -> SampledFunction:
    """The integrand ``s^<t_j>`` on ``[0, t_j)``: cell ``i`` carries ``s(t_j - t_i)``."""
    f = SampledFunction(step, 0.0, resp_row[:j])
    return time_reversal_shift(f, j * step)


def _time_index(t: float, step: float) -> int:
    j = int(round(t / step))
    if j < 0 or abs(j * step - t) > 1e-9 * max(1.0, t):
        raise ValueError(f"time {t} is not on the grid of step {step}")
    return j


def _power_tail(n: np.ndarray, terms: np.ndarray) -> tuple[float, float]:
    """Integral-test tail ``sum_{k > N}`` from a power-law fit over the last decade of terms."""
    N = int(n[-1])
    sel = (n >= max(1, N // 10)) & (terms > 0)
    if sel.sum() < 3:
        return 0.0, 0.0
    slope, icpt = np.polyfit(np.log(n[sel]), np.log(terms[sel]), 1)
    q = -slope
    if q <= 1:
        return math.inf, q
    C = math.exp(icpt)
    return float(C * N ** (1 - q) / (q - 1)), float(q)


def variance_spectral(model: SpectralModel, dynamics: Dynamics, t: float, H: float,
                      step: float, N: int | None = None, responses: np.ndarray | None = None) -> dict:
    r""":math:`E|u(t)|^2 = \sum_{n\le N}\gamma_n\|s_n^{\langle t\rangle}\|^2_{\Lambda_H}` with a tail estimate."""
    H = check_hurst(H)
    N = model.N if N is None else N
    j = _time_index(t, step)
    if responses is None:
        responses = mode_responses(model, dynamics, step, max(j, 1), N)
    terms = np.zeros(N)
    if j > 0:
        for i in range(N):
            if model.gamma[i] > 0:
                norm = lambda_h_norm(_shifted(responses[i], step, j), H)
                if not math.isfinite(norm):
                    raise FloatingPointError(f"non-finite norm for mode {i + 1}")
                terms[i] = model.gamma[i] * norm**2
    tail, _ = _power_tail(np.arange(1, N + 1), terms) if j > 0 else (0.0, 0.0)
    return {"t": float(t), "H": H, "N": N, "variance": float(terms.sum()),
            "per_mode": terms.tolist(), "tail_estimate": tail}


def increment_variance_spectral(model: SpectralModel, dynamics: Dynamics, t: float, x: float,
                                H: float, step: float, N: int | None = None,
                                responses: np.ndarray | None = None) -> float:
    r""":math:`E|u(t)-u(x)|^2 = \sum_n\gamma_n\|s_n^{\langle t\rangle}-s_n^{\langle x\rangle}\|^2_{\Lambda_H}`."""
    N = model.N if N is None else N
    jt, jx = _time_index(t, step), _time_index(x, step)
    if responses is None:
        responses = mode_responses(model, dynamics, step, max(jt, jx, 1), N)
    total = 0.0
    for i in range(N):
        if model.gamma[i] == 0 or jt == jx:
            continue
        a = _shifted(responses[i], step, jt)
        b = _shifted(responses[i], step, jx) if jx > 0 else SampledFunction(step, 0.0, np.zeros(1))
        total += model.gamma[i] * lambda_h_norm(a - b, H) ** 2
    return float(total)


def covariance_eigenvalues(model: SpectralModel, dynamics: Dynamics, t: float, H: float,
                           step: float, N: int | None = None,
                           responses: np.ndarray | None = None) -> dict:
    r"""Eigenvalues :math:`\gamma_n\|s_n^{\langle t\rangle}\|^2_{\Lambda_H}` of :math:`Q_t`, the trace, and the bound ratio.

    ``ratio`` is :math:`\mathrm{Tr}[Q_t] / \sum_{n\le N}\gamma_n\mu_n^{-2H/\rho}`.
    """
    v = variance_spectral(model, dynamics, t, H, step, N, responses)
    N = v["N"]
    rho_value = dynamics.rho()
    ref = float(np.sum(model.gamma[:N] * model.mu[:N] ** (-2 * H / rho_value)))
    return {"t": float(t), "eigenvalues": v["per_mode"], "trace": v["variance"],
            "trace_bound_series": ref, "ratio": v["variance"] / ref if ref > 0 else math.nan,
            "rho": rho_value}


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SolutionEnsemble:
    """Modal coefficients ``X[n - 1, k, j] = X_n^{(k)}(t_j)`` of the truncated solution."""

    coefficients: np.ndarray
    step: float
    H: float
    model: SpectralModel
    dynamics: Dynamics
    master_seed: int
    responses: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.step * np.arange(self.coefficients.shape[2])

    @property
    def n_modes(self) -> int:
        return self.coefficients.shape[0]

    @property
    def replicates(self) -> int:
        return self.coefficients.shape[1]

    def energy(self, j: int) -> np.ndarray:
        """``|u(t_j)|^2`` per replicate (Parseval)."""
        x = self.coefficients[:, :, j]
        return np.sum(x * x, axis=0)

    def metadata(self) -> dict:
        return {"N": self.n_modes, "M": self.replicates, "step": self.step, "H": self.H,
                "steps": self.coefficients.shape[2] - 1, "model": self.model.to_config(),
                "dynamics": self.dynamics.to_config(), "seed": self.master_seed}


def _causal_convolution(resp: np.ndarray, incr: np.ndarray, method: str) -> np.ndarray:
    """``X[:, j] = sum_{i<j} resp[j - i - 1] * incr[:, i]`` for ``j = 0..n``."""
    M, n = incr.shape
    out = np.zeros((M, n + 1))
    if method == "fft":
        out[:, 1:] = fftconvolve(incr, resp[None, :], axes=1)[:, :n]
    else:
        for j in range(1, n + 1):
            out[:, j] = incr[:, :j] @ resp[j - 1::-1]
    return out


def simulate_solution(model: SpectralModel, dynamics: Dynamics, H: float, horizon: float,
                      step: float, N: int, M: int, seed, workers: int = 1,
                      method: str = "fft", max_elements: int = 200_000_000) -> SolutionEnsemble:
    """Monte Carlo ensemble of the first ``N`` modal coefficients.

    Mode ``n`` uses noise stream ``(n, k)`` for replicate ``k``; the per-mode
    response is computed once and shared.  Output is identical for any
    ``workers``.
    """
    H = check_hurst(H)
    n_steps = _time_index(horizon, step)
    if n_steps < 1:
        raise ValueError("horizon must span at least one step")
    if N > model.N:
        raise ValueError(f"model has only {model.N} modes")
    if N * M * (n_steps + 1) > max_elements:
        raise MemoryError(f"ensemble of {N}x{M}x{n_steps + 1} exceeds the limit of {max_elements} values")
    seed = seed if isinstance(seed, SeedSpec) else SeedSpec(seed)
    resp = mode_responses(model, dynamics, step, n_steps, N)
    resp.setflags(write=False)
    noise = sample_noise_coefficients(model.gamma, N, H, n_steps, step, M, seed, workers)
    coeffs = np.zeros((N, M, n_steps + 1))

    def one(i):
        if model.gamma[i] > 0:
            coeffs[i] = _causal_convolution(resp[i], np.diff(noise[i], axis=1), method)

    if workers <= 1:
        for i in range(N):
            one(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(N)))
    return SolutionEnsemble(coeffs, float(step), H, model, dynamics, seed.master_seed, resp)


def evaluate_field(ensemble: SolutionEnsemble, xi_points, time_indices=None) -> np.ndarray:
    """``u(t, xi) = sum_n X_n(t) e_n(xi)`` as an array over ``(t, xi, replicate)``."""
    E = ensemble.model.truncated(ensemble.n_modes).eval(xi_points)
    X = ensemble.coefficients
    if time_indices is not None:
        X = X[:, :, np.atleast_1d(time_indices)]
    return np.einsum("nkt,np->tpk", X, E)


def deterministic_part(model: SpectralModel, kernel: KernelSpec, u0_coefficients, t: float,
                       steps: int = 2000) -> np.ndarray:
    """Modal values ``s_n(t) (u0|e_n)`` of the homogeneous solution."""
    u0 = np.asarray(u0_coefficients, dtype=float)
    if u0.size > model.N:
        raise ValueError("more initial coefficients than modes")
    out = np.zeros(u0.size)
    if t == 0:
        return u0.copy()
    if t < 0:
        raise ValueError("t must be nonnegative")
    for i, c in enumerate(u0):
        if c != 0:
            out[i] = c * _resolvent_nodes(kernel, float(model.mu[i]), t / steps, steps)[-1]
    return out


def _wls_slope(x: np.ndarray, y: np.ndarray, se: np.ndarray) -> float:
    """Weighted least-squares slope of ``log y`` on ``log x``; weights from the delta method."""
    ok = (y > 0) & np.isfinite(y)
    if ok.sum() < 2:
        return math.nan
    lx, ly = np.log(x[ok]), np.log(y[ok])
    rel = np.where(se[ok] > 0, se[ok] / y[ok], 0.0)
    w = np.where(rel > 0, 1.0 / np.maximum(rel, 1e-12) ** 2, 1.0)
    if np.all(rel == 0):
        w = np.ones_like(lx)
    return float(np.polyfit(lx, ly, 1, w=np.sqrt(w))[0])


def structure_function_time(ensemble: SolutionEnsemble, lags: Sequence[int] | None = None,
                            deterministic: bool = False) -> dict:
    r"""Temporal structure function :math:`E|u(t+\ell h)-u(t)|^2` and its log-log slope.

    Base times range over :math:`[T/4, 3T/4]`; lags are in grid steps, at least
    4, and default to one decade ``4..40`` (as far as the grid allows).  With
    ``deterministic=True`` the exact series at the window midpoint is reported
    next to each Monte Carlo value.
    """
    X = ensemble.coefficients
    n_steps = X.shape[2] - 1
    lo, hi = n_steps // 4, (3 * n_steps) // 4
    if lags is None:
        top = min(40, n_steps - hi)
        lags = np.unique(np.round(np.geomspace(4, max(top, 5), 8)).astype(int))
    lags = np.asarray(lags, dtype=int)
    if lags.size < 2 or np.any(lags < 4):
        raise ValueError("need at least two lags, each of at least 4 grid steps")
    if hi + lags.max() > n_steps:
        raise ValueError("largest lag runs past the horizon")
    base = np.arange(lo, hi + 1)
    rows = []
    means, ses = [], []
    for lag in lags:
        d = X[:, :, base + lag] - X[:, :, base]
        per_rep = np.sum(d * d, axis=0).mean(axis=1)
        mean = float(per_rep.mean())
        se = float(per_rep.std(ddof=1) / math.sqrt(per_rep.size)) if per_rep.size > 1 else 0.0
        row = {"lag": float(lag * ensemble.step), "value": mean, "stderr": se}
        if deterministic:
            mid = (lo + hi) // 2
            row["deterministic"] = increment_variance_spectral(
                ensemble.model, ensemble.dynamics, (mid + lag) * ensemble.step, mid * ensemble.step,
                ensemble.H, ensemble.step, ensemble.n_modes, ensemble.responses)
        rows.append(row)
        means.append(mean)
        ses.append(se)
    slope = _wls_slope(lags * ensemble.step, np.array(means), np.array(ses))
    return {"rows": rows, "slope": slope}


def structure_function_space(ensemble: SolutionEnsemble, xi_pairs: Sequence[tuple[float, float]],
                             time_index: int | None = None) -> dict:
    r"""Spatial structure function :math:`E|u(t,\xi)-u(t,\eta)|^2`, Monte Carlo and exact series.

    The exact value is :math:`\sum_n\gamma_n\|s_n^{\langle t\rangle}\|^2_{\Lambda_H}|e_n(\xi)-e_n(\eta)|^2`.
    The slope is fitted against :math:`|\xi-\eta|` after averaging pairs with equal separation.
    """
    j = ensemble.coefficients.shape[2] - 1 if time_index is None else int(time_index)
    pairs = np.asarray(xi_pairs, dtype=float).reshape(-1, 2)
    mdl = ensemble.model.truncated(ensemble.n_modes)
    diff_e = mdl.eval(pairs[:, 0]) - mdl.eval(pairs[:, 1])  # (N, P)
    X = ensemble.coefficients[:, :, j]  # (N, M)
    incr = X.T @ diff_e  # (M, P)
    mc = (incr**2).mean(axis=0)
    se = (incr**2).std(axis=0, ddof=1) / math.sqrt(incr.shape[0])
    t = j * ensemble.step
    if j > 0:
        norms = np.array([lambda_h_norm(_shifted(ensemble.responses[i], ensemble.step, j), ensemble.H) ** 2
                          for i in range(mdl.N)])
    else:
        norms = np.zeros(mdl.N)
    exact = (mdl.gamma * norms) @ diff_e**2
    sep = np.round(np.abs(pairs[:, 0] - pairs[:, 1]), 12)
    rows = [{"xi": float(a), "eta": float(b), "separation": float(s), "value": float(v),
             "stderr": float(e), "deterministic": float(x)}
            for (a, b), s, v, e, x in zip(pairs, sep, mc, se, exact)]
    uniq = np.unique(sep[sep > 0])
    slope = math.nan
    if uniq.size >= 2:
        agg = np.array([mc[sep == s].mean() for s in uniq])
        agg_se = np.array([math.sqrt(np.sum(se[sep == s] ** 2)) / np.sum(sep == s) for s in uniq])
        slope = _wls_slope(uniq, agg, agg_se)
    return {"t": t, "rows": rows, "slope": slope}


# ---------------------------------------------------------------------------
# Series conditions
# ---------------------------------------------------------------------------

@dataclass
class SeriesCondition:
    """Verdict on :math:`\\sum_n \\gamma_n \\mu_n^{p}`."""

    expression: str
    exponent: float
    convergent: bool
    partial_sum: float
    tail_bracket: tuple[float, float]
    analytic_exponent: float | None = None

    def to_dict(self) -> dict:
        return {"expression": self.expression, "exponent": self.exponent,
                "verdict": "convergent" if self.convergent else "divergent",
                "partial_sum": self.partial_sum, "tail_bracket": list(self.tail_bracket),
                "analytic_exponent": self.analytic_exponent}


def series_condition(model: SpectralModel, exponent: float, expression: str = "",
                     N: int | None = None) -> SeriesCondition:
    r"""Convergence of :math:`\sum_n\gamma_n\mu_n^{p}`, ``p = exponent``.

    For the power-law example the verdict is the p-series test on
    :math:`l - 2mp > 1` (reported as ``analytic_exponent = l - 2mp``).  Otherwise a
    power law is fitted to the last decade of terms and the integral test gives
    a bracket for the tail; the verdict is convergent only if it is finite.
    """
    mdl = model if N is None else model.truncated(N)
    n = np.arange(1, mdl.N + 1, dtype=float)
    terms = mdl.gamma * mdl.mu ** float(exponent)
    partial = float(terms.sum())
    expr = expression or f"sum gamma_n mu_n^({exponent:g})"
    if not np.any(terms > 0):
        return SeriesCondition(expr, exponent, True, 0.0, (0.0, 0.0), None)
    if mdl.is_example:
        q = mdl.l - 2 * mdl.m * exponent
        if q > 1:
            N_ = mdl.N
            bracket = ((N_ + 1) ** (1 - q) / (q - 1), N_ ** (1 - q) / (q - 1))
        else:
            bracket = (math.inf, math.inf)
        return SeriesCondition(expr, exponent, bool(q > 1), partial, bracket, float(q))
    upper, q = _power_tail(n, terms)
    if math.isfinite(upper):
        N_ = mdl.N
        lower = upper * ((N_ + 1) / N_) ** (1 - q)
        return SeriesCondition(expr, exponent, True, partial, (lower, upper), None)
    return SeriesCondition(expr, exponent, False, partial, (math.inf, math.inf), None)


def regularity_conditions(model: SpectralModel, rho_value: float, H: float, theta: float) -> dict:
    """Existence, temporal and spatial series conditions for the kernel problem."""
    H = check_hurst(H)
    e1 = -2 * H / rho_value
    e2 = 2 * H * (theta - 1) / rho_value
    e3 = theta - 2 * H / rho_value
    return {
        "existence": series_condition(model, e1, "sum gamma_n mu_n^(-2H/rho)").to_dict(),
        "time_holder": series_condition(model, e2, "sum gamma_n mu_n^(2H(theta-1)/rho)").to_dict(),
        "space_holder": series_condition(model, e3, "sum gamma_n mu_n^(theta-2H/rho)").to_dict(),
    }


def _example_bounds(l, m, alpha, H, theta):
    c = alpha * (l - 1) / (4 * m)
    return (1 - H - c, 1 - H + theta - c, 1 - H + alpha * theta / 2 - c)


def _validate_example(l, m, alpha, H, theta):
    if not l > 1:
        raise ValueError("l must exceed 1")
    if m < 1:
        raise ValueError("m must be at least 1")
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    check_hurst(H)


def theorem42_example_conditions(l: float, m: int, alpha: float, beta: float, H: float,
                                 theta: float, N: int = 1000) -> dict:
    """The three closed-form inequalities of the power-law example, cross-checked by the series test."""
    _validate_example(l, m, alpha, H, theta)
    b1, b2, b3 = _example_bounds(l, m, alpha, H, theta)
    closed = {"existence": beta > b1, "time_holder": beta > b2, "space_holder": beta > b3}
    model = SpectralModel.example(m, l, N)
    exps = {"existence": 2 * (1 - beta - H) / alpha,
            "time_holder": 2 * (1 - beta + theta - H) / alpha,
            "space_holder": (2 * (1 - beta - H) + alpha * theta) / alpha}
    series = {k: series_condition(model, e).convergent for k, e in exps.items()}
    lo, hi = 1 - H + theta, 1 - H + alpha
    return {"existence": bool(closed["existence"]), "time_holder": bool(closed["time_holder"]),
            "space_holder": bool(closed["space_holder"]),
            "bounds": {"existence": b1, "time_holder": b2, "space_holder": b3},
            "series_agree": all(series[k] == closed[k] for k in closed),
            "in_window": bool(lo < beta < hi), "window": [lo, hi]}


def sigma_conditions(model: SpectralModel, alpha: float, beta: float, H: float, theta: float,
                     N: int | None = None) -> dict:
    r"""Partial sums and verdicts of :math:`\sigma_1, \sigma_2, \sigma_3` from exact per-mode norms.

    A non-finite per-mode norm makes the verdict divergent.  Otherwise the tail
    is bracketed by the integral test, using the exact power law in
    :math:`\mu_n` of the norms and, for tabulated models, a power-law fit in ``n``.
    """
    mdl = model if N is None else model.truncated(N)
    H = check_hurst(H)
    n1 = np.array([rn_hdot_norm(alpha, beta, m, H, 0.0) for m in mdl.mu])
    n2 = np.array([rn_hdot_norm(alpha, beta, m, H, theta) for m in mdl.mu])
    g, mu = mdl.gamma, mdl.mu
    e1 = 2 * (1 - beta - H) / alpha
    e2 = 2 * (1 - beta + theta - H) / alpha
    out = {}
    specs = {
        "sigma1": (lambda: g * n1, [e1]),
        "sigma2": (lambda: g * (np.sqrt(n1) + np.sqrt(n2)) ** 2, [e1, e2]),
        "sigma3": (lambda: g * mu**theta * n1, [e1 + theta]),
    }
    for name, (terms_fn, exps) in specs.items():
        finite = bool(np.all(np.isfinite(n1)) and (name != "sigma2" or np.all(np.isfinite(n2))))
        if not finite:
            out[name] = {"partial_sum": math.inf, "convergent": False, "reason": "non-finite term"}
            continue
        terms = terms_fn()
        conds = [series_condition(mdl, e) for e in exps]
        conv = all(c.convergent for c in conds)
        out[name] = {"partial_sum": float(terms.sum()), "convergent": conv,
                     "tail_exponents": [c.analytic_exponent for c in conds]}
    out["window"] = list(rn_window(alpha, H, 0.0))
    return out


def alpha2_local_condition(model: SpectralModel, beta: float, form: str = "squared") -> dict:
    r"""Local existence for :math:`\alpha = 2`.

    ``form="squared"`` tests :math:`\sum\gamma_n\mu_n^{1-\beta}`, the series of
    squared norm bounds :math:`|r_n|^2 \le c_T\mu_n^{1-\beta}` (power-law example:
    :math:`l + 2m(\beta-1) > 1`).  ``form="unsquared"`` tests
    :math:`\sum\gamma_n\mu_n^{(1-\beta)/2}`, the series of the unsquared norm bounds.
    Neither is the limit of the :math:`\alpha<2` existence condition.
    """
    if not 0.5 < beta < 3:
        raise ValueError("beta must lie in (1/2, 3)")
    if form == "squared":
        exponent = 1.0 - beta
    elif form == "unsquared":
        exponent = (1.0 - beta) / 2
    else:
        raise ValueError(f"unknown form {form!r}")
    cond = series_condition(model, exponent, f"sum gamma_n mu_n^({exponent:g})")
    return {"beta": beta, "form": form, "convergent": cond.convergent, "condition": cond.to_dict(),
            "note": "not the limiting case of the alpha < 2 existence condition"}
