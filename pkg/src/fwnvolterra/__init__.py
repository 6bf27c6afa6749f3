"""Fractional-white-noise driven Volterra equations.

Submodules
----------
fraccalc
    Sampled functions, fractional integrals and derivatives, Lambda_H norms.
fbm
    Exact fBm sampling with reproducible streams and Wiener integrals.
kernels
    Memory kernels, monotonicity and parabolicity checks, the index rho.
resolvent
    Scalar resolvents, fundamental solutions and their norm estimates.
spectral
    Spectral model, Monte Carlo solution, variance and series conditions.
"""

__version__ = "0.1.0"

from .errors import EmbeddingError, GridMismatchError, NumericalFailure
from .fbm import SeedSpec, sample_fbm, sample_noise_coefficients, wiener_integral
from .fraccalc import (SampledFunction, fractional_integral, hdot_norm, hdot_norm_spectral,
                       lambda_h_inner, lambda_h_norm, marchaud_derivative, time_reversal_shift,
                       zeta_constant)
from .kernels import KernelSpec, check_three_monotone, laplace_transform, rho
from .mittag_leffler import mittag_leffler
from .resolvent import (fundamental_solution, fundamental_solution_alpha2, resolvent_cq,
                        rn_hdot_norm, solve_scalar_resolvent, solve_volterra)
from .spectral import (FractionalDynamics, KernelDynamics, SpectralModel, simulate_solution,
                       variance_spectral)

__all__ = [
    "EmbeddingError", "GridMismatchError", "NumericalFailure",
    "SeedSpec", "sample_fbm", "sample_noise_coefficients", "wiener_integral",
    "SampledFunction", "fractional_integral", "hdot_norm", "hdot_norm_spectral", "lambda_h_inner",
    "lambda_h_norm", "marchaud_derivative", "time_reversal_shift", "zeta_constant",
    "KernelSpec", "check_three_monotone", "laplace_transform", "rho",
    "mittag_leffler",
    "fundamental_solution", "fundamental_solution_alpha2", "resolvent_cq", "rn_hdot_norm",
    "solve_scalar_resolvent", "solve_volterra",
    "FractionalDynamics", "KernelDynamics", "SpectralModel", "simulate_solution", "variance_spectral",
]
