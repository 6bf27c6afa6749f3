r"""Convolution kernels of the Volterra equation.

Three closed-form families are shipped, each optionally multiplied by an
amplitude :math:`A > 0`:

* ``exponential``        :math:`b(t) = A e^{-\eta t}`
* ``tempered``           :math:`b(t) = A t^{\alpha-1} e^{-\eta t} / \Gamma(\alpha)`
* ``riemann-liouville``  :math:`g_\kappa(t) = A t^{\kappa-1} / \Gamma(\kappa)` (``alpha`` holds :math:`\kappa`)

The exponential family is the tempered family with :math:`\alpha = 1`, and
:math:`g_\kappa` is the tempered family with :math:`\eta = 0`, which lets all
antiderivatives share one formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

__all__ = [
    "KernelSpec",
    "MonotonicityReport",
    "ParabolicityReport",
    "RhoReport",
    "evaluate_kernel",
    "kernel_derivative",
    "check_three_monotone",
    "check_parabolicity_limit",
    "laplace_transform",
    "laplace_transform_numeric",
    "rho",
    "rho_numeric",
]

_FAMILY_ALIASES = {
    "exponential": "exponential",
    "exp": "exponential",
    "tempered": "tempered",
    "tempered-fractional": "tempered",
    "riemann-liouville": "riemann-liouville",
    "rl": "riemann-liouville",
    "g": "riemann-liouville",
}


@dataclass(frozen=True)
class KernelSpec:
    """A kernel ``b`` from one of the closed-form families.

    Attributes
    ----------
    family : str
        ``"exponential"``, ``"tempered"`` or ``"riemann-liouville"``.
    alpha : float
        Power exponent (``kappa`` for the Riemann-Liouville family); ignored
        for the exponential family.
    eta : float
        Exponential decay rate, ``eta >= 0``; ignored for Riemann-Liouville.
    amplitude : float
        Constant positive multiplier.
    """

    family: str
    alpha: float = 1.0
    eta: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        fam = _FAMILY_ALIASES.get(str(self.family).lower())
        if fam is None:
            raise ValueError(f"unknown kernel family {self.family!r}")
        object.__setattr__(self, "family", fam)
        alpha = 1.0 if fam == "exponential" else float(self.alpha)
        eta = 0.0 if fam == "riemann-liouville" else float(self.eta)
        if not (alpha > 0 and math.isfinite(alpha)):
            raise ValueError(f"kernel exponent must be positive, got {self.alpha}")
        if not (eta >= 0 and math.isfinite(eta)):
            raise ValueError(f"decay rate must be nonnegative, got {self.eta}")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "amplitude", float(self.amplitude))

    # -- constructors ---------------------------------------------------
    @classmethod
    def exponential(cls, eta: float = 1.0) -> "KernelSpec":
        return cls("exponential", 1.0, eta)

    @classmethod
    def tempered(cls, alpha: float, eta: float = 1.0) -> "KernelSpec":
        return cls("tempered", alpha, eta)

    @classmethod
    def riemann_liouville(cls, kappa: float) -> "KernelSpec":
        return cls("riemann-liouville", kappa, 0.0)

    @classmethod
    def from_config(cls, cfg: dict) -> "KernelSpec":
        alpha = cfg.get("alpha", cfg.get("kappa", 1.0))
        return cls(cfg["family"], alpha, cfg.get("eta", 0.0), cfg.get("amplitude", 1.0))

    def to_config(self) -> dict:
        return {"family": self.family, "alpha": self.alpha, "eta": self.eta,
                "amplitude": self.amplitude}

    # -- properties -----------------------------------------------------
    @property
    def integrable(self) -> bool:
        """Whether ``b`` is in L1(R+); ``g_kappa`` only has subexponential growth."""
        return self.eta > 0

    def time_scaled(self, c: float) -> "KernelSpec":
        """The kernel ``t -> b(c t)``."""
        c = float(c)
        if not c > 0:
            raise ValueError("scale must be positive")
        return KernelSpec(self.family, self.alpha, self.eta * c,
                          self.amplitude * c ** (self.alpha - 1.0))

    # -- evaluation -----------------------------------------------------
    def __call__(self, t):
        return evaluate_kernel(self, t)

    def derivative(self, t, order: int = 1):
        return kernel_derivative(self, t, order)

    def antiderivative(self, t, order: int = 1):
        r"""``order``-fold integral from 0, :math:`(g_n * b)(t)`; zero for ``t <= 0``."""
        order = int(order)
        if order < 1:
            raise ValueError("order must be at least 1")
        t = np.asarray(t, dtype=float)
        tp = np.maximum(t, 0.0)
        a, eta = self.alpha, self.eta
        if eta == 0.0:
            out = tp ** (a + order - 1) / special.gamma(a + order)
        else:
            out = np.zeros_like(tp)
            for j in range(order):
                coef = special.binom(order - 1, j) * (-1) ** j * special.poch(a, j) * eta ** (-a - j)
                out = out + coef * tp ** (order - 1 - j) * special.gammainc(a + j, eta * tp)
            out = out / math.factorial(order - 1)
        out = self.amplitude * np.where(t > 0, out, 0.0)
        return out if out.ndim else float(out)

    def laplace(self, lam):
        return laplace_transform(self, lam)


def _positive_times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("kernels are evaluated at t > 0 only")
    return t


def evaluate_kernel(k: KernelSpec, t):
    """``b(t)`` for ``t > 0``."""
    t = _positive_times(t)
    out = k.amplitude * t ** (k.alpha - 1.0) * np.exp(-k.eta * t) / special.gamma(k.alpha)
    return out if out.ndim else float(out)


def kernel_derivative(k: KernelSpec, t, order: int = 1):
    """Analytic derivative of order 1, 2 or 3 (any nonnegative order is accepted)."""
    order = int(order)
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    t = _positive_times(t)
    a, eta = k.alpha, k.eta
    total = np.zeros_like(t)
    # Leibniz rule on t^(a-1) * exp(-eta t)
    for j in range(order + 1):
        falling = float(np.prod([a - 1.0 - i for i in range(j)]))
        if falling == 0.0:
            continue
        total = total + special.binom(order, j) * falling * t ** (a - 1.0 - j) * (-eta) ** (order - j)
    out = k.amplitude * total * np.exp(-eta * t) / special.gamma(a)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Hypothesis checks
# ---------------------------------------------------------------------------

@dataclass
class MonotonicityReport:
    """Outcome of the discrete 3-monotonicity check; ``violations`` lists ``(t, condition)``."""

    passed: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "violations": [{"t": float(t), "condition": c} for t, c in self.violations]}


def _shape_violations(t: np.ndarray, v: np.ndarray, name: str, noise: float = 0.0) -> list:
    """``noise`` is an absolute error level of ``v`` (nonzero for divided differences)."""
    out = []
    scale = np.abs(v).max() if v.size else 0.0
    tol0 = max(64 * np.finfo(float).eps * scale, 4 * noise)
    for i in np.nonzero(v < -tol0)[0]:
        out.append((t[i], f"{name} negative"))
    dt = np.diff(t)
    dv = np.diff(v)
    for i in np.nonzero(dv > tol0)[0]:
        out.append((t[i + 1], f"{name} increasing"))
    slope = dv / dt
    mag = np.maximum(np.abs(v[:-2]), np.maximum(np.abs(v[1:-1]), np.abs(v[2:])))
    tol2 = (256 * np.finfo(float).eps * mag + 8 * noise) / np.minimum(dt[:-1], dt[1:])
    for i in np.nonzero(np.diff(slope) < -tol2)[0]:
        out.append((t[i + 1], f"{name} not convex"))
    return out


def check_three_monotone(k: KernelSpec | Callable, grid: Sequence[float],
                         derivative: Callable | None = None) -> MonotonicityReport:
    r"""Check that :math:`b` and :math:`-\dot b` are nonnegative, nonincreasing and convex on ``grid``.

    ``k`` may be a :class:`KernelSpec` (analytic derivative) or any callable; for a
    callable without ``derivative`` the slope is taken from one-sided divided
    differences between neighbouring grid points.
    """
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size < 3 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("grid must be a strictly increasing sequence of at least 3 positive points")
    noise = 0.0
    if isinstance(k, KernelSpec):
        b = k(t)
        neg_db = -k.derivative(t, 1)
        tb = t
    else:
        b = np.asarray(k(t), dtype=float)
        if derivative is not None:
            neg_db = -np.asarray(derivative(t), dtype=float)
            tb = t
        else:
            neg_db = -np.diff(b) / np.diff(t)
            noise = 4 * np.finfo(float).eps * np.abs(b).max() / np.diff(t).min()
            tb = 0.5 * (t[1:] + t[:-1])
    viol = _shape_violations(t, b, "b")
    if tb.size >= 3:
        viol += _shape_violations(tb, neg_db, "-b'", noise)
    viol.sort(key=lambda x: x[0])
    return MonotonicityReport(not viol, viol)


@dataclass
class ParabolicityReport:
    limit_estimate: float
    finite: bool
    t_values: np.ndarray
    ratios: np.ndarray

    def to_dict(self) -> dict:
        return {"limit_estimate": self.limit_estimate, "finite": self.finite,
                "t_values": [float(x) for x in self.t_values],
                "ratios": [float(x) for x in self.ratios]}


def _parabolicity_ratio(k: KernelSpec, t: float) -> float:
    a, eta = k.alpha, k.eta
    c = k.amplitude / special.gamma(a)
    opts = dict(epsabs=0.0, epsrel=1e-12, limit=200)

    def smooth(x):
        return np.exp(-eta * x)

    # tau * b(tau) = c tau^a e^{-eta tau}; -tau b'(tau) = c tau^(a-1) (1 - a + eta tau) e^{-eta tau}
    num, _ = integrate.quad(smooth, 0.0, t, weight="alg", wvar=(a, 0.0), **opts)
    den, _ = integrate.quad(lambda x: (1.0 - a + eta * x) * smooth(x), 0.0, t,
                            weight="alg", wvar=(a - 1.0, 0.0), **opts)
    num *= c / t
    den *= c
    if not den > 1e-300:
        raise FloatingPointError(f"denominator underflow at t = {t}")
    return num / den


def check_parabolicity_limit(k: KernelSpec, t_values: Sequence[float] | None = None,
                             rel_band: float = 0.05) -> ParabolicityReport:
    r"""Estimate :math:`\lim_{t\to0} t^{-1}\int_0^t \tau b / \int_0^t (-\tau\dot b)`.

    The ratio is computed at each ``t`` (default ``2**-j`` for ``j = 4..20``) by
    Gauss-Jacobi type quadrature that absorbs the power singularity.  The limit
    is declared finite when the last four ratios lie within ``rel_band`` of each
    other; the estimate is then a first-order Richardson extrapolation.
    """
    if t_values is None:
        t_values = 2.0 ** -np.arange(4, 21)
    t = np.asarray(t_values, dtype=float)
    if t.size < 4 or np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise ValueError("t_values must be a decreasing positive sequence of length >= 4")
    ratios = np.array([_parabolicity_ratio(k, ti) for ti in t])
    tail = ratios[-4:]
    finite = bool(np.all(np.isfinite(tail)) and tail.min() > 0
                  and tail.max() <= (1.0 + rel_band) * tail.min())
    if finite:
        q = t[-1] / t[-2]
        est = (ratios[-1] - q * ratios[-2]) / (1.0 - q)
    else:
        est = math.inf
    return ParabolicityReport(float(est), finite, t, ratios)


# ---------------------------------------------------------------------------
# Laplace transform and parabolicity index
# ---------------------------------------------------------------------------

def laplace_transform(k: KernelSpec, lam):
    r"""Closed-form :math:`\hat b(\lambda) = A(\eta+\lambda)^{-\alpha}` (principal branch), ``Re lam > 0``."""
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam.real <= 0):
        raise ValueError("Laplace transform requires Re(lambda) > 0")
    out = k.amplitude * (k.eta + lam) ** (-k.alpha)
    return out if out.ndim else complex(out)


def laplace_transform_numeric(k: KernelSpec, lam: complex) -> complex:
    """Quadrature fallback; substitutes ``t = u**(1/alpha)`` to remove the power singularity."""
    lam = complex(lam)
    if lam.real <= 0:
        raise ValueError("Laplace transform requires Re(lambda) > 0")
    a = k.alpha
    z = k.eta + lam
    c = k.amplitude / special.gamma(a + 1.0)

    def part(fn):
        val, _ = integrate.quad(fn, 0.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=2000)
        return val

    def re(u):
        return math.exp(-z.real * u ** (1.0 / a)) * math.cos(z.imag * u ** (1.0 / a))

    def im(u):
        return -math.exp(-z.real * u ** (1.0 / a)) * math.sin(z.imag * u ** (1.0 / a))

    return c * complex(part(re), part(im))


@dataclass
class RhoReport:
    rho: float
    parabolic: bool
    method: str

    def to_dict(self) -> dict:
        return {"rho": self.rho, "parabolic": self.parabolic, "method": self.method}


def rho(k: KernelSpec) -> RhoReport:
    r"""Parabolicity index :math:`1 + \tfrac{2}{\pi}\sup_{\Re\lambda>0} |\arg \hat b(\lambda)|`.

    For all shipped families :math:`\arg\hat b = -\alpha\arg(\eta+\lambda)`, whose
    supremum over the half plane is :math:`\alpha\pi/2`; so :math:`\rho = 1+\alpha`
    and the exponential kernel sits at the non-parabolic boundary :math:`\rho=2`.
    """
    if k.alpha > 1.0:
        raise ValueError(f"index exceeds 2 for exponent {k.alpha} > 1; kernel is not of parabolic type")
    value = 1.0 + k.alpha
    return RhoReport(value, value < 2.0, "closed-form")


def _arg_on_ray(k: KernelSpec, y: np.ndarray, eps: float) -> np.ndarray:
    lam = y * (eps + 1j)
    return np.abs(np.angle(laplace_transform(k, lam)))


def rho_numeric(k: KernelSpec, eps: float = 1e-8, y_min: float = 1e-8, y_max: float = 1e12,
                points: int = 2001) -> RhoReport:
    """Scan ``lambda = y (eps + i)`` over log-spaced ``y`` and refine the maximum of ``|arg b_hat|``."""
    y = np.geomspace(y_min, y_max, points)
    vals = _arg_on_ray(k, y, eps)
    i = int(np.argmax(vals))
    best = float(vals[i])
    if 0 < i < points - 1:
        lo, hi = math.log(y[i - 1]), math.log(y[i + 1])
        res = optimize.minimize_scalar(lambda s: -_arg_on_ray(k, np.array([math.exp(s)]), eps)[0],
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    value = 1.0 + 2.0 / math.pi * best
    return RhoReport(value, value < 2.0 - 1e-6, "boundary-scan")
