"""Fractional Brownian motion: exact sampling and Wiener integrals.

Paths are generated by circulant embedding of the fractional Gaussian noise
autocovariance (Davies-Harte), falling back to a dense Cholesky factor if the
embedding has materially negative eigenvalues.  Randomness is drawn from
counter-based Philox streams, one per ``(mode, replicate)`` pair, so any subset
of paths can be regenerated independently and in any order.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence, TextIO

import numpy as np
from scipy import linalg

from .errors import EmbeddingError, GridMismatchError
from .fraccalc import SampledFunction, check_hurst

__all__ = [
    "SeedSpec",
    "FbmPath",
    "FbmEnsemble",
    "fbm_covariance",
    "fgn_autocovariance",
    "sample_fbm",
    "wiener_integral",
    "sample_noise_coefficients",
]

STREAM_STRIDE = 2**20
_CLIP_TOL = 1e-10


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus the rule ``(mode, replicate) -> mode * 2**20 + replicate``."""

    master_seed: int

    def __post_init__(self):
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "master_seed", seed)

    def stream_index(self, mode: int, replicate: int) -> int:
        if not 0 <= replicate < STREAM_STRIDE:
            raise ValueError(f"replicate index must be below {STREAM_STRIDE}")
        if mode < 0:
            raise ValueError("mode index must be nonnegative")
        return int(mode) * STREAM_STRIDE + int(replicate)

    def generator(self, mode: int, replicate: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index(mode, replicate),))
        return np.random.Generator(np.random.Philox(ss))


def _as_seed(seed) -> SeedSpec:
    return seed if isinstance(seed, SeedSpec) else SeedSpec(seed)


@dataclass(frozen=True, eq=False)
class FbmPath:
    """One sampled path on ``t_i = i * grid_step``; ``values[0] == 0``."""

    hurst: float
    grid_step: float
    values: np.ndarray
    seed_lineage: tuple[int, int]

    @property
    def times(self) -> np.ndarray:
        return self.grid_step * np.arange(self.values.size)

    @property
    def n_steps(self) -> int:
        return self.values.size - 1


@dataclass(frozen=True, eq=False)
class FbmEnsemble:
    """``count`` independent paths of one mode, stored as a ``(count, n_steps + 1)`` array."""

    hurst: float
    grid_step: float
    paths: np.ndarray
    master_seed: int
    mode: int = 0
    method: str = field(default="circulant")

    def __len__(self) -> int:
        return self.paths.shape[0]

    def __getitem__(self, k: int) -> FbmPath:
        return FbmPath(self.hurst, self.grid_step, self.paths[k],
                       (self.master_seed, self.mode * STREAM_STRIDE + k))

    def __iter__(self) -> Iterator[FbmPath]:
        return (self[k] for k in range(len(self)))

    @property
    def times(self) -> np.ndarray:
        return self.grid_step * np.arange(self.paths.shape[1])

    def write_csv(self, fh: TextIO) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "value", "mode", "replicate"])
        t = self.times
        for k, row in enumerate(self.paths):
            for ti, v in zip(t, row):
                writer.writerow([repr(float(ti)), repr(float(v)), self.mode, k])


def fbm_covariance(s, t, H: float):
    """``E[B(s) B(t)] = (t^2H + s^2H - |t - s|^2H) / 2``."""
    H = check_hurst(H)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("fbm_covariance requires nonnegative times")
    out = 0.5 * (t ** (2 * H) + s ** (2 * H) - np.abs(t - s) ** (2 * H))
    return out if out.ndim else float(out)


def fgn_autocovariance(H: float, n: int, grid_step: float = 1.0) -> np.ndarray:
    """Autocovariance of the increments ``B((k+1)h) - B(kh)`` at lags ``0..n-1``."""
    k = np.arange(n, dtype=float)
    two_h = 2 * H
    g = 0.5 * (np.abs(k + 1) ** two_h - 2 * k**two_h + np.abs(k - 1) ** two_h)
    return g * grid_step**two_h


def _circulant_sqrt_eigs(H: float, n: int, grid_step: float) -> np.ndarray | None:
    c = fgn_autocovariance(H, n + 1, grid_step)
    row = np.concatenate((c, c[-2:0:-1]))  # length 2n
    lam = np.fft.fft(row).real
    lam_max = lam.max()
    if lam.min() < -_CLIP_TOL * lam_max:
        return None
    lam = np.clip(lam, 0.0, None)
    return np.sqrt(lam / row.size)


def _increments_circulant(sqrt_eigs: np.ndarray, n: int, gens: Sequence[np.random.Generator]) -> np.ndarray:
    m = sqrt_eigs.size
    z = np.empty((len(gens), m), dtype=complex)
    for i, g in enumerate(gens):
        draws = g.standard_normal(2 * m)
        z[i] = draws[:m] + 1j * draws[m:]
    return np.fft.fft(sqrt_eigs * z, axis=1).real[:, :n]


def _increments_dense(H: float, n: int, grid_step: float, gens: Sequence[np.random.Generator]) -> np.ndarray:
    c = fgn_autocovariance(H, n, grid_step)
    cov = linalg.toeplitz(c)
    try:
        chol = linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as exc:
        raise EmbeddingError("circulant embedding failed and covariance is not positive definite") from exc
    z = np.stack([g.standard_normal(n) for g in gens])
    return z @ chol.T


def sample_fbm(H: float, n_steps: int, grid_step: float, count: int, seed,
               mode: int = 0, method: str = "auto") -> FbmEnsemble:
    """Sample ``count`` exact-in-law fBm paths on ``0, h, ..., n_steps * h``.

    Replicate ``k`` draws only from the stream ``(mode, k)`` of ``seed``, so the
    result does not depend on how work is split across calls or threads.

    Parameters
    ----------
    method : {"auto", "circulant", "dense"}
        ``"auto"`` uses circulant embedding and falls back to Cholesky.
    """
    H = check_hurst(H)
    n_steps = int(n_steps)
    count = int(count)
    if n_steps < 1 or count < 1:
        raise ValueError("n_steps and count must be at least 1")
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    seed = _as_seed(seed)
    gens = [seed.generator(mode, k) for k in range(count)]
    sqrt_eigs = None if method == "dense" else _circulant_sqrt_eigs(H, n_steps, grid_step)
    if sqrt_eigs is None and method == "circulant":
        raise EmbeddingError("circulant embedding is not nonnegative definite")
    if sqrt_eigs is not None:
        inc = _increments_circulant(sqrt_eigs, n_steps, gens)
        used = "circulant"
    else:
        inc = _increments_dense(H, n_steps, grid_step, gens)
        used = "dense"
    paths = np.zeros((count, n_steps + 1))
    np.cumsum(inc, axis=1, out=paths[:, 1:])
    return FbmEnsemble(H, float(grid_step), paths, seed.master_seed, int(mode), used)


def _integrand_slice(f: SampledFunction, grid_step: float, n_steps: int) -> tuple[int, np.ndarray]:
    if not math.isclose(f.grid_step, grid_step, rel_tol=1e-12):
        raise GridMismatchError(f"integrand step {f.grid_step} differs from path step {grid_step}")
    offset = f.start / grid_step
    first = int(round(offset))
    if abs(offset - first) > 1e-6:
        raise GridMismatchError("integrand cells are not aligned with the path grid")
    vals = f.values
    nz = np.nonzero(vals)[0]
    if nz.size == 0:
        return 0, np.zeros(0)
    lo, hi = first + nz[0], first + nz[-1] + 1
    if lo < 0 or hi > n_steps:
        raise GridMismatchError("integrand support exceeds the path window")
    return lo, vals[nz[0]:nz[-1] + 1]


def wiener_integral(f: SampledFunction, path) -> float | np.ndarray:
    """Left-endpoint sum ``sum_i f(t_i) (B(t_{i+1}) - B(t_i))``.

    ``path`` may be a single :class:`FbmPath` (returns a float) or an
    :class:`FbmEnsemble` (returns one value per replicate).
    """
    if isinstance(path, FbmEnsemble):
        arr = path.paths
    elif isinstance(path, FbmPath):
        arr = path.values[None, :]
    else:
        raise TypeError("path must be an FbmPath or FbmEnsemble")
    lo, w = _integrand_slice(f, path.grid_step, arr.shape[1] - 1)
    inc = arr[:, lo + 1:lo + 1 + w.size] - arr[:, lo:lo + w.size]
    out = inc @ w if w.size else np.zeros(arr.shape[0])
    return float(out[0]) if isinstance(path, FbmPath) else out


def sample_noise_coefficients(gamma: Sequence[float], n_modes: int, H: float, n_steps: int,
                              grid_step: float, count: int, seed, workers: int = 1) -> np.ndarray:
    """Independent fBm paths scaled by ``sqrt(gamma[n])`` for modes ``n = 1..n_modes``.

    Returns an array of shape ``(n_modes, count, n_steps + 1)``; row ``n - 1``
    uses stream mode index ``n``.  Output is identical for any ``workers``.
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.size < n_modes:
        raise ValueError(f"need {n_modes} weights, got {gamma.size}")
    gamma = gamma[:n_modes]
    if np.any(gamma < 0) or not np.all(np.isfinite(gamma)):
        raise ValueError("covariance weights must be finite and nonnegative")
    seed = _as_seed(seed)
    out = np.zeros((n_modes, count, n_steps + 1))

    def one(n):
        if gamma[n] > 0:
            ens = sample_fbm(H, n_steps, grid_step, count, seed, mode=n + 1)
            out[n] = math.sqrt(gamma[n]) * ens.paths

    if workers <= 1:
        for n in range(n_modes):
            one(n)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(n_modes)))
    return out
