"""Monte Carlo for Brownian motion, the pinned bridge and Ornstein-Uhlenbeck.

Every path draws from its own counter-based stream keyed by
``(seed, path_index)``, so a path does not depend on how many others are
simulated alongside it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mercer import discretize

SCHEMES = ("exact_increment", "euler_maruyama", "frozen_left")
N_BATCHES = 20


@dataclass(frozen=True)
class SamplePaths:
    times: np.ndarray
    values: np.ndarray = field(repr=False)  # shape (n_paths, n_times)
    seed: int
    scheme: str = "exact_increment"

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]


def path_rng(seed: int, index: int) -> np.random.Generator:
    key = ((int(seed) & 0xFFFFFFFFFFFFFFFF) << 64) | int(index)
    return np.random.Generator(np.random.Philox(key=key))


def _normals(seed: int, n_paths: int, n_steps: int) -> np.ndarray:
    out = np.empty((n_paths, n_steps))
    for i in range(n_paths):
        out[i] = path_rng(seed, i).standard_normal(n_steps)
    return out


def _check_grid(grid) -> np.ndarray:
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
        raise ValueError("grid must be strictly increasing with at least two points")
    return t


def uniform_grid(T: float, dt: float) -> np.ndarray:
    n = int(round(T / dt))
    return np.linspace(0.0, T, n + 1)


def simulate_bm(grid, n_paths: int, seed: int) -> SamplePaths:
    """Brownian motion from exact Gaussian increments, ``B_0 = 0``."""
    t = _check_grid(grid)
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    Z = _normals(seed, n_paths, t.size - 1)
    X = np.zeros((n_paths, t.size))
    X[:, 1:] = np.cumsum(Z * np.sqrt(np.diff(t)), axis=1)
    if t[0] != 0:
        X += np.sqrt(t[0]) * _normals(seed ^ 0x5EED, n_paths, 1)
    return SamplePaths(t, X, seed)


def simulate_bridge(grid, n_paths: int, seed: int, scheme: str = "exact_increment") -> SamplePaths:
    """Brownian bridge from 0 at ``t = 0`` to 1 at ``t = 1``.

    ``exact_increment`` uses ``X_t = t + (1 - t) M_t`` with
    ``M_t = int_0^t dB_s/(1 - s)``, drawing each increment of ``M`` with its
    exact variance ``1/(1 - t_{j+1}) - 1/(1 - t_j)``. ``frozen_left`` freezes
    the weight at the left endpoint instead. ``euler_maruyama`` steps the SDE
    ``dX = (X - 1)/(t - 1) dt + dB``. A node at ``t = 1`` is set to 1.
    """
    t = _check_grid(grid)
    if t[0] != 0 or t[-1] > 1:
        raise ValueError("bridge grid must start at 0 and stay inside [0, 1]")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    pinned = bool(np.isclose(t[-1], 1.0))
    ts = t[:-1] if pinned else t
    Z = _normals(seed, n_paths, ts.size - 1)
    X = np.zeros((n_paths, t.size))
    if scheme == "euler_maruyama":
        dt = np.diff(ts)
        for j in range(ts.size - 1):
            X[:, j + 1] = X[:, j] + (X[:, j] - 1) / (ts[j] - 1) * dt[j] + np.sqrt(dt[j]) * Z[:, j]
    else:
        if scheme == "exact_increment":
            var = np.diff(1.0 / (1.0 - ts))
        else:
            var = np.diff(ts) / (1.0 - ts[:-1]) ** 2
        M = np.zeros((n_paths, ts.size))
        M[:, 1:] = np.cumsum(Z * np.sqrt(var), axis=1)
        X[:, :ts.size] = ts + (1.0 - ts) * M
    if pinned:
        X[:, -1] = 1.0
    return SamplePaths(t, X, seed, scheme)


def simulate_ou(gamma: float, beta: float, v0: float, grid, n_paths: int, seed: int) -> SamplePaths:
    """Exact OU recursion ``v <- v e^{-g dt} + N(0, b^2 (1 - e^{-2 g dt})/(2 g))``."""
    if not (gamma > 0 and beta > 0):
        raise ValueError("gamma and beta must be positive")
    t = _check_grid(grid)
    dt = np.diff(t)
    decay = np.exp(-gamma * dt)
    sd = beta * np.sqrt((1 - np.exp(-2 * gamma * dt)) / (2 * gamma))
    Z = _normals(seed, n_paths, t.size - 1)
    V = np.empty((n_paths, t.size))
    V[:, 0] = v0
    for j in range(t.size - 1):
        V[:, j + 1] = V[:, j] * decay[j] + sd[j] * Z[:, j]
    return SamplePaths(t, V, seed)


# -- statistics -------------------------------------------------------------------

@dataclass(frozen=True)
class CovarianceReport:
    pairs: list
    empirical: np.ndarray
    theoretical: np.ndarray
    std_error: np.ndarray
    n_paths: int

    @property
    def z_scores(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.abs(self.empirical - self.theoretical) / self.std_error
        return np.where(np.abs(self.empirical - self.theoretical) <= 1e-15, 0.0, z)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.z_scores <= 4.0))

    def to_json(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs], "empirical": self.empirical.tolist(),
                "theoretical": self.theoretical.tolist(), "std_error": self.std_error.tolist(),
                "n_paths": self.n_paths, "passed": self.passed}


def _index(times, s):
    i = int(np.argmin(np.abs(times - s)))
    if abs(times[i] - s) > 1e-9 * max(1.0, abs(s)):
        raise ValueError(f"time {s} is not on the grid")
    return i


def batch_stat(samples: np.ndarray, stat, n_batches: int = N_BATCHES):
    """Full-sample statistic with a batch-means standard error."""
    if samples.shape[0] < n_batches:
        raise ValueError("fewer paths than batches")
    full = stat(samples)
    parts = np.array([stat(b) for b in np.array_split(samples, n_batches)])
    return full, parts.std(ddof=1) / np.sqrt(n_batches)


def _cov(u):
    a, b = u[:, 0], u[:, 1]
    return np.mean((a - a.mean()) * (b - b.mean()))


def empirical_cov(paths: SamplePaths, pairs, theory=None, n_batches: int = N_BATCHES) -> CovarianceReport:
    """Sample covariances at grid pairs with batch-means standard errors.

    ``theory`` maps ``(s, t)`` to the target covariance; default zero.
    """
    if paths.n_paths < n_batches:
        raise ValueError("fewer paths than batches")
    emp, se, th = [], [], []
    for s, t in pairs:
        i, j = _index(paths.times, s), _index(paths.times, t)
        c, e = batch_stat(paths.values[:, [i, j]], _cov, n_batches)
        emp.append(c)
        se.append(e)
        th.append(0.0 if theory is None else theory(s, t))
    return CovarianceReport(list(map(tuple, pairs)), np.array(emp), np.array(th), np.array(se),
                            paths.n_paths)


def bm_cov(s, t):
    return min(s, t)


def bridge_cov(s, t):
    return min(s, t) - s * t


def ou_cov(gamma, beta, v0=None):
    def c(s, t):
        lo, hi = min(s, t), max(s, t)
        return beta ** 2 / (2 * gamma) * (np.exp(-gamma * (hi - lo)) - np.exp(-gamma * (hi + lo)))
    return c


def ou_mean(gamma, v0, t):
    return v0 * np.exp(-gamma * np.asarray(t))


def ou_var(gamma, beta, t):
    return beta ** 2 * (1 - np.exp(-2 * gamma * np.asarray(t))) / (2 * gamma)


# -- fractional Brownian kernels ------------------------------------------------

@dataclass(frozen=True)
class FbmDecomposition:
    F_H_value: float
    L_H_value: float
    K_H_value: float
    residual: float


def K_H(H, x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    p = 2 * H
    return 0.5 * (np.abs(x) ** p + np.abs(y) ** p - np.abs(x - y) ** p)


def L_H(H, x, y):
    p = 2 * H
    return 1 - np.abs(np.asarray(x, dtype=float)) ** p - np.abs(np.asarray(y, dtype=float)) ** p


def F_H(H, t):
    return 1 - np.abs(np.asarray(t, dtype=float)) ** (2 * H)


def fbm_kernel_decompose(H: float, x: float, y: float) -> FbmDecomposition:
    """Split ``F_H(x - y) = L_H(x, y) + 2 K_H(x, y)`` with ``F_H(t) = 1 - |t|^{2H}``."""
    if not 0 < H < 1:
        raise ValueError("H must lie in (0, 1)")
    f, l, k = float(F_H(H, x - y)), float(L_H(H, x, y)), float(K_H(H, x, y))
    return FbmDecomposition(f, l, k, abs(f - l - 2 * k))


class _Kernel:
    def __init__(self, fn):
        self.fn = fn

    def kernel(self, x, y):
        return self.fn(np.asarray(x)[:, None], np.asarray(y)[None, :])


def fbm_operator_residual(H: float, N: int = 128, a: float = 1.0, rule: str = "gauss") -> float:
    """Spectral norm of ``T_{F_H} - T_{L_H} - 2 T_{K_H}`` on ``(0, a)``."""
    F = discretize(_Kernel(lambda x, y: F_H(H, x - y)), a, N, rule)
    L = discretize(_Kernel(lambda x, y: L_H(H, x, y)), a, N, rule)
    K = discretize(_Kernel(lambda x, y: K_H(H, x, y)), a, N, rule)
    return float(np.linalg.norm(F.matrix - L.matrix - 2 * K.matrix, 2))
