"""Nystrom discretization of Mercer operators and their spectra.

The Mercer operator of a kernel ``K`` on ``(0, a)`` is
``(T phi)(x) = int_0^a K(x, y) phi(y) dy``; for a p.d. function ``F`` the
kernel is ``F(x - y)``. A quadrature rule ``(x_i, w_i)`` turns it into the
Hermitian matrix ``sqrt(w_i) K(x_i, x_j) sqrt(w_j)`` whose eigenvectors,
divided by ``sqrt(w_i)``, sample the eigenfunctions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .catalog import PdFunction, TwoPointKernel, affine_kernel, get, min_kernel
from .errors import DomainError
from .quadrature import composite_gauss, rule_nodes

EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class MercerOperator:
    matrix: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    a: float
    rule: str
    source: object = field(repr=False, default=None)

    @property
    def N(self) -> int:
        return self.nodes.size


@dataclass(frozen=True)
class MercerSpectrum:
    """Eigenpairs of a discretized Mercer operator, largest first.

    ``eigenvectors[:, n]`` holds ``xi_n`` at the nodes, orthonormal for the
    weighted inner product ``sum_i w_i conj(u_i) v_i``.
    """

    interval_length: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    trace: float
    rule: str = "gauss"
    source: object = field(repr=False, default=None)

    def weighted_gram(self) -> np.ndarray:
        V = self.eigenvectors
        return (V.conj().T * self.weights) @ V

    def eigenfunction(self, n: int, x) -> np.ndarray:
        """Nystrom extension of ``xi_n`` (zero-based ``n``) to arbitrary points."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        Kx = _kernel(self.source, x, self.nodes)
        return (Kx @ (self.weights * self.eigenvectors[:, n])) / self.eigenvalues[n]


def _kernel(src, x, y):
    if isinstance(src, PdFunction):
        return src.kernel(x, y, closed=True)
    if hasattr(src, "kernel"):
        return src.kernel(x, y)
    return np.asarray(src(np.asarray(x)[:, None], np.asarray(y)[None, :]))


def _width(src) -> float:
    if isinstance(src, PdFunction):
        return src.half_width
    if isinstance(src, TwoPointKernel):
        return src.hi - src.lo
    return getattr(src, "c", math.inf)


def discretize(F, a: float, N: int, rule: str = "gauss") -> MercerOperator:
    """Symmetrized Nystrom matrix of the Mercer operator of ``F`` on ``(0, a)``.

    Parameters
    ----------
    F : PdFunction, TwoPointKernel or object with ``kernel(x, y)``
    a : float
        Interval length; must not exceed the half-width of ``F``.
    N : int
        Number of nodes (at least 8).
    rule : {"gauss", "midpoint", "trapezoid"}
        Trapezoid puts the diagonal kink of ``F2``-type kernels on grid
        lines; Gauss-Legendre is the default.
    """
    if N < 8:
        raise ValueError("N must be at least 8")
    if not a > 0:
        raise DomainError("interval length must be positive")
    if a > _width(F) * (1 + 1e-15):
        raise DomainError(f"a = {a:g} exceeds the domain of the kernel")
    x, w = rule_nodes(rule, 0.0, a, N)
    K = _kernel(F, x, x)
    sw = np.sqrt(w)
    A = sw[:, None] * K * sw[None, :]
    A = 0.5 * (A + A.conj().T)
    return MercerOperator(matrix=A, nodes=x, weights=w, a=a, rule=rule, source=F)


def spectrum(op: MercerOperator, floor: float = EIG_FLOOR) -> MercerSpectrum:
    """Eigen-decomposition, descending, with the relative floor ``floor * lambda_1``."""
    ev, V = np.linalg.eigh(op.matrix)
    ev, V = ev[::-1], V[:, ::-1]
    keep = ev > floor * ev[0]
    ev, V = ev[keep], V[:, keep]
    xi = V / np.sqrt(op.weights)[:, None]
    # fix signs so that each eigenfunction has positive weighted mean where possible
    s = np.sign(np.real(np.sum(op.weights[:, None] * xi, axis=0)))
    s[s == 0] = 1.0
    xi = xi * s
    if not np.iscomplexobj(op.matrix):
        xi = np.real(xi)
    return MercerSpectrum(interval_length=op.a, nodes=op.nodes, weights=op.weights,
                          eigenvalues=ev, eigenvectors=xi, trace=float(np.sum(ev)),
                          rule=op.rule, source=op.source)


def mercer_spectrum(F, a: float, N: int, rule: str = "gauss") -> MercerSpectrum:
    return spectrum(discretize(F, a, N, rule))


def mercer_reconstruct(S: MercerSpectrum, x, y, K: int):
    """Partial sum ``sum_{n<K} lambda_n conj(xi_n(x)) xi_n(y)``.

    For a real kernel this tends to ``K(x, y)``; for ``F(x - y)`` with
    complex ``F`` it tends to ``F(y - x)``.
    """
    if K <= 0:
        return 0.0
    K = min(K, S.eigenvalues.size)
    out = 0.0
    for n in range(K):
        out = out + S.eigenvalues[n] * np.conj(S.eigenfunction(n, x)) * S.eigenfunction(n, y)
    out = np.asarray(out)
    return out.item() if out.size == 1 else out


# -- rank-one decomposition of F2 ---------------------------------------------

@dataclass(frozen=True)
class RankOneReport:
    residual: float
    L_eigenvalue: float
    L_rank: int
    L_eigenvalues: np.ndarray
    affine_matrix: np.ndarray


def affine_block(a: float = 0.5) -> np.ndarray:
    """Matrix of ``T_L`` on the basis ``{1, x}`` of affine functions.

    ``T_L(alpha + beta x) = c0 + c1 x`` with ``L(x, y) = 1 - x - y`` on ``(0, a)``;
    columns are the images of ``1`` and ``x``.
    """
    m0, m1, m2 = a, a * a / 2, a ** 3 / 3
    # T_L phi (x) = (1 - x) int phi - int y phi
    return np.array([[m0 - m1, m1 - m2],
                     [-m0, -m1]])


def rank_one_identity(N: int = 128, rule: str = "gauss") -> RankOneReport:
    """Check ``T_F2 = 2 T_E + T_L`` on ``(0, 1/2)`` and diagonalize ``T_L``.

    ``L_eigenvalue`` is the dominant eigenvalue of the discretized ``T_L``,
    whose range is the affine functions.
    """
    if N < 64:
        raise ValueError("N must be at least 64")
    a = 0.5
    F2 = discretize(get("F2"), a, N, rule)
    E = discretize(min_kernel(a), a, N, rule)
    L = discretize(affine_kernel(a), a, N, rule)
    resid = float(np.linalg.norm(F2.matrix - 2 * E.matrix - L.matrix, 2))
    ev = np.linalg.eigvalsh(L.matrix)
    ev = ev[np.argsort(-np.abs(ev))]
    rank = int(np.sum(np.abs(ev) > 1e-8 * abs(ev[0])))
    return RankOneReport(residual=resid, L_eigenvalue=float(ev[0]), L_rank=rank,
                         L_eigenvalues=ev[:rank], affine_matrix=affine_block(a))


# -- lattice form of the Mercer operator ---------------------------------------

def _sample_transform(phi, lam, n_panels: int = 256, n: int = 16):
    """``int_0^1 exp(-i lam y) phi(y) dy`` for each ``lam``."""
    if callable(phi):
        y, w = composite_gauss(np.linspace(0.0, 1.0, n_panels + 1), n)
        vals = phi(y)
    else:
        y, vals = (np.asarray(v, dtype=float) for v in phi)
        w = np.gradient(y)
        w[0] *= 0.5
        w[-1] *= 0.5
    return np.exp(-1j * np.outer(lam, y)) @ (w * vals)


def lattice_mercer(density: Callable, phi, x, K: int, n_panels: int | None = None):
    """Mercer operator of ``F = (M dlam)^`` on ``(0, 1)`` via lattice frequencies.

    Returns ``x -> sum_{|k|<=K} 2 pi M(l_k) phihat(l_k) exp(i l_k x)`` with
    ``l_k = 2 pi k`` and ``phihat(l) = int_0^1 exp(-i l y) phi(y) dy``. By Poisson
    summation this equals ``int_0^1 phi(y) sum_n F(x - y + n) dy``, i.e. the
    convolution with the 1-periodized ``F``.

    Parameters
    ----------
    density : callable
        ``M(lam)``.
    phi : callable or (nodes, values)
    x : array_like
    K : int
        Lattice cutoff.
    """
    x = np.asarray(x, dtype=float)
    k = np.arange(-K, K + 1, dtype=float)
    lam = 2.0 * np.pi * k
    if n_panels is None:
        n_panels = min(max(64, 4 * K), 4096)
    ph = _sample_transform(phi, lam, n_panels=n_panels)
    coef = 2.0 * np.pi * density(lam) * ph
    order = np.argsort(-np.abs(k))
    return np.exp(1j * np.outer(x, lam[order])) @ coef[order]


def periodized_convolution(F_global: Callable, phi: Callable, x, n_shift: int = 30,
                           n_panels: int = 256):
    """``int_0^1 phi(y) sum_{|n|<=n_shift} F(x - y + n) dy`` by direct quadrature."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape, dtype=complex)
    shifts = np.arange(-n_shift, n_shift + 1, dtype=float)
    for i, xi in enumerate(x):
        # kinks of F sit at y = x + n; keep them on panel boundaries
        br = np.unique(np.clip(np.concatenate([np.linspace(0, 1, n_panels + 1), [xi]]), 0, 1))
        y, w = composite_gauss(br, 16)
        kern = np.sum(F_global((xi - y)[:, None] + shifts[None, :]), axis=1)
        out[i] = np.sum(w * phi(y) * kern)
    return out
