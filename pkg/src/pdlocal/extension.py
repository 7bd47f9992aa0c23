"""Polya spline extensions, their Fourier densities and Ext(F) tests.

A Polya extension continues a real even p.d. function ``F`` on ``(-a, a)``
by straight segments down to zero. When the result is convex on the
positive half-line it is p.d. on the whole line; its spectral density is
computed here by exact piecewise integration so that sign verdicts near
zeros of the density are not blurred by quadrature noise.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .catalog import PdFunction, get
from .errors import ConstructionError
from .measures import SpectralMeasure, cantor_atoms
from .quadrature import composite_gauss

# one-sided derivatives F'(x) for x > 0
_DERIVATIVES = {
    "F1": lambda x: -2 * x / (1 + x * x) ** 2,
    "F2": lambda x: -1.0 + 0 * x,
    "F3": lambda x: -np.exp(-x),
    "F4": lambda x: 2 * np.sinc(x) * (np.cos(np.pi * x) - np.sinc(x)) / x,
    "F5": lambda x: -x * np.exp(-0.5 * x * x),
    "F6": lambda x: -np.sin(x),
}


@dataclass(frozen=True)
class SplineExtension:
    """Even, compactly supported continuation of a real catalog function.

    ``knots`` start at ``a``; the extension is linear between knots, equals
    the base function on ``|x| < a`` and vanishes for ``|x| >= c``.
    """

    base: str
    a: float
    knots: np.ndarray
    values: np.ndarray
    c: float
    core: PdFunction = field(repr=False)

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        inner = x < self.a
        out = np.interp(x, self.knots, self.values, right=0.0)
        if np.any(inner):
            out = np.where(inner, self.core(np.where(inner, x, 0.0)), out)
        return np.where(x >= self.c, 0.0, out)

    def kernel(self, x, y):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return self(x[:, None] - y[None, :])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.knots)

    def to_json(self) -> dict:
        return {"base": self.base, "a": self.a, "knots": list(map(float, self.knots)),
                "values": list(map(float, self.values)), "c": self.c}


def left_derivative(F: PdFunction, x: float) -> float:
    if F.id in _DERIVATIVES:
        return float(_DERIVATIVES[F.id](np.array(x)))
    h = 1e-6 * F.half_width
    return float((F(x, closed=True) - F(x - h, closed=True)) / h)


def polya_spline(F_id, c: float, mode: str = "to_zero") -> SplineExtension:
    """Continue ``F`` past ``a`` by a straight segment reaching zero.

    Parameters
    ----------
    F_id : str or PdFunction
        Real even catalog function.
    c : float
        Support radius (``to_zero``) or the largest admissible zero
        crossing (``single_segment``).
    mode : {"to_zero", "single_segment"}
        ``to_zero`` joins ``(a, F(a))`` to ``(c, 0)``; ``single_segment``
        continues with slope ``F'(a-)`` until it hits zero.
    """
    F = get(F_id) if isinstance(F_id, str) else F_id
    if not F.is_real:
        raise ConstructionError("Polya extensions need a real even function")
    a = F.half_width
    if not c > a:
        raise ConstructionError(f"cutoff c = {c:g} must exceed a = {a:g}")
    Fa = float(F(a, closed=True))
    if mode == "to_zero":
        if Fa <= 0:
            raise ConstructionError("F(a) must be positive")
        zero = c
    elif mode == "single_segment":
        s = left_derivative(F, a)
        if s >= 0:
            raise ConstructionError(f"slope F'(a-) = {s:g} is not negative; the line never reaches 0")
        zero = a - Fa / s
        if zero > c * (1 + 1e-12):
            raise ConstructionError(f"zero crossing {zero:g} lies beyond c = {c:g}")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SplineExtension(base=F.id, a=a, knots=np.array([a, zero]), values=np.array([Fa, 0.0]),
                           c=float(zero), core=F)


def convexity_check(E: SplineExtension, grid: Optional[Sequence[float]] = None,
                    tol: float = 1e-12):
    """Discrete midpoint convexity of ``E`` on ``[0, c]``.

    Returns ``(convex, violations)`` with violations as ``(x, y)`` pairs.
    """
    x = np.linspace(0.0, E.c, 401) if grid is None else np.asarray(grid, dtype=float)
    fx = E(x)
    mid = E(0.5 * (x[:, None] + x[None, :]))
    bad = mid > 0.5 * (fx[:, None] + fx[None, :]) + tol
    i, j = np.nonzero(np.triu(bad))
    return (not bool(i.size)), [(float(x[p]), float(x[q])) for p, q in zip(i, j)]


# -- densities -------------------------------------------------------------------

def _linear_cos(alpha, beta, p, q, lam):
    """``int_p^q (alpha + beta y) cos(lam y) dy`` for an array of ``lam``."""
    lam = np.asarray(lam, dtype=float)
    out = np.empty(lam.shape)
    small = np.abs(lam) * (q - p) < 0.5
    if np.any(small):
        y, w = composite_gauss(np.array([p, q]), 24)
        out[small] = np.cos(np.outer(lam[small], y)) @ (w * (alpha + beta * y))
    big = ~small
    if np.any(big):
        L = lam[big]

        def anti(y):
            return (alpha + beta * y) * np.sin(L * y) / L + beta * np.cos(L * y) / L ** 2

        out[big] = anti(q) - anti(p)
    return out


def _core_cos(E: SplineExtension, lam):
    """``int_0^a F(y) cos(lam y) dy`` for the core, exact where possible."""
    a, lam = E.a, np.asarray(lam, dtype=float)
    if E.base == "F2":
        return _linear_cos(1.0, -1.0, 0.0, a, lam), True
    if E.base == "F3":
        return (1 - np.exp(-a) * (np.cos(lam * a) - lam * np.sin(lam * a))) / (1 + lam * lam), True
    y, w = composite_gauss(np.linspace(0.0, a, 65), 16)
    out = np.empty(lam.shape)
    fy = w * E.core(y)
    for s in range(0, lam.size, 4096):
        sl = slice(s, s + 4096)
        out.flat[sl] = np.cos(np.outer(lam.flat[sl], y)) @ fy
    return out, False


def density_values(E: SplineExtension, lam):
    """``Phi(lam) = (1/2 pi) int exp(-i lam y) F_ex(y) dy`` (real, even)."""
    lam = np.asarray(lam, dtype=float)
    core, _ = _core_cos(E, lam.ravel())
    total = core
    for p, q, fp, fq in zip(E.knots[:-1], E.knots[1:], E.values[:-1], E.values[1:]):
        beta = (fq - fp) / (q - p)
        total = total + _linear_cos(fp - beta * p, beta, p, q, lam.ravel())
    return (total / np.pi).reshape(lam.shape)


@dataclass(frozen=True)
class ExtensionDensity:
    extension: SplineExtension = field(repr=False)
    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    min_value: float
    analytic: bool

    def evaluator(self, lam):
        return density_values(self.extension, lam)

    __call__ = evaluator


def default_lambda_grid(c: float) -> np.ndarray:
    """Uniform grid with spacing ``pi/(4c)`` out to ``200/c``."""
    step = math.pi / (4 * c)
    n = int(math.ceil(200.0 / c / step))
    return step * np.arange(-n, n + 1)


def extension_density(E: SplineExtension, lambda_grid=None) -> ExtensionDensity:
    grid = default_lambda_grid(E.c) if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    vals = density_values(E, grid)
    analytic = E.base in ("F2", "F3")
    return ExtensionDensity(E, grid, vals, float(np.min(vals)), analytic)


def pd_verify(D: ExtensionDensity, tol: float = 1e-9) -> bool:
    """True iff the sampled density is ``>= -tol``.

    Beyond the grid the density is bounded by ``C/lam**2`` with ``C`` the
    total variation of ``F_ex'``; the bound cannot flip a verdict at the grid
    edge once it is below ``tol``.
    """
    return bool(D.min_value >= -tol)


def tail_constant(E: SplineExtension) -> float:
    """``-F_ex'(0+)``: the coefficient of the non-oscillating ``1/(pi lam**2)`` tail."""
    if E.base in _DERIVATIVES:
        return float(-_DERIVATIVES[E.base](np.array(1e-300)))
    return 0.0


def density_integral(E: SplineExtension, x: float = 0.0, lam_max: float = 2.0e4):
    """``int exp(i lam x) Phi(lam) dlam``, which should return ``F_ex(x)``.

    The range ``|lam| > lam_max`` is added from the leading tail
    ``-F'(0+)/(pi lam**2)``.
    """
    total = 0.0
    step = 2.0e3
    for lo in np.arange(0.0, lam_max, step):
        lam, w = composite_gauss(np.linspace(lo, lo + step, int(step) + 1), 16)
        total += 2.0 * float(np.sum(w * np.cos(lam * x) * density_values(E, lam)))
    C0 = tail_constant(E) / np.pi
    if x == 0:
        total += 2.0 * C0 / lam_max
    else:
        # int_L^inf cos(lam x)/lam^2 = -sin(L x)/(x L^2) + O(L^-3)
        total += 2.0 * C0 * (-math.sin(lam_max * x) / (x * lam_max ** 2))
    return total


# -- closed-form transform identities ---------------------------------------------

def f3_restricted_transform(y, a: float = 1.0):
    """``int_{-a}^{a} exp(-i y x) e^{-|x|} dx`` in closed form."""
    y = np.asarray(y, dtype=float)
    return (2 - 2 * np.exp(-a) * (np.cos(a * y) - y * np.sin(a * y))) / (1 + y * y)


def f3_restricted_transform_quad(y, a: float = 1.0):
    y = np.atleast_1d(np.asarray(y, dtype=float))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = [2 * integrate.quad(lambda x: math.exp(-x), 0, a, weight="cos", wvar=v,
                                  epsabs=1e-14, epsrel=1e-13)[0] for v in y]
    return np.array(out)


def exp3_weight(lam, a: float = 1.0):
    """``|int_0^a e^x e^{-i lam x} dx|**2 = (e^{2a} + 1 - 2 e^a cos(lam a))/(1 + lam**2)``."""
    lam = np.asarray(lam, dtype=float)
    return (math.exp(2 * a) + 1 - 2 * math.exp(a) * np.cos(lam * a)) / (1 + lam * lam)


def exp3_weight_quad(lam, a: float = 1.0):
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    out = []
    for v in lam:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            re = integrate.quad(math.exp, 0, a, weight="cos", wvar=v, epsabs=1e-14, epsrel=1e-13)[0]
            im = integrate.quad(math.exp, 0, a, weight="sin", wvar=v, epsabs=1e-14, epsrel=1e-13)[0]
        out.append(re * re + im * im)
    return np.array(out)


# -- Shannon sampling -------------------------------------------------------------

def sha(xi):
    """``Sha(xi) = exp(i xi/2) sin(xi)/xi``."""
    xi = np.asarray(xi, dtype=float)
    return np.exp(0.5j * xi) * np.sinc(xi / np.pi)


def shannon_partial_sum(lam, N: int):
    """``S_N(lam) = sum_{|n|<=N} Sha(pi (lam - n))`` via digamma sums.

    ``Sha(pi(lam - n)) = exp(i pi lam/2) sin(pi lam)/pi * i**n/(lam - n)``;
    grouping ``n`` by residue mod 4 turns each group into a digamma
    difference. Integer ``lam`` is handled by its limit.
    """
    lam = np.asarray(lam, dtype=float)
    acc = np.zeros(lam.shape, dtype=complex)
    for r in range(4):
        lo = math.ceil((-N - r) / 4)
        hi = math.floor((N - r) / 4)
        z = (lam - r) / 4.0
        # sum_{m=lo}^{hi} 1/(z - m) = psi(z - lo + 1) - psi(z - hi)  (reflection)
        with np.errstate(all="ignore"):
            s = (special.digamma(hi + 1 - z) - special.digamma(lo - z)) * -0.25
        acc += (1j ** r) * s
    pref = np.exp(0.5j * np.pi * lam) * np.sin(np.pi * lam) / np.pi
    out = pref * acc
    k = np.round(lam)
    near = np.abs(lam - k) < 1e-9
    if np.any(near):
        out = np.where(near, np.where(np.abs(k) <= N, 1.0 + 0j, 0.0j), out)
    return out


@dataclass(frozen=True)
class ShannonResult:
    max_residual: float
    in_ext: bool
    residuals: np.ndarray
    tail_bound: float
    truncation_dominated: bool
    n_cut: int


def _shannon_integral(mu: SpectralMeasure, x, N: int, lam_max: Optional[float] = None):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape, dtype=complex)
    for loc, w in mu.atoms:
        out += w * shannon_partial_sum(np.array(loc), N) * np.exp(1j * loc * x)
    if mu.cantor is not None:
        locs, ws = cantor_atoms(14, mu.cantor.half_width)
        s = shannon_partial_sum(locs, N) * ws * mu.cantor.weight
        out += np.exp(1j * np.outer(x, locs)) @ s
    if mu.density is not None:
        D = mu.density
        R = lam_max if lam_max is not None else 8.0 * N + 16.0
        if D.kind == "gaussian":
            R = min(R, 40.0 * D.params.get("sigma", 1.0))
        lo, hi = max(D.support[0], -R), min(D.support[1], R)
        cuts = np.unique(np.concatenate([np.arange(math.floor(lo), math.ceil(hi) + 0.5, 0.5),
                                         [lo, hi], [b for b in D.breaks if lo < b < hi]]))
        cuts = cuts[(cuts >= lo) & (cuts <= hi)]
        lam, w = composite_gauss(cuts, 8)
        g = w * D(lam) * shannon_partial_sum(lam, N)
        for s in range(0, x.size):
            out[s] += np.sum(np.exp(1j * lam * x[s]) * g)
    return out


def shannon_ext_check(mu: SpectralMeasure, F: PdFunction, x_grid, n_cut: int = 64,
                      tol: float = 1e-3) -> ShannonResult:
    """Does ``sum_{|n|<=N} int exp(i lam x) Sha(pi(lam - n)) dmu`` reproduce ``F``?

    ``tail_bound`` estimates the truncation error,
    ``mass/(pi N) + 2 mu(|lam| > N/2)``; a bound above ``tol`` is flagged.
    """
    x = np.asarray(x_grid, dtype=float)
    approx = _shannon_integral(mu, x, n_cut)
    res = np.abs(approx - F(x))
    bound = mu.total_mass / (math.pi * n_cut) + 2.0 * mu.tail_mass(n_cut / 2.0)
    mx = float(np.max(res))
    return ShannonResult(mx, bool(mx < tol), res, float(bound), bool(bound > tol), n_cut)


def _ehat(lam, n: int):
    """``int_0^1 exp(-i lam y) exp(i 2 pi n y) dy``."""
    d = np.asarray(lam, dtype=float) - 2 * np.pi * n
    return np.exp(-0.5j * d) * np.sinc(d / (2 * np.pi))


def shannon_frame(n: int, x, mu: Optional[SpectralMeasure] = None, method: str = "direct",
                  F: Optional[PdFunction] = None, lam_max: float = 4000.0):
    """Frame function ``f_n = T_F(e_n)`` with ``e_n(y) = exp(i 2 pi n y)`` on ``(0, 1)``.

    ``method="direct"`` integrates ``int_0^1 F(x - y) e_n(y) dy``;
    ``method="measure"`` evaluates ``int exp(i lam x) ehat_n(lam) dmu(lam)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if method == "direct":
        F = get("F3") if F is None else F
        out = np.empty(x.shape, dtype=complex)
        for i, xi in enumerate(x):
            br = np.unique(np.concatenate([np.linspace(0, 1, 33), [xi]]))
            y, w = composite_gauss(br, 16)
            out[i] = np.sum(w * F(xi - y, closed=True) * np.exp(2j * np.pi * n * y))
        return out
    if method != "measure":
        raise ValueError(method)
    from .measures import get_measure

    mu = get_measure("mu3") if mu is None else mu
    out = np.zeros(x.shape, dtype=complex)
    for loc, w in mu.atoms:
        out += w * _ehat(loc, n) * np.exp(1j * loc * x)
    if mu.density is not None:
        lam, w = composite_gauss(np.linspace(-lam_max, lam_max, int(4 * lam_max) + 1), 8)
        g = w * mu.density(lam) * _ehat(lam, n)
        out += np.exp(1j * np.outer(x, lam)) @ g
    return out


def shannon_frame_paper(n: int, x):
    """The printed closed forms for ``F3``; they equal ``-T_F(e_n)``."""
    x = np.asarray(x, dtype=float)
    k = 2 * np.pi * n
    re = (np.exp(x - 1) + np.exp(-x) - 2 * np.cos(k * x)) / (1 + k * k)
    im = ((np.exp(x - 1) - np.exp(-x)) * k - 2 * np.sin(k * x)) / (1 + k * k)
    return re + 1j * im


@dataclass(frozen=True)
class BesselResult:
    frame_sum: float
    bound: float
    holds: bool


def bessel_frame_check(S, coeffs, lambda1: Optional[float] = None, n_max: int = 200,
                       rtol: float = 1e-9) -> BesselResult:
    """Check ``sum_n |<f_n, xi>_H|**2 <= lambda_1 ||xi||_H**2``.

    ``xi = sum_k coeffs[k] xi_k`` in the Mercer eigenbasis of ``S`` on
    ``(0, 1)``. Then ``||xi||_H**2 = sum |coeffs_k|**2/lambda_k`` and
    ``<f_n, xi>_H = <e_n, xi>_{L2}``.
    """
    c = np.asarray(coeffs)
    K = c.size
    lam = S.eigenvalues[:K]
    lambda1 = S.eigenvalues[0] if lambda1 is None else lambda1
    norm2 = float(np.sum(np.abs(c) ** 2 / lam))
    # resolve e_n on a grid fine enough for |n| <= n_max; xi by Nystrom extension
    a = S.interval_length
    y, w = composite_gauss(np.linspace(0.0, a, max(32, 2 * n_max) + 1), 16)
    xi = sum(ck * S.eigenfunction(k, y) for k, ck in enumerate(c) if ck != 0) if np.any(c) \
        else np.zeros(y.shape)
    n = np.arange(-n_max, n_max + 1)
    en = np.exp(-2j * np.pi * np.outer(n, y) / a)
    inner = en @ (w * xi) / math.sqrt(a)
    fs = float(np.sum(np.abs(inner) ** 2))
    bound = float(lambda1 * norm2)
    return BesselResult(fs, bound, fs <= bound * (1 + rtol) + 1e-300)
