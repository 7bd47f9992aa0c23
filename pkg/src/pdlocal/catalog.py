"""Catalog of locally defined positive definite functions and Gram tools.

A positive definite (p.d.) function on ``(-a, a)`` is stored as a
:class:`PdFunction`: a vectorized evaluator plus metadata. Gram matrices,
the relative PSD test and the closure operations (products, real/imaginary
splitting, periodization) live here as well.

Fourier convention used throughout the package is the angular one,
``F(x) = int exp(i*lam*x) dmu(lam)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError, DomainError, StructuralError

PSD_TOL = 1e-9
RANK_TOL = 1e-8
HERMITIAN_TOL = 1e-12

REAL_LINE = "RealLine"
CIRCLE = "Circle"


@dataclass(frozen=True)
class PdFunction:
    """A continuous p.d. function on ``(-a, a)`` or on the circle ``R/Z``.

    Attributes
    ----------
    id : str
        Catalog identifier or a derived name such as ``"F2*F3"``.
    half_width : float
        The number ``a``; the domain is the open interval ``(-a, a)``.
        Circle functions use ``a = 1/2`` and are evaluated periodically.
    evaluator : callable
        Vectorized map ``x -> F(x)`` (real or complex array).
    is_real : bool
    normalization : float
        The value ``F(0)``. Catalog entries are normalized to 1 except the
        two-term example ``im14`` whose measure has mass 2.
    group : str
        ``"RealLine"`` or ``"Circle"``.
    known_measure : str, optional
        Identifier of the matching entry in :mod:`pdlocal.measures`.
    params : dict
    """

    id: str
    half_width: float
    evaluator: Callable = field(repr=False)
    is_real: bool = True
    normalization: float = 1.0
    group: str = REAL_LINE
    known_measure: Optional[str] = None
    params: dict = field(default_factory=dict)

    def __call__(self, x, closed: bool = False):
        x = np.asarray(x, dtype=float)
        if self.group == CIRCLE:
            x = x - np.round(x)
        else:
            a = self.half_width
            bad = np.abs(x) > a if closed else np.abs(x) >= a
            if np.any(bad):
                worst = float(np.max(np.abs(x)))
                raise DomainError(
                    f"{self.id} is defined only on (-{a:g}, {a:g}); got |x| = {worst:g}")
        out = self.evaluator(x)
        if self.is_real:
            return np.real(out)
        return np.asarray(out, dtype=complex)

    def kernel(self, x, y, closed: bool = False):
        """Kernel matrix ``K(x_i, y_j) = F(x_i - y_j)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return self(x[:, None] - y[None, :], closed=closed)

    @property
    def domain(self):
        return (-self.half_width, self.half_width)

    def conj_symmetry_defect(self, x) -> float:
        """``max |F(-x) - conj(F(x))|`` over the sample ``x``."""
        x = np.asarray(x, dtype=float)
        return float(np.max(np.abs(self(-x) - np.conj(self(x)))))


@dataclass(frozen=True)
class TwoPointKernel:
    """A kernel ``K(x, y)`` that is not of difference form (min-kernel etc.)."""

    id: str
    lo: float
    hi: float
    func: Callable = field(repr=False)
    is_real: bool = True

    def kernel(self, x, y, closed: bool = True):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return self.func(x[:, None], y[None, :])


@dataclass(frozen=True)
class GramMatrix:
    points: np.ndarray
    entries: np.ndarray
    source: str

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class PsdReport:
    is_psd: bool
    min_eigenvalue: float
    numerical_rank: int
    eigenvalues: np.ndarray = field(repr=False)


# -- closed forms -----------------------------------------------------------

def _f1(x):
    return 1.0 / (1.0 + x * x)


def _f2(x):
    return 1.0 - np.abs(x)


def _f3(x):
    return np.exp(-np.abs(x))


def _f4(x):
    return np.sinc(x) ** 2


def _f5(x):
    return np.exp(-0.5 * x * x)


def _f6(x):
    return np.cos(x)


def _im14(x):
    return np.exp(-1j * x) + 1.0 / (1.0 - 1j * x)


def _im5(x):
    return 0.5 * (np.exp(-1j * x) + np.exp(2j * x))


def make_fp(p: float = 0.5, a: float = 0.5) -> PdFunction:
    """``F_p(x) = 1 - |x|**p`` on ``(-a, a)``; p.d. for ``0 < p <= 1``."""
    if not 0.0 < p <= 2.0:
        raise ValueError("p must lie in (0, 2]")
    return PdFunction("Fp", a, lambda x: 1.0 - np.abs(x) ** p, params={"p": p})


def make_e1(eps: float = 0.5) -> PdFunction:
    """Restriction of ``exp(i 2 pi x)`` to ``(-eps, eps)``."""
    return PdFunction("e1", eps, lambda x: np.exp(2j * np.pi * x), is_real=False,
                      known_measure="e1", params={"eps": eps})


def make_splitting(n_terms: int = 20) -> PdFunction:
    from .measures import splitting_F

    return PdFunction("splitting", 2.0, lambda x: splitting_F(x, n_terms), is_real=False,
                      known_measure="splitting", params={"n_terms": n_terms})


_TABLE = {
    "F1": dict(half_width=1.0, evaluator=_f1, known_measure="mu1"),
    "F2": dict(half_width=0.5, evaluator=_f2, known_measure="mu2"),
    "F3": dict(half_width=1.0, evaluator=_f3, known_measure="mu3"),
    "F4": dict(half_width=0.5, evaluator=_f4, known_measure="mu4"),
    # the table prints |x|>1 for F5; read as |x|<1
    "F5": dict(half_width=1.0, evaluator=_f5, known_measure="mu5"),
    "F6": dict(half_width=math.pi / 4, evaluator=_f6, known_measure="mu6"),
    "im14": dict(half_width=1.0, evaluator=_im14, is_real=False, normalization=2.0,
                 known_measure="im14"),
    "im5": dict(half_width=1.0, evaluator=_im5, is_real=False, known_measure="im5"),
}

CATALOG_IDS = ("F1", "F2", "F3", "F4", "F5", "F6", "Fp", "e1", "im14", "im5", "splitting")


def get(id: str, **params) -> PdFunction:
    """Return the catalog entry ``id`` (optionally with constructor params)."""
    if id in _TABLE:
        return PdFunction(id=id, **_TABLE[id])
    if id == "Fp":
        return make_fp(**params)
    if id == "e1":
        return make_e1(**params)
    if id == "splitting":
        return make_splitting(**params)
    raise KeyError(f"unknown catalog id {id!r}; known: {', '.join(CATALOG_IDS)}")


def catalog_eval(id: str, x):
    """Evaluate catalog entry ``id`` at ``x`` (scalar or array).

    Raises :class:`DomainError` outside ``(-a, a)``; the functions are not
    defined there.
    """
    F = get(id)
    val = F(x)
    return val.item() if np.ndim(val) == 0 else val


# -- kernels that are not of difference form --------------------------------

def min_kernel(a: float = 0.5) -> TwoPointKernel:
    """The Brownian covariance ``E(x, y) = min(x, y)`` on ``[0, a]``."""
    return TwoPointKernel("E", 0.0, a, np.minimum)


def affine_kernel(a: float = 0.5) -> TwoPointKernel:
    """``L(x, y) = 1 - x - y``, the rank-two part of ``F2``."""
    return TwoPointKernel("L", 0.0, a, lambda x, y: 1.0 - x - y)


def k_plus_kernel(a: float = 1.0) -> TwoPointKernel:
    """``K_+(x, y) = exp(-(x + y))`` on ``[0, a]``."""
    return TwoPointKernel("K+", 0.0, a, lambda x, y: np.exp(-(x + y)))


# -- Gram matrices ----------------------------------------------------------

def gram(F: PdFunction, points) -> GramMatrix:
    """Gram matrix ``(F(x_i - x_j))`` on a grid inside ``[0, a)``.

    Points are sorted; duplicates and points outside ``[0, a)`` raise
    :class:`DomainError`.
    """
    pts = np.sort(np.asarray(points, dtype=float).ravel())
    if pts.size == 0:
        raise DomainError("gram needs at least one point")
    if pts.size > 1 and np.any(np.diff(pts) <= 0):
        raise DomainError("gram points must be distinct")
    if F.group == REAL_LINE and (pts[0] < 0 or pts[-1] >= F.half_width):
        raise DomainError(f"gram points must lie in [0, {F.half_width:g}) for {F.id}")
    G = F.kernel(pts, pts)
    return GramMatrix(points=pts, entries=G, source=F.id)


def psd_check(G, tol: float = PSD_TOL, rank_tol: float = RANK_TOL) -> PsdReport:
    """Relative positive-semidefiniteness test.

    ``is_psd`` holds iff the smallest eigenvalue is at least
    ``-tol * max|eig|``; the numerical rank counts eigenvalues above
    ``rank_tol * max eig``.
    """
    M = G.entries if isinstance(G, GramMatrix) else np.asarray(G)
    scale = max(float(np.max(np.abs(M))), 1e-300)
    if np.max(np.abs(M - M.conj().T)) > HERMITIAN_TOL * scale:
        raise StructuralError("matrix is not Hermitian")
    ev = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    radius = max(float(np.max(np.abs(ev))), 1e-300)
    top = float(ev[-1])
    rank = int(np.sum(ev > rank_tol * top)) if top > 0 else 0
    return PsdReport(is_psd=bool(ev[0] >= -tol * radius), min_eigenvalue=float(ev[0]),
                     numerical_rank=rank, eigenvalues=ev)


# -- closure operations -----------------------------------------------------

def pointwise_product(F: PdFunction, G: PdFunction) -> PdFunction:
    """The Schur product ``x -> F(x) G(x)`` on the common domain."""
    if F.group != G.group:
        raise StructuralError(f"cannot multiply a {F.group} function by a {G.group} function")
    fe, ge = F.evaluator, G.evaluator
    return PdFunction(id=f"{F.id}*{G.id}", half_width=min(F.half_width, G.half_width),
                      evaluator=lambda x: fe(x) * ge(x), is_real=F.is_real and G.is_real,
                      normalization=F.normalization * G.normalization, group=F.group)


@dataclass(frozen=True)
class ReImSplit:
    re: PdFunction
    im: Callable


def real_imag_split(F: PdFunction) -> ReImSplit:
    """Split ``F`` into its p.d. real part and its odd imaginary part."""
    fe = F.evaluator
    re = replace(F, id=f"Re({F.id})", evaluator=lambda x: np.real(fe(x)), is_real=True,
                 known_measure=None)

    def im(x):
        x = np.asarray(x, dtype=float)
        return np.imag(F(x)) if not F.is_real else np.zeros_like(x)

    return ReImSplit(re=re, im=im)


def scale_imag(F: PdFunction, m: float) -> PdFunction:
    """``F_m = Re F + i m Im F``; p.d. whenever ``|m| <= 1``."""
    if m == 1:
        return F
    fe = F.evaluator
    return replace(F, id=f"{F.id}[m={m:g}]",
                   evaluator=lambda x: np.real(fe(x)) + 1j * m * np.imag(fe(x)),
                   is_real=F.is_real or m == 0, known_measure=None)


# -- periodization ----------------------------------------------------------

def exp_global(a: float = 1.0):
    """``t -> exp(-a|t|)`` on the whole line (the extension used by periodize)."""
    return lambda t: np.exp(-a * np.abs(np.asarray(t, dtype=float)))


def exp_tail_bound(a: float = 1.0):
    """Bound on ``sum_{|n|>N} exp(-a|t-n|)`` for ``|t| <= 1/2``."""
    return lambda N: 2.0 * math.exp(-a * (N + 0.5)) / (1.0 - math.exp(-a))


def periodize(F_global: Callable, n_terms: int, tail_bound: Optional[Callable] = None,
              tol: Optional[float] = None, id: str = "periodized") -> PdFunction:
    """Periodize a decaying function: ``t -> sum_{|n|<=N} F(t - n)``.

    Parameters
    ----------
    F_global : callable
        Function on the whole line.
    n_terms : int
        Truncation ``N``.
    tail_bound : callable, optional
        ``N -> bound`` on the omitted terms. With ``tol`` given, a bound above
        ``tol`` raises :class:`ConvergenceError`.
    """
    if tail_bound is not None and tol is not None:
        b = tail_bound(n_terms)
        if b > tol:
            raise ConvergenceError(f"tail bound {b:.3g} exceeds tol {tol:.3g} at N={n_terms}")
    shifts = np.arange(-n_terms, n_terms + 1, dtype=float)

    def ev(t):
        t = np.asarray(t, dtype=float)
        # sum small terms first
        order = np.argsort(-np.abs(shifts))
        return np.sum(F_global(t[..., None] - shifts[order]), axis=-1)

    val0 = float(np.real(ev(np.array(0.0))))
    return PdFunction(id=id, half_width=0.5, evaluator=ev, is_real=True,
                      normalization=val0, group=CIRCLE, params={"n_terms": n_terms})


def lattice_series(density: Callable, t, K: int):
    """Dual form of a periodization: ``sum_{|k|<=K} 2 pi M(2 pi k) exp(i 2 pi k t)``.

    By Poisson summation this equals ``sum_n F(t - n)`` when
    ``F(x) = int exp(i lam x) M(lam) dlam``.
    """
    t = np.asarray(t, dtype=float)
    k = np.arange(-K, K + 1, dtype=float)
    coef = 2.0 * np.pi * density(2.0 * np.pi * k)
    order = np.argsort(-np.abs(k))
    return np.sum(coef[order] * np.exp(2j * np.pi * k[order] * t[..., None]), axis=-1)


# -- JSON function specs ----------------------------------------------------

def from_spec(spec: dict) -> PdFunction:
    """Build a function from ``{id, half_width, kind, params}``.

    ``kind`` is ``closed_form`` (a catalog id) or ``samples`` with
    ``params = {"x": [...], "re": [...], "im": [...]}`` interpolated
    linearly. Samples given only for ``x >= 0`` are mirrored with the
    Hermitian symmetry ``F(-x) = conj F(x)``.
    """
    kind = spec.get("kind", "closed_form")
    params = dict(spec.get("params") or {})
    if kind == "closed_form":
        F = get(spec["id"], **params)
        if "half_width" in spec and spec["half_width"] is not None:
            F = replace(F, half_width=float(spec["half_width"]))
        return F
    if kind != "samples":
        raise ValueError(f"unknown function kind {kind!r}")
    x = np.asarray(params["x"], dtype=float)
    re = np.asarray(params["re"], dtype=float)
    im = np.asarray(params.get("im", np.zeros_like(x)), dtype=float)
    order = np.argsort(x)
    x, re, im = x[order], re[order], im[order]
    if x[0] >= 0:
        keep = x > 0
        x = np.concatenate([-x[keep][::-1], x])
        re = np.concatenate([re[keep][::-1], re])
        im = np.concatenate([-im[keep][::-1], im])
    a = float(spec.get("half_width", x[-1]))
    is_real = bool(np.all(im == 0))

    def ev(t):
        return np.interp(t, x, re) + 1j * np.interp(t, x, im)

    return PdFunction(id=spec.get("id", "samples"), half_width=a, evaluator=ev,
                      is_real=is_real, normalization=float(np.interp(0.0, x, re)))
