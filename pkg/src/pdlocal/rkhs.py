"""RKHS norms, membership ladders, deficiency indices and the order K << F.

Elements of the RKHS ``H_F`` on ``Omega = (0, a)`` are built from
convolutions ``F_phi(x) = int phi(y) F(x - y) dy``. Two independent ways of
computing norms are provided: the double-integral (quadrature) form and,
for ``F2`` and ``F3``, the energy form plus a boundary term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .catalog import PdFunction, get
from .errors import DomainError
from .measures import SpectralMeasure, get_measure, second_moment_classify, _density_integral
from .quadrature import composite_gauss

STABLE_RTOL = 0.05
DIVERGE_FACTOR = 2.0
REG_RTOL = 1e-12


def _panels(lo: float, hi: float, breaks=(), n_panels: int = 32):
    pts = [p for p in breaks if lo < p < hi]
    br = np.unique(np.concatenate([np.linspace(lo, hi, n_panels + 1), pts]))
    return br


def _domain_a(F: PdFunction, a: Optional[float]) -> float:
    a = F.half_width if a is None else a
    if a > F.half_width * (1 + 1e-15):
        raise DomainError(f"interval (0, {a:g}) exceeds the domain of {F.id}")
    return a


# -- convolutions and inner products -----------------------------------------

def f_phi(F: PdFunction, phi: Callable, x, a: Optional[float] = None, breaks=(),
          n_panels: int = 32, n: int = 16):
    """``F_phi(x) = int_0^a phi(y) F(x - y) dy`` for each ``x`` in ``(0, a)``.

    ``breaks`` lists points where ``phi`` is not smooth; the kink of ``F`` at
    ``y = x`` is always placed on a panel boundary.
    """
    a = _domain_a(F, a)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((xs < 0) | (xs > a)):
        raise DomainError("x must lie in [0, a]")
    out = np.empty(xs.shape, dtype=complex)
    for i, xi in enumerate(xs):
        y, w = composite_gauss(_panels(0.0, a, (*breaks, xi), n_panels), n)
        out[i] = np.sum(w * phi(y) * F(xi - y, closed=True))
    if F.is_real and np.isrealobj(phi(np.array([0.5 * a]))):
        out = out.real
    return out[0] if np.ndim(x) == 0 else out


def rkhs_inner(F: PdFunction, phi: Callable, psi: Callable, a: Optional[float] = None,
               breaks=(), n_panels: int = 32, n: int = 16):
    """``<F_phi, F_psi> = int int conj(phi(x)) psi(y) F(x - y) dx dy``.

    The inner integral is split at ``y = x`` so kink kernels keep full
    Gauss accuracy.
    """
    a = _domain_a(F, a)
    x, w = composite_gauss(_panels(0.0, a, breaks, n_panels), n)
    inner = np.asarray(f_phi(F, psi, x, a, breaks, n_panels, n), dtype=complex)
    val = np.sum(w * np.conj(phi(x)) * inner)
    return complex(val)


def fourier_norm(density: Callable, phi: Callable, a: float, lam_max: float = 400.0,
                 n_panels: int = 64):
    """``int |phihat(lam)|**2 M(lam) dlam`` with ``phihat`` on ``(0, a)``."""
    y, wy = composite_gauss(np.linspace(0.0, a, n_panels + 1), 16)
    py = wy * phi(y)
    lam, wl = composite_gauss(np.linspace(-lam_max, lam_max, int(4 * lam_max) + 1), 16)
    ph = np.exp(-1j * np.outer(lam, y)) @ py
    return float(np.sum(wl * np.abs(ph) ** 2 * density(lam)))


# -- membership via hat-function ladders --------------------------------------

def _bspline3(u):
    u = np.abs(u)
    return np.where(u < 1, (4 - 6 * u ** 2 + 3 * u ** 3) / 6,
                    np.where(u < 2, (2 - u) ** 3 / 6, 0.0))


def hat_gram(F: PdFunction, a: float, level: int):
    """Gram matrix ``<F_psi_i, F_psi_j>`` of interior hat functions on ``2**level`` cells.

    The autocorrelation of a hat of half-width ``h`` is ``h B3(s/h)``, so the
    matrix is Toeplitz with symbol ``h**2 int B3(u) F((k+u) h) du``.
    """
    m = 2 ** level
    h = a / m
    n = m - 1
    u, wu = composite_gauss(np.arange(-2.0, 2.01, 1.0), 12)
    wb = wu * _bspline3(u)
    ks = np.arange(-(n - 1), n)
    t = (ks[:, None] + u[None, :]) * h
    g = h * h * (F(t, closed=True) @ wb)
    idx = np.arange(n)
    G = g[(idx[:, None] - idx[None, :]) + (n - 1)]
    return G


def hat_moments(xi: Callable, a: float, level: int, n: int = 12):
    """``m_i = int psi_i(x) xi(x) dx`` for the interior hats."""
    m = 2 ** level
    h = a / m
    x, w = composite_gauss(np.linspace(0.0, a, m + 1), n)
    vals = w * xi(x)
    cell = np.repeat(np.arange(m), n)
    loc = (x - cell * h) / h  # position inside cell in [0, 1]
    # hat i rises on cell i-1 and falls on cell i (i = 1..m-1)
    rise = np.bincount(cell, weights=np.real(vals * loc), minlength=m) + \
        1j * np.bincount(cell, weights=np.imag(vals * loc), minlength=m)
    fall = np.bincount(cell, weights=np.real(vals * (1 - loc)), minlength=m) + \
        1j * np.bincount(cell, weights=np.imag(vals * (1 - loc)), minlength=m)
    return rise[:-1] + fall[1:]


def _rayleigh_sup(G: np.ndarray, m: np.ndarray, rtol: float = REG_RTOL):
    """``sup_c |c^T m|**2 / (c^H G c)`` restricted to the range of ``G``."""
    H = G.T
    H = 0.5 * (H + H.conj().T)
    ev, V = np.linalg.eigh(H)
    keep = ev > rtol * ev[-1]
    proj = V[:, keep].conj().T @ m
    val = float(np.sum(np.abs(proj) ** 2 / ev[keep]))
    return val, bool(np.any(~keep))


@dataclass(frozen=True)
class MembershipResult:
    constant_ladder: list
    in_rkhs: str  # "yes" | "no" | "inconclusive"
    regularized: bool = False


def ladder_verdict(values: Sequence[float]) -> str:
    """``yes`` if the last refinement changes by < 5 %, ``no`` if the last two
    refinements each grow by at least 2x, ``inconclusive`` otherwise."""
    v = list(values)
    if len(v) >= 3 and v[-2] >= DIVERGE_FACTOR * v[-3] and v[-1] >= DIVERGE_FACTOR * v[-2]:
        return "no"
    if len(v) >= 2 and abs(v[-1] - v[-2]) < STABLE_RTOL * abs(v[-2]):
        return "yes"
    return "inconclusive"


def membership_test(F: PdFunction, xi: Callable, levels: Sequence[int] = (3, 4, 5, 6, 7),
                    a: Optional[float] = None) -> MembershipResult:
    """Best constant ``A0`` with ``|int psi xi|**2 <= A0 ||F_psi||**2`` on hat ladders.

    ``A0`` on each level is the generalized Rayleigh quotient of the moment
    vector against the hat Gram matrix. For members of ``H_F`` it increases
    to ``||xi||**2``; for non-members it grows without bound.
    """
    a = _domain_a(F, a)
    ladder, reg = [], False
    for lv in levels:
        G = hat_gram(F, a, lv)
        mom = hat_moments(xi, a, lv)
        A0, r = _rayleigh_sup(G, mom)
        reg = reg or r
        ladder.append({"grid_size": 2 ** lv - 1, "A0": A0})
    verdict = ladder_verdict([d["A0"] for d in ladder])
    if reg and verdict == "yes":
        # a truncated pencil saturates; stabilization is then no evidence
        verdict = "inconclusive"
    return MembershipResult(ladder, verdict, reg)


# -- energy forms for F2 and F3 ---------------------------------------------

@dataclass(frozen=True)
class RkhsNorm:
    energy_part: float
    boundary_part: float
    total: float
    method: str


ENERGY_DOMAINS = {"F2": 0.5, "F3": 1.0}


def _energy_pieces(F_id, g, dg, h, dh, a, breaks, n_panels=32, n=16):
    x, w = composite_gauss(_panels(0.0, a, breaks, n_panels), n)
    gd, hd = np.conj(dg(x)), dh(x)
    if F_id == "F2":
        energy = 0.5 * np.sum(w * gd * hd)
        g0 = g(np.array([0.0, a]))
        h0 = h(np.array([0.0, a]))
        boundary = np.conj(g0[0] + g0[1]) * (h0[0] + h0[1]) / 3.0
    elif F_id == "F3":
        energy = 0.5 * np.sum(w * (gd * hd + np.conj(g(x)) * h(x)))
        g0 = np.conj(g(np.array([0.0, a])))
        h0 = h(np.array([0.0, a]))
        boundary = 0.5 * (g0[0] * h0[0] + g0[1] * h0[1])
    else:
        raise ValueError(f"energy form available only for F2 and F3, not {F_id!r}")
    return complex(energy), complex(boundary)


def energy_norm(F_id: str, h: Callable, dh: Callable, a: Optional[float] = None,
                breaks=()) -> RkhsNorm:
    """Energy plus boundary decomposition of ``||h||**2`` in ``H_F2`` or ``H_F3``.

    ``F3`` on ``(0, a)``: ``(int |h'|**2 + |h|**2)/2 + (|h(0)|**2 + |h(a)|**2)/2``.
    ``F2`` on ``(0, 1/2)``: ``int |h'|**2 / 2 + |h(0) + h(1/2)|**2 / 3``; on
    kernel vectors the boundary term equals the normal-derivative pairing
    ``(h_n(0) h(0) + h_n(1/2) h(1/2))/2``.

    ``breaks`` are the points where ``h'`` jumps.
    """
    if dh is None:
        raise ValueError("derivative samples are required")
    a = ENERGY_DOMAINS[F_id] if a is None else a
    e, b = _energy_pieces(F_id, h, dh, h, dh, a, breaks)
    return RkhsNorm(energy_part=e.real, boundary_part=b.real, total=e.real + b.real,
                    method="energy_form")


def energy_inner(F_id: str, g, dg, h, dh, a: Optional[float] = None, breaks=()) -> complex:
    a = ENERGY_DOMAINS[F_id] if a is None else a
    e, b = _energy_pieces(F_id, g, dg, h, dh, a, breaks)
    return e + b


def kernel_vector(F_id: str, x0: float):
    """``F(. - x0)`` and its derivative for ``F2`` or ``F3``."""
    if F_id == "F2":
        return (lambda y: 1.0 - np.abs(y - x0)), (lambda y: -np.sign(y - x0))
    if F_id == "F3":
        return (lambda y: np.exp(-np.abs(y - x0))), \
            (lambda y: -np.sign(y - x0) * np.exp(-np.abs(y - x0)))
    raise ValueError(F_id)


def reproducing_check(F_id: str, x: float, xi: Callable, dxi: Callable,
                      a: Optional[float] = None, breaks=()) -> float:
    """``|<F_x, xi> - xi(x)|`` with the inner product in energy form."""
    k, dk = kernel_vector(F_id, x)
    val = energy_inner(F_id, k, dk, xi, dxi, a, (*breaks, x))
    return float(abs(val - xi(np.array([x]))[0]))


def kernel_span_norm(F: PdFunction, points, coeffs) -> RkhsNorm:
    """``||sum c_i F(. - x_i)||**2 = c^H G c`` (the quadrature form)."""
    pts = np.asarray(points, dtype=float)
    c = np.asarray(coeffs)
    G = F.kernel(pts, pts, closed=True)
    # <F_{x_i}, F_{x_j}> = F(x_j - x_i)
    val = float(np.real(np.conj(c) @ G.T @ c))
    return RkhsNorm(energy_part=val, boundary_part=0.0, total=val, method="quadrature_form")


# -- deficiency indices ---------------------------------------------------------

@dataclass(frozen=True)
class DeficiencyReport:
    F_id: str
    indices: Optional[tuple]
    verdict_basis: str
    evidence_plus: list = field(default_factory=list)
    evidence_minus: list = field(default_factory=list)
    second_moment: Optional[str] = None
    weighted_integral: Optional[float] = None

    def to_json(self):
        return {"F_id": self.F_id, "indices": list(self.indices) if self.indices else None,
                "basis": self.verdict_basis,
                "ladders": [{"grid_size": d["grid_size"], "A0": d["A0"]} for d in self.evidence_plus],
                "ladders_minus": self.evidence_minus, "second_moment": self.second_moment}


def exp_weight_integral(mu: SpectralMeasure, a: float) -> float:
    """``int (e^{2a} + 1 - 2 e^a cos(lam a)) / (1 + lam**2) dmu(lam)``.

    Finite for every finite measure (the weight is bounded), so it is
    reported as evidence only.
    """
    wfun = lambda l: (math.exp(2 * a) + 1 - 2 * math.exp(a) * np.cos(l * a)) / (1 + l * l)
    val = sum(w * float(wfun(np.array(l))) for l, w in mu.atoms)
    if mu.density is not None:
        val += _density_integral(mu.density, wfun, -math.inf, math.inf)
    if mu.cantor is not None:
        from .measures import cantor_atoms

        locs, ws = cantor_atoms(12, mu.cantor.half_width)
        val += mu.cantor.weight * float(np.sum(ws * wfun(locs)))
    return float(val)


def deficiency_classify(F: PdFunction, levels: Sequence[int] = (3, 4, 5, 6),
                        with_ladders: bool = True) -> DeficiencyReport:
    """Classify ``D^(F)`` as ``(0, 0)`` or ``(1, 1)``.

    With a known spectral measure the indices are ``(1, 1)`` exactly when
    ``int lam**2 dmu`` diverges (decided from the declared density tail).
    Ladders for ``e^{-x}`` and ``e^{x}`` are attached as evidence and decide
    the verdict when no measure is known.
    """
    a = F.half_width
    plus = minus = []
    if with_ladders:
        plus = membership_test(F, lambda x: np.exp(-x), levels, a).constant_ladder
        minus = membership_test(F, lambda x: np.exp(x), levels, a).constant_ladder
    if F.known_measure is not None:
        mu = get_measure(F.known_measure)
        rep = second_moment_classify(mu)
        return DeficiencyReport(F.id, rep.predicted_indices, "closed_form_integral", plus, minus,
                                rep.second_moment_finite, exp_weight_integral(mu, a))
    if not plus:
        plus = membership_test(F, lambda x: np.exp(-x), levels, a).constant_ladder
    verdict = ladder_verdict([d["A0"] for d in plus])
    idx = {"yes": (1, 1), "no": (0, 0)}.get(verdict)
    return DeficiencyReport(F.id, idx, "ladder_heuristic", plus, minus)


# -- the order K << F -----------------------------------------------------------

@dataclass(frozen=True)
class OrderingResult:
    A_min: float
    dominated: str
    ladder: list = field(default_factory=list)
    infinite: bool = False


def ordering_constant(K, F, grid, rtol: float = REG_RTOL) -> OrderingResult:
    """Largest ``A`` in ``c^H G_K c <= A c^H G_F c`` on the range of ``G_F``.

    ``K`` and ``F`` are anything with a ``kernel(x, y)`` method. Directions
    in the null space of ``G_F`` on which ``G_K`` does not vanish make the
    constant infinite.
    """
    x = np.asarray(grid, dtype=float)
    GK = np.asarray(K.kernel(x, x))
    GF = np.asarray(F.kernel(x, x))
    GK = 0.5 * (GK + GK.conj().T)
    GF = 0.5 * (GF + GF.conj().T)
    ev, V = np.linalg.eigh(GF)
    keep = ev > rtol * ev[-1]
    infinite = False
    if np.any(~keep):
        N0 = V[:, ~keep]
        leak = np.linalg.norm(N0.conj().T @ GK @ N0, 2)
        infinite = bool(leak > 1e-8 * np.linalg.norm(GK, 2))
    P = V[:, keep] / np.sqrt(ev[keep])
    M = P.conj().T @ GK @ P
    A = float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[-1])
    return OrderingResult(A_min=math.inf if infinite else A,
                          dominated="no" if infinite else "inconclusive", infinite=infinite)


def ordering_ladder(K, F, a: float, sizes: Sequence[int] = (4, 8, 16, 32, 64)) -> OrderingResult:
    """``ordering_constant`` on refining uniform grids in ``(0, a)`` with a verdict."""
    ladder = []
    for n in sizes:
        grid = a * (np.arange(n) + 0.5) / n
        r = ordering_constant(K, F, grid)
        ladder.append({"grid_size": n, "A0": r.A_min})
        if r.infinite:
            return OrderingResult(math.inf, "no", ladder, True)
    verdict = ladder_verdict([d["A0"] for d in ladder])
    return OrderingResult(ladder[-1]["A0"], verdict, ladder)
