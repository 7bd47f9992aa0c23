"""Finite positive measures on the line and their Bochner transforms.

A :class:`SpectralMeasure` is a finite sum of atoms, at most one
absolutely continuous density from a small family of closed forms (or a
table) and an optional middle-third Cantor component. ``bochner_eval``
integrates ``exp(i lam x)`` against the measure numerically; the
closed-form characteristic functions are deliberately not used there so
that the transform can serve as an independent check of catalog formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import ResolutionError
from .quadrature import adaptive_gauss, composite_gauss

DENSITY_KINDS = ("cauchy", "gaussian", "fejer", "laplace", "triangle", "indicator", "table")


@dataclass(frozen=True)
class Density:
    """Absolutely continuous part ``M(lam) dlam``.

    ``params["weight"]`` scales the unit-mass shape (default 1). ``tail`` is
    the declared exponent ``t`` with ``M(lam) = O(|lam|**-t)``; ``inf`` means
    faster than any power.
    """

    kind: str
    params: dict = field(default_factory=dict)
    tail: float = math.inf

    def __post_init__(self):
        if self.kind not in DENSITY_KINDS:
            raise ValueError(f"unknown density kind {self.kind!r}")

    @property
    def weight(self) -> float:
        if self.kind == "table":
            lam = np.asarray(self.params["lam"], dtype=float)
            val = np.asarray(self.params["values"], dtype=float)
            return float(np.trapezoid(val, lam))
        return float(self.params.get("weight", 1.0))

    @property
    def support(self):
        p, k = self.params, self.kind
        if k == "triangle":
            W = p.get("half_width", 1.0)
            return (-W, W)
        if k == "indicator":
            return (p["lo"], p["hi"])
        if k == "table":
            lam = p["lam"]
            return (float(min(lam)), float(max(lam)))
        if k == "laplace" and p.get("side", "both") == "positive":
            return (0.0, math.inf)
        return (-math.inf, math.inf)

    @property
    def breaks(self):
        """Interior points where ``M`` is not smooth."""
        if self.kind in ("laplace", "triangle"):
            return (0.0,)
        return ()

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        p, w = self.params, self.params.get("weight", 1.0)
        k = self.kind
        if k == "cauchy":
            s = p.get("scale", 1.0)
            return w * s / (np.pi * (s * s + lam * lam))
        if k == "gaussian":
            s = p.get("sigma", 1.0)
            return w * np.exp(-0.5 * (lam / s) ** 2) / (s * math.sqrt(2 * np.pi))
        if k == "fejer":
            W = p.get("width", 1.0)
            return w * W / (2 * np.pi) * np.sinc(W * lam / (2 * np.pi)) ** 2
        if k == "laplace":
            b = p.get("scale", 1.0)
            if p.get("side", "both") == "positive":
                return np.where(lam >= 0, w * np.exp(-np.abs(lam) / b) / b, 0.0)
            return w * np.exp(-np.abs(lam) / b) / (2 * b)
        if k == "triangle":
            W = p.get("half_width", 1.0)
            return w * np.clip(1.0 - np.abs(lam) / W, 0.0, None) / W
        if k == "indicator":
            lo, hi = p["lo"], p["hi"]
            return np.where((lam >= lo) & (lam <= hi), w / (hi - lo), 0.0)
        xs = np.asarray(p["lam"], dtype=float)
        return np.interp(lam, xs, np.asarray(p["values"], dtype=float), left=0.0, right=0.0)


@dataclass(frozen=True)
class CantorPart:
    """Middle-third Cantor measure on ``[-h, h]`` with total mass ``weight``.

    It is the law of ``sum_n eps_n 2h/3**n`` with independent fair signs, so
    its transform is ``prod_n cos(2 h x / 3**n)``. ``h = pi`` reproduces the
    product ``prod cos(2 pi x / 3**n)``.
    """

    weight: float = 1.0
    half_width: float = math.pi

    @property
    def variance(self) -> float:
        # sum_n (2h/3^n)^2 = 4 h^2 / 8
        return 0.5 * self.half_width ** 2


@dataclass(frozen=True)
class SpectralMeasure:
    atoms: tuple = ()
    density: Optional[Density] = None
    cantor: Optional[CantorPart] = None
    id: str = "mu"

    @property
    def total_mass(self) -> float:
        m = sum(w for _, w in self.atoms)
        if self.density is not None:
            m += self.density.weight
        if self.cantor is not None:
            m += self.cantor.weight
        return float(m)

    def supports(self):
        """Declared support pieces: atoms, density interval, Cantor interval."""
        out = [(float(l), float(l)) for l, _ in self.atoms]
        if self.density is not None:
            out.append(tuple(float(v) for v in self.density.support))
        if self.cantor is not None:
            h = self.cantor.half_width
            out.append((-h, h))
        return out

    def tail_mass(self, R: float) -> float:
        """Mass of ``{|lam| > R}``."""
        m = sum(w for l, w in self.atoms if abs(l) > R)
        if self.cantor is not None and self.cantor.half_width > R:
            m += self.cantor.weight
        if self.density is not None:
            m += max(self.density.weight - _density_integral(self.density, lambda l: 1.0, -R, R), 0.0)
        return float(m)


# -- Bochner transform ------------------------------------------------------

def _half_line_integral(D: Density, g, start: float, sign: float, R: float = 2.0e4):
    """``int g M`` over ``start + sign * [0, inf)`` for bounded ``g``.

    Panels of unit width resolve oscillating densities out to ``R``; a
    power-law tail ``c lam**-t`` beyond ``R`` is added analytically with ``c``
    averaged over the last stretch, faster tails by QUADPACK.
    """
    f = lambda l: np.real(g(l) * D(l))
    end = start + sign * R
    lo, hi = min(start, end), max(start, end)
    total = 0.0
    for p in np.arange(lo, hi, 2.0e3):
        nodes, w = composite_gauss(np.linspace(p, min(p + 2.0e3, hi), 2001), 16)
        total += float(np.sum(w * f(nodes)))
    if math.isfinite(D.tail) and D.tail > 1:
        lam = end - sign * np.linspace(0.0, 2.0e3, 400001)
        c = float(np.mean(f(lam) * np.abs(lam) ** D.tail))
        total += c * abs(end) ** (1.0 - D.tail) / (D.tail - 1.0)
    else:
        a, b = (end, math.inf) if sign > 0 else (-math.inf, end)
        total += integrate.quad(lambda l: float(f(np.array(l))), a, b, limit=400, epsabs=1e-15)[0]
    return total


def _density_integral(D: Density, g, lo: float, hi: float, rtol: float = 1e-10):
    """``int_lo^hi g(lam) M(lam) dlam`` over the part of [lo, hi] in the support."""
    slo, shi = D.support
    lo, hi = max(lo, slo), min(hi, shi)
    if not hi > lo:
        return 0.0
    cuts = sorted({lo, hi, *[b for b in D.breaks if lo < b < hi]})
    if math.isinf(lo) and math.isinf(hi) and len(cuts) == 2:
        cuts = [lo, 0.0, hi]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if math.isinf(a) or math.isinf(b):
            total += _half_line_integral(D, g, b if math.isinf(a) else a, -1.0 if math.isinf(a) else 1.0)
        else:
            val, _ = adaptive_gauss(lambda l: g(l) * D(l), a, b, rtol=rtol,
                                    panels=max(1, int(b - a)))
            total += val
    return total


def _fourier_density(D: Density, x: float, quad: Optional[dict]):
    slo, shi = D.support
    if math.isfinite(slo) and math.isfinite(shi):
        n = 64
        panels = None
        if quad:
            n = int(quad.get("n", n))
            panels = quad.get("panels")
        if panels is None:
            panels = max(1, int(math.ceil((shi - slo) * abs(x) / (n * math.pi / 8.0))) + 1)
        spacing = (shi - slo) / (panels * n)
        if x != 0 and spacing >= math.pi / (4 * abs(x)):
            raise ResolutionError(
                f"node spacing {spacing:.3g} does not resolve frequency {x:g}")
        cuts = sorted({slo, shi, *[b for b in D.breaks if slo < b < shi]})
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            m = max(1, int(round(panels * (b - a) / (shi - slo))))
            f = lambda l: np.exp(1j * l * x) * D(l)
            val, _ = adaptive_gauss(f, a, b, n=n, rtol=1e-12, panels=m)
            total += val
        return complex(total)
    # infinite support: split the line at 0 and use QUADPACK's Fourier routine
    even = lambda l: D(np.array(l)) + D(np.array(-l))
    odd = lambda l: D(np.array(l)) - D(np.array(-l))
    if x == 0:
        # oscillating tails (Fejer) defeat plain QUADPACK; resolve [0, R] by panels
        R = 2.0e5
        head = 0.0
        for lo in np.arange(0.0, R, 2.0e4):
            nodes, w = composite_gauss(np.linspace(lo, lo + 2.0e4, 20001), 16)
            head += float(np.sum(w * even(nodes)))
        tail = 0.0
        if math.isfinite(D.tail) and D.tail > 1:
            # power-law tail: average lam**t * M over the last stretch, then
            # integrate the envelope c * lam**-t analytically
            lam = np.linspace(R - 2.0e3, R, 400001)
            c = float(np.mean(even(lam) * lam ** D.tail))
            tail = c * R ** (1.0 - D.tail) / (D.tail - 1.0)
        return complex(head + tail)
    ax = abs(x)
    re, _ = integrate.quad(lambda l: float(even(l)), 0, math.inf, weight="cos", wvar=ax,
                           limlst=200)
    im, _ = integrate.quad(lambda l: float(odd(l)), 0, math.inf, weight="sin", wvar=ax,
                           limlst=200)
    return complex(re, math.copysign(1.0, x) * im)


def cantor_char(x, n_terms: int, half_width: float = math.pi):
    """Finite product ``prod_{n=1}^{n_terms} cos(2 h x / 3**n)``; ``h = pi`` by default."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    x = np.asarray(x, dtype=float)
    scales = 2.0 * half_width / 3.0 ** np.arange(1, n_terms + 1)
    return np.prod(np.cos(x[..., None] * scales), axis=-1)


def cantor_atoms(level: int, half_width: float = math.pi):
    """Atoms of the level-``level`` approximation of the Cantor measure."""
    locs = np.zeros(1)
    for n in range(1, level + 1):
        step = 2.0 * half_width / 3.0 ** n
        locs = np.concatenate([locs - step, locs + step])
    return locs, np.full(locs.size, 2.0 ** -level)


def bochner_eval(mu: SpectralMeasure, x, quad: Optional[dict] = None,
                 cantor_terms: int = 40, cantor_method: str = "product"):
    """Bochner transform ``int exp(i lam x) dmu(lam)`` at each ``x``.

    Parameters
    ----------
    quad : dict, optional
        ``{"n": nodes per panel, "panels": count}`` for compactly supported
        densities; a grid too coarse for frequency ``x`` raises
        :class:`ResolutionError`.
    cantor_method : {"product", "atoms"}
        Evaluate the Cantor part through the cosine product or by summing
        the ``2**cantor_terms`` atoms of the IFS approximation.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(xs.shape, dtype=complex)
    for loc, w in mu.atoms:
        out += w * np.exp(1j * loc * xs)
    if mu.density is not None:
        out += np.array([_fourier_density(mu.density, float(v), quad) for v in xs])
    if mu.cantor is not None:
        c = mu.cantor
        if cantor_method == "product":
            out += c.weight * cantor_char(xs, cantor_terms, c.half_width)
        elif cantor_method == "atoms":
            locs, ws = cantor_atoms(cantor_terms, c.half_width)
            out += c.weight * np.array([np.sum(ws * np.cos(locs * v)) for v in xs])
        else:
            raise ValueError(f"unknown cantor_method {cantor_method!r}")
    return out[0] if np.ndim(x) == 0 else out


def check_mass(mu: SpectralMeasure, rtol: float = 1e-6) -> bool:
    """Declared total mass agrees with quadrature of the density."""
    m = sum(w for _, w in mu.atoms)
    if mu.density is not None:
        m += _density_integral(mu.density, lambda l: 1.0, -math.inf, math.inf)
    if mu.cantor is not None:
        m += mu.cantor.weight
    return abs(m - mu.total_mass) <= rtol * mu.total_mass


# -- splitting example ------------------------------------------------------

def splitting_F(x, n_terms: int = 20):
    """``(exp(-ix) + prod cos(2 pi x/3**n) + exp(3ix/2) sin(x/2)/(x/2)) / 3``."""
    x = np.asarray(x, dtype=float)
    sinc = np.sinc(x / (2 * np.pi))  # sin(x/2)/(x/2)
    return (np.exp(-1j * x) + cantor_char(x, n_terms) + np.exp(1.5j * x) * sinc) / 3.0


def splitting_measure(cantor_half_width: float = math.pi) -> SpectralMeasure:
    """The three-component measure behind :func:`splitting_F`.

    Atom at ``-1``, uniform density on ``[1, 2]`` and a Cantor part, each of
    mass 1/3. With the default ``h = pi`` the Bochner transform equals
    :func:`splitting_F`; ``h = 1/2`` gives the disjoint-support descriptor.
    """
    return SpectralMeasure(atoms=((-1.0, 1.0 / 3.0),),
                           density=Density("indicator", {"lo": 1.0, "hi": 2.0, "weight": 1.0 / 3.0}),
                           cantor=CantorPart(weight=1.0 / 3.0, half_width=cantor_half_width),
                           id="splitting")


def supports_disjoint(mu: SpectralMeasure) -> tuple[bool, float]:
    """Whether declared support pieces are pairwise disjoint, and the minimal gap."""
    pieces = sorted(mu.supports())
    gap = math.inf
    for (a0, b0), (a1, b1) in zip(pieces[:-1], pieces[1:]):
        gap = min(gap, a1 - b0)
    return gap > 0, gap


# -- second moment classifier -----------------------------------------------

@dataclass(frozen=True)
class MomentReport:
    second_moment_finite: str  # "finite" | "divergent" | "inconclusive"
    ladder: list
    predicted_indices: Optional[tuple]
    slope: Optional[float] = None
    basis: str = "declared_tail"


def truncated_second_moment(mu: SpectralMeasure, R: float) -> float:
    """``int_{|lam| <= R} lam**2 dmu``."""
    val = sum(w * l * l for l, w in mu.atoms if abs(l) <= R)
    if mu.density is not None:
        val += _density_integral(mu.density, lambda l: l * l, -R, R)
    if mu.cantor is not None:
        c = mu.cantor
        if R >= c.half_width:
            val += c.weight * c.variance
        else:
            locs, ws = cantor_atoms(14, c.half_width)
            keep = np.abs(locs) <= R
            val += c.weight * float(np.sum(ws[keep] * locs[keep] ** 2))
    return float(val)


def second_moment_classify(mu: SpectralMeasure, ladder: Sequence[float] = (10, 20, 40, 80, 160),
                           eps: float = 0.2) -> MomentReport:
    """Decide whether ``int lam**2 dmu`` is finite.

    A declared density tail exponent ``t`` decides analytically (finite iff
    ``t > 3``); atoms and the Cantor part always contribute finitely.
    Without a declared tail the log-log slope of the ladder increments per
    unit radius decides: ``<= -1-eps`` finite, ``>= -1+eps`` divergent,
    otherwise inconclusive.
    """
    R = np.asarray(ladder, dtype=float)
    if R.size < 4 or np.any(np.diff(R) <= 0):
        raise ValueError("ladder must be strictly increasing with at least 4 rungs")
    vals = [truncated_second_moment(mu, r) for r in R]
    rungs = [(float(r), v) for r, v in zip(R, vals)]
    D = mu.density
    if D is None or (math.isfinite(D.support[0]) and math.isfinite(D.support[1])):
        verdict, slope, basis = "finite", None, "declared_tail"
    elif D.tail is not None:
        verdict = "finite" if D.tail > 3 else "divergent"
        slope, basis = None, "declared_tail"
    else:
        inc = np.diff(vals) / np.diff(R)
        mid = 0.5 * (R[1:] + R[:-1])
        good = inc > 0
        if good.sum() < 2:
            verdict, slope = "finite", None
        else:
            slope = float(np.polyfit(np.log(mid[good]), np.log(inc[good]), 1)[0])
            if slope <= -1 - eps:
                verdict = "finite"
            elif slope >= -1 + eps:
                verdict = "divergent"
            else:
                verdict = "inconclusive"
        basis = "ladder_slope"
    pred = {"finite": (0, 0), "divergent": (1, 1)}.get(verdict)
    return MomentReport(verdict, rungs, pred, slope, basis)


# -- catalog measures (angular convention) ----------------------------------

def _measure_table():
    two_pi = 2 * np.pi
    return {
        "mu1": SpectralMeasure(density=Density("laplace", {"scale": 1.0}), id="mu1"),
        # (sin pi t/pi t)^2 dt in cycles becomes this Fejer density in lambda = 2 pi t
        "mu2": SpectralMeasure(density=Density("fejer", {"width": 1.0}, tail=2.0), id="mu2"),
        "mu3": SpectralMeasure(density=Density("cauchy", {"scale": 1.0}, tail=2.0), id="mu3"),
        "mu4": SpectralMeasure(density=Density("triangle", {"half_width": two_pi}), id="mu4"),
        "mu5": SpectralMeasure(density=Density("gaussian", {"sigma": 1.0}), id="mu5"),
        "mu6": SpectralMeasure(atoms=((-1.0, 0.5), (1.0, 0.5)), id="mu6"),
        "e1": SpectralMeasure(atoms=((two_pi, 1.0),), id="e1"),
        "im14": SpectralMeasure(atoms=((-1.0, 1.0),),
                                density=Density("laplace", {"scale": 1.0, "side": "positive"}),
                                id="im14"),
        "im5": SpectralMeasure(atoms=((-1.0, 0.5), (2.0, 0.5)), id="im5"),
        "splitting": splitting_measure(),
    }


MEASURE_IDS = ("mu1", "mu2", "mu3", "mu4", "mu5", "mu6", "e1", "im14", "im5", "splitting")


def get_measure(id: str) -> SpectralMeasure:
    table = _measure_table()
    if id not in table:
        raise KeyError(f"unknown measure id {id!r}; known: {', '.join(MEASURE_IDS)}")
    return table[id]


# -- JSON -------------------------------------------------------------------

def measure_from_json(doc: dict) -> SpectralMeasure:
    """Parse ``{atoms:[{loc,w}], density:{kind,params,tail}, cantor:{weight}, mass}``."""
    atoms = tuple((float(a["loc"]), float(a["w"])) for a in doc.get("atoms") or [])
    if any(w < 0 for _, w in atoms):
        raise ValueError("atom weights must be nonnegative")
    dens = None
    d = doc.get("density")
    if d:
        tail = d.get("tail", math.inf)
        tail = math.inf if tail in (None, "inf") else float(tail)
        dens = Density(d["kind"], dict(d.get("params") or {}), tail)
    cantor = None
    c = doc.get("cantor")
    if c:
        cantor = CantorPart(weight=float(c.get("weight", 1.0)),
                            half_width=float(c.get("half_width", math.pi)))
    mu = SpectralMeasure(atoms=atoms, density=dens, cantor=cantor, id=doc.get("id", "mu"))
    if "mass" in doc and doc["mass"] is not None:
        if abs(float(doc["mass"]) - mu.total_mass) > 1e-6 * max(1.0, mu.total_mass):
            raise ValueError(f"declared mass {doc['mass']} != computed {mu.total_mass}")
    return mu


def measure_to_json(mu: SpectralMeasure) -> dict:
    doc = {"id": mu.id, "atoms": [{"loc": l, "w": w} for l, w in mu.atoms]}
    if mu.density is not None:
        t = mu.density.tail
        doc["density"] = {"kind": mu.density.kind, "params": mu.density.params,
                          "tail": None if math.isinf(t) else t}
    if mu.cantor is not None:
        doc["cantor"] = {"weight": mu.cantor.weight, "half_width": mu.cantor.half_width}
    doc["mass"] = mu.total_mass
    return doc
