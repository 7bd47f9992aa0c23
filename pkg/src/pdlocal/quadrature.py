"""Quadrature rules shared by the analysis modules.

All rules return ``(nodes, weights)`` as float arrays. Nodes of the Gauss
rules are strictly interior, which matters for kernels that are only
defined on an open interval.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

RULES = ("gauss", "midpoint", "trapezoid")


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(lo: float, hi: float, n: int):
    """Gauss-Legendre rule with ``n`` nodes on ``[lo, hi]``."""
    x, w = _leggauss(int(n))
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def composite_gauss(breaks, n: int = 16):
    """Composite Gauss-Legendre rule over consecutive panels.

    Parameters
    ----------
    breaks : array_like
        Increasing panel end points.
    n : int
        Nodes per panel.
    """
    breaks = np.asarray(breaks, dtype=float)
    x, w = _leggauss(int(n))
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = lo + half * (x[None, :] + 1.0)
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def midpoint(lo: float, hi: float, n: int):
    h = (hi - lo) / n
    return lo + h * (np.arange(n) + 0.5), np.full(n, h)


def trapezoid(lo: float, hi: float, n: int):
    x = np.linspace(lo, hi, n)
    h = (hi - lo) / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return x, w


def rule_nodes(rule: str, lo: float, hi: float, n: int):
    """Dispatch on the rule name (``gauss``, ``midpoint`` or ``trapezoid``)."""
    if rule == "gauss":
        return gauss_legendre(lo, hi, n)
    if rule == "midpoint":
        return midpoint(lo, hi, n)
    if rule == "trapezoid":
        return trapezoid(lo, hi, n)
    raise ValueError(f"unknown quadrature rule {rule!r}; expected one of {RULES}")


def adaptive_gauss(f, lo: float, hi: float, n: int = 64, rtol: float = 1e-8,
                   max_level: int = 14, panels: int = 1):
    """Composite Gauss-Legendre with panel halving until the relative change
    drops below ``rtol``.

    ``f`` must accept a 1-d array and may return complex values. Returns the
    integral and the last observed relative change.
    """
    prev = None
    m = panels
    for _ in range(max_level):
        x, w = composite_gauss(np.linspace(lo, hi, m + 1), n)
        val = np.sum(w * f(x))
        if prev is not None:
            scale = max(abs(val), 1e-300)
            change = abs(val - prev) / scale
            if change < rtol or abs(val - prev) < 1e-15:
                return val, change
        prev = val
        m *= 2
    return val, change
