import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pdlocal import quadrature as Q


@pytest.mark.parametrize("n", [2, 5, 16, 64])
def test_gauss_exact_for_polynomials(n):
    x, w = Q.gauss_legendre(-0.3, 1.7, n)
    for k in range(2 * n):
        exact = (1.7 ** (k + 1) - (-0.3) ** (k + 1)) / (k + 1)
        assert np.sum(w * x ** k) == pytest.approx(exact, rel=1e-11, abs=1e-12)


@pytest.mark.parametrize("rule", ["gauss", "midpoint", "trapezoid"])
def test_rules_integrate_smooth(rule):
    x, w = Q.rule_nodes(rule, 0.0, 1.0, 400)
    assert np.sum(w * np.exp(x)) == pytest.approx(math.e - 1, rel=1e-5)
    assert np.sum(w) == pytest.approx(1.0, rel=1e-14)


def test_unknown_rule():
    with pytest.raises(ValueError):
        Q.rule_nodes("simpson", 0, 1, 10)


def test_composite_handles_kink():
    x, w = Q.composite_gauss(np.array([-1.0, 0.0, 1.0]), 8)
    assert np.sum(w * np.abs(x)) == pytest.approx(1.0, abs=1e-15)


def test_adaptive_reports_change():
    val, change = Q.adaptive_gauss(lambda t: np.cos(40 * t), 0, 3, n=16, rtol=1e-12)
    assert val == pytest.approx(math.sin(120) / 40, abs=1e-12)
    assert change < 1e-10


@settings(max_examples=25, deadline=None)
@given(lo=st.floats(-5, 5), width=st.floats(0.01, 10), n=st.integers(1, 40))
def test_weights_positive_and_sum(lo, width, n):
    x, w = Q.gauss_legendre(lo, lo + width, n)
    assert np.all(w > 0) and np.all((x > lo) & (x < lo + width))
    assert np.sum(w) == pytest.approx(width, rel=1e-12)
