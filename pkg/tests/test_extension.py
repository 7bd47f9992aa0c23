import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pdlocal import catalog as C
from pdlocal import extension as X
from pdlocal import measures as M
from pdlocal import mercer as Me
from pdlocal.errors import ConstructionError

XS = np.array([0.0, 0.25, -0.25, 0.5, -0.5, 0.9, -0.9])


def f2_density(lam):
    lam = np.asarray(lam, dtype=float)
    safe = np.where(lam == 0, 1.0, lam)
    return np.where(lam == 0, 3 / (4 * np.pi),
                    (3 - 2 * np.cos(safe / 2) - np.cos(2 * safe)) / (3 * np.pi * safe ** 2))


# -- construction -------------------------------------------------------------------

def test_f2_spline_shape():
    E = X.polya_spline("F2", 2.0)
    x = np.array([0.0, 0.3, 0.5, 1.0, 1.9, 2.0, 3.0])
    want = np.where(np.abs(x) < 0.5, 1 - np.abs(x), np.where(np.abs(x) < 2, (2 - np.abs(x)) / 3, 0))
    np.testing.assert_allclose(E(x), want, atol=1e-15)
    np.testing.assert_allclose(E(-x), E(x))


def test_f3_spline_shape_and_slope():
    E = X.polya_spline("F3", 2.0)
    x = np.array([0.2, 0.99, 1.0, 1.5, 2.5])
    want = np.where(x < 1, np.exp(-x), np.where(x < 2, np.exp(-1) * (2 - x), 0))
    np.testing.assert_allclose(E(x), want, atol=1e-15)
    assert E.slopes[0] == pytest.approx(-math.exp(-1), abs=1e-15)
    assert X.left_derivative(C.get("F3"), 1.0) == pytest.approx(-math.exp(-1), abs=1e-15)
    single = X.polya_spline("F3", 2.0, "single_segment")
    assert single.c == pytest.approx(2.0) and single.slopes[0] == pytest.approx(E.slopes[0])


@pytest.mark.parametrize("fid", ["F1", "F2", "F3", "F4", "F5", "F6"])
def test_restriction_consistency(fid):
    F = C.get(fid)
    E = X.polya_spline(fid, 3 * F.half_width)
    x = np.linspace(-F.half_width, F.half_width, 51)[1:-1]
    assert np.max(np.abs(E(x) - F(x))) <= 1e-14


def test_continuity_at_knots():
    for fid in ("F1", "F3", "F5"):
        E = X.polya_spline(fid, 3.0)
        for k in E.knots:
            assert abs(E(k - 1e-12) - E(k + 1e-12)) < 1e-9


def test_construction_errors():
    with pytest.raises(ConstructionError):
        X.polya_spline("F3", 0.8)
    with pytest.raises(ConstructionError):
        X.polya_spline("F3", 1.5, "single_segment")
    with pytest.raises(ConstructionError):
        X.polya_spline("im5", 2.0)
    with pytest.raises(ValueError):
        X.polya_spline("F3", 2.0, "cubic")


def test_convexity_verdicts():
    assert X.convexity_check(X.polya_spline("F3", 2.0))[0]
    # a segment steeper than F'(1-) breaks convexity at the knot
    assert not X.convexity_check(X.polya_spline("F3", 1.5))[0]
    assert X.convexity_check(X.polya_spline("F2", 2.0))[0]
    ok, viol = X.convexity_check(X.polya_spline("F1", 2.0))
    assert not ok and viol
    assert not X.convexity_check(X.polya_spline("F4", 1.0, "single_segment"))[0]


# -- densities -------------------------------------------------------------------------

def test_f2_density_closed_form():
    E = X.polya_spline("F2", 2.0)
    lam = np.concatenate([[0.0, 0.3], np.linspace(-60, 60, 98)])
    np.testing.assert_allclose(X.density_values(E, lam), f2_density(lam), atol=1e-12, rtol=0)
    assert X.density_values(E, np.array([0.0]))[0] == pytest.approx(3 / (4 * np.pi), abs=1e-15)
    # near 0 the closed form cancels; compare with its Taylor expansion instead
    small = np.array([1e-9, 1e-5])
    taylor = 3 / (4 * np.pi) - small ** 2 * (1 / 192 + 2 / 3) / (3 * np.pi)
    np.testing.assert_allclose(X.density_values(E, small), taylor, atol=1e-12)


def test_f3_density_against_quadrature():
    E = X.polya_spline("F3", 2.0)
    lam = np.array([0.0, 0.7, 3.1, 12.0])
    y = np.linspace(0, 2, 400001)
    ref = [np.trapezoid(np.cos(l * y) * E(y), y) / np.pi for l in lam]
    np.testing.assert_allclose(X.density_values(E, lam), ref, atol=1e-9)


@pytest.mark.parametrize("fid", ["F2", "F3"])
def test_polya_extensions_pd(fid):
    E = X.polya_spline(fid, 2.0)
    D = X.extension_density(E)
    assert D.analytic and X.pd_verify(D, 1e-9)
    assert np.allclose(D.grid[1] - D.grid[0], np.pi / (4 * E.c))


@pytest.mark.parametrize("fid,c,mode", [("F1", 2.0, "to_zero"), ("F4", 1.0, "single_segment")])
def test_nonconvex_splines_not_pd(fid, c, mode):
    D = X.extension_density(X.polya_spline(fid, c, mode))
    assert not D.analytic and not X.pd_verify(D, 1e-9)


def test_polya_guarantee_over_convex_extensions():
    cases = [("F2", 2.0), ("F2", 0.8), ("F3", 2.0), ("F3", 4.0), ("F5", 3.0), ("F3", 1.2)]
    for fid, c in cases:
        E = X.polya_spline(fid, c)
        if X.convexity_check(E)[0]:
            assert X.pd_verify(X.extension_density(E), 1e-9), (fid, c)


@pytest.mark.parametrize("fid", ["F2", "F3"])
def test_density_mass_and_inversion(fid):
    E = X.polya_spline(fid, 2.0)
    assert X.density_integral(E, 0.0) == pytest.approx(1.0, abs=1e-6)
    for x in (0.3, 0.9, 1.5):
        assert X.density_integral(E, x) == pytest.approx(float(E(x)), abs=1e-5)


# -- transform identities ----------------------------------------------------------------

@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_restricted_transform_and_weight(a):
    y = np.linspace(-20, 20, 50)
    np.testing.assert_allclose(X.f3_restricted_transform(y, a), X.f3_restricted_transform_quad(y, a),
                               atol=1e-8)
    np.testing.assert_allclose(X.exp3_weight(y, a), X.exp3_weight_quad(y, a), atol=1e-8)


# -- Shannon sampling ----------------------------------------------------------------------

def test_partial_sum_digamma_against_direct():
    lam = np.linspace(-7.3, 9.1, 23)
    for N in (0, 1, 5, 38):
        direct = sum(X.sha(np.pi * (lam - n)) for n in range(-N, N + 1))
        np.testing.assert_allclose(X.shannon_partial_sum(lam, N), direct, atol=1e-12)


def test_partial_sum_at_integers():
    np.testing.assert_array_equal(X.shannon_partial_sum(np.array([0.0, 3.0, 12.0]), 10), [1, 1, 0])


def test_shannon_cauchy_in_ext():
    r = X.shannon_ext_check(M.get_measure("mu3"), C.get("F3"), XS, n_cut=8192)
    assert r.in_ext and r.max_residual < 1e-3 and not r.truncation_dominated


def test_shannon_default_cut_flags_truncation():
    r = X.shannon_ext_check(M.get_measure("mu3"), C.get("F3"), XS)
    assert r.n_cut == 64 and r.truncation_dominated


def test_shannon_gaussian_rejected():
    r = X.shannon_ext_check(M.get_measure("mu5"), C.get("F3"), XS, n_cut=8192)
    assert not r.in_ext


def test_shannon_mass_at_zero():
    r = X.shannon_ext_check(M.get_measure("mu5"), C.get("F5"), [0.0], n_cut=100000)
    assert r.residuals[0] < 1e-6


def test_shannon_atoms_and_cantor():
    r = X.shannon_ext_check(M.get_measure("im5"), C.get("im5"), [0.0, 0.4], n_cut=20000)
    assert r.max_residual < 1e-3


# -- frames ------------------------------------------------------------------------------

@pytest.mark.parametrize("n", [-2, -1, 0, 1, 2])
def test_frame_two_routes(n):
    x = np.array([0.0, 0.37, 1.0])
    d = X.shannon_frame(n, x)
    m = X.shannon_frame(n, x, method="measure")
    assert np.max(np.abs(d - m)) < 1e-8


@pytest.mark.parametrize("n", [-2, -1, 0, 1, 2])
def test_frame_boundary_symmetry(n):
    f0, f1 = X.shannon_frame(n, np.array([0.0, 1.0]))
    assert abs(f1.real - f0.real) < 1e-8 and abs(f1.imag + f0.imag) < 1e-8


def test_frame_printed_form_is_negated():
    x = np.linspace(0, 1, 7)
    for n in (-1, 0, 3):
        np.testing.assert_allclose(X.shannon_frame_paper(n, x), -X.shannon_frame(n, x), atol=1e-12)
    assert X.shannon_frame_paper(0, 0.0).real == pytest.approx(math.exp(-1) - 1)


def test_bessel_frame():
    S = Me.mercer_spectrum(C.get("F3"), 1.0, 256)
    top = X.bessel_frame_check(S, np.array([1.0]))
    assert top.holds and top.frame_sum < top.bound
    zero = X.bessel_frame_check(S, np.zeros(3))
    assert zero.frame_sum == 0 and zero.holds
    c = np.array([0.3, -0.5, 0.2, 0.1])
    t20, full = X.bessel_frame_check(S, c, n_max=20), X.bessel_frame_check(S, c, n_max=200)
    assert t20.frame_sum <= full.frame_sum <= full.bound


@settings(max_examples=15, deadline=None)
@given(coef=st.lists(st.floats(-2, 2), min_size=1, max_size=6))
def test_bessel_frame_random(coef):
    S = Me.mercer_spectrum(C.get("F3"), 1.0, 128)
    assert X.bessel_frame_check(S, np.array(coef), n_max=40).holds


@settings(max_examples=20, deadline=None)
@given(c=st.floats(2.0, 6.0))
def test_f3_extensions_always_pd(c):
    E = X.polya_spline("F3", c)
    assert X.convexity_check(E)[0]
    assert X.pd_verify(X.extension_density(E, np.linspace(-200 / c, 200 / c, 801)), 1e-9)
