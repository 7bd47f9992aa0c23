"""Acceptance criteria 1 to 15, each at its stated tolerance.

Every criterion prints one ``PASS``/``FAIL`` line, and the lines are
repeated in the terminal summary (see ``conftest.py``). Run this file as
a script for the lines alone::

    python tests/test_acceptance.py
"""
import math
import time

import numpy as np
import pytest

from pdlocal import catalog as C
from pdlocal import extension as X
from pdlocal import gp
from pdlocal import measures as M
from pdlocal import mercer as Me
from pdlocal import rkhs as R

RESULTS: dict = {}

XS7 = np.array([0.0, 0.25, -0.25, 0.5, -0.5, 0.9, -0.9])
PD_IDS = ("F1", "F2", "F3", "F4", "F5", "F6", "e1", "im14", "im5", "splitting")


def _cos_sim(S, f):
    x, w, v = S.nodes, S.weights, S.eigenvectors[:, 0]
    g = f(x)
    return abs(np.sum(w * v * g)) / math.sqrt(np.sum(w * v * v) * np.sum(w * g * g))


def _grid(rng, a, n):
    return np.sort(rng.uniform(0, a, n) * (1 - 1e-9))


def crit_1():
    S = Me.mercer_spectrum(C.min_kernel(0.5), 0.5, 512)
    n = np.arange(1, 6)
    rel = np.max(np.abs(S.eigenvalues[:5] * ((2 * n - 1) * np.pi) ** 2 - 1))
    tr = abs(np.sum(S.eigenvalues) - 1 / 8)
    return rel < 1e-3 and tr < 1e-6, f"max rel err {rel:.2e}, |sum - 1/8| = {tr:.2e}"


def crit_2():
    S = Me.mercer_spectrum(X.polya_spline("F3", 2.0), 2.0, 512)
    n = np.arange(1, 6)
    rel = np.max(np.abs(S.eigenvalues[:5] / (2 / (1 + (n * np.pi / 2) ** 2)) - 1))
    cs = _cos_sim(S, lambda x: np.sin(np.pi * x / 2))
    return rel < 1e-3 and cs >= 1 - 1e-6, \
        f"max rel err {rel:.3f} (need < 1e-3), cosine {cs:.6f} (need >= 1-1e-6)"


def crit_3():
    table = [("F1", 1.0), ("F2", 0.5), ("F3", 1.0), ("F4", 0.5), ("F5", 1.0), ("F6", math.pi / 4)]
    errs = {}
    for fid, a in table:
        op = Me.discretize(C.get(fid), a, 512)
        # two routes: the matrix trace and the eigenvalue sum
        errs[fid] = max(abs(np.trace(op.matrix).real - a),
                        abs(np.sum(np.linalg.eigvalsh(op.matrix)) - a))
    worst = max(errs.values())
    return worst < 1e-6, f"worst |trace - a| = {worst:.2e}"


def crit_4():
    r = Me.rank_one_identity(128)
    target = (9 + math.sqrt(129)) / 48
    d = abs(r.L_eigenvalue - target)
    return r.residual < 1e-12 and d < 1e-6, \
        f"residual {r.residual:.2e}; L eigenvalue {r.L_eigenvalue:.7f} vs {target:.7f} (diff {d:.2e})"


def crit_5():
    want = {"F1": (0, 0), "F2": (1, 1), "F3": (1, 1), "F4": (0, 0), "F5": (0, 0), "F6": (0, 0)}
    got = {f: R.deficiency_classify(C.get(f), with_ladders=False).indices for f in want}
    bad = [f for f in want if got[f] != want[f]]
    return not bad, "all six rows match" if not bad else f"mismatch at {bad}"


def crit_6():
    n1 = R.energy_norm("F3", lambda x: np.exp(-x), lambda x: -np.exp(-x)).total
    n2 = R.energy_norm("F3", lambda x: np.exp(x - 1), lambda x: np.exp(x - 1)).total
    errs = [abs(n1 - 1), abs(n2 - 1)]
    F2 = C.get("F2")
    for x0 in (0.1, 0.25, 0.4):
        k, dk = R.kernel_vector("F2", x0)
        errs.append(abs(R.energy_norm("F2", k, dk, breaks=(x0,)).total - 1))
        errs.append(abs(R.kernel_span_norm(F2, [x0], [1.0]).total - 1))
    worst = max(errs)
    return worst < 1e-10, f"worst |norm^2 - 1| = {worst:.2e}"


def _f2_density(lam):
    safe = np.where(lam == 0, 1.0, lam)
    return np.where(lam == 0, 3 / (4 * np.pi),
                    (3 - 2 * np.cos(safe / 2) - np.cos(2 * safe)) / (3 * np.pi * safe ** 2))


def crit_7():
    E2, E3 = X.polya_spline("F2", 2.0), X.polya_spline("F3", 2.0)
    lam = np.concatenate([[0.0], np.linspace(-60, 60, 99)])
    dens = np.max(np.abs(X.density_values(E2, lam) - _f2_density(lam)))
    pd = [X.pd_verify(X.extension_density(E), 1e-9) for E in (E2, E3)]
    mass = [abs(X.density_integral(E, 0.0) - 1) for E in (E2, E3)]
    ok = dens < 1e-12 and all(pd) and max(mass) < 1e-6
    return ok, f"density err {dens:.1e}, pd {pd}, mass err {max(mass):.1e}"


def crit_8():
    r3 = X.shannon_ext_check(M.get_measure("mu3"), C.get("F3"), XS7, n_cut=8192)
    r5 = X.shannon_ext_check(M.get_measure("mu5"), C.get("F3"), XS7, n_cut=8192)
    x = np.linspace(0, 1, 11)
    ns = range(-3, 4)
    closed = max(np.max(np.abs(X.shannon_frame_paper(n, x) - X.shannon_frame(n, x))) for n in ns)
    routes = max(np.max(np.abs(X.shannon_frame(n, x) - X.shannon_frame(n, x, method="measure")))
                 for n in ns)
    sym = 0.0
    for n in ns:
        f0, f1 = X.shannon_frame(n, np.array([0.0, 1.0]))
        sym = max(sym, abs(f1.real - f0.real), abs(f1.imag + f0.imag))
    ok = (r3.in_ext and r3.max_residual < 1e-3 and not r5.in_ext
          and closed < 1e-5 and routes < 1e-5 and sym < 1e-8)
    return ok, (f"mu3 residual {r3.max_residual:.1e} in_ext={r3.in_ext}; mu5 in_ext={r5.in_ext}; "
                f"closed form err {closed:.2e}; direct vs measure {routes:.1e}; symmetry {sym:.1e}")


def crit_9():
    y = np.linspace(-20, 20, 50)
    e1 = np.max(np.abs(X.f3_restricted_transform(y, 1.0) - X.f3_restricted_transform_quad(y, 1.0)))
    e2 = np.max(np.abs(X.exp3_weight(y, 1.0) - X.exp3_weight_quad(y, 1.0)))
    return max(e1, e2) < 1e-8, f"transform err {e1:.1e}, weight err {e2:.1e}"


def crit_10():
    want = {"mu1": (0, 0), "mu2": (1, 1), "mu3": (1, 1), "mu4": (0, 0), "mu5": (0, 0)}
    got = {m: M.second_moment_classify(M.get_measure(m)).predicted_indices for m in want}
    bad = [m for m in want if got[m] != want[m]]
    return not bad, "all five rows match" if not bad else f"mismatch at {bad}"


def crit_11():
    r = R.ordering_ladder(C.get("F2"), C.get("F3"), 0.5)
    F = C.get("F3")
    s = R.ordering_constant(F, F, np.linspace(0.05, 0.95, 12)).A_min
    ok = r.dominated == "yes" and abs(s - 1) < 1e-10
    ladder = ", ".join(f"{d['A0']:.4f}" for d in r.ladder)
    return ok, f"ladder [{ladder}] verdict {r.dominated}; |A(F,F) - 1| = {abs(s - 1):.1e}"


def crit_12():
    rng = np.random.default_rng(2024)
    e1, F6 = C.get("e1"), C.get("F6")
    r1 = [C.psd_check(C.gram(e1, _grid(rng, e1.half_width, 5)), rank_tol=1e-8).numerical_rank
          for _ in range(10)]
    r2 = [C.psd_check(C.gram(F6, _grid(rng, F6.half_width, 5)), rank_tol=1e-8).numerical_rank
          for _ in range(10)]
    return set(r1) == {1} and set(r2) == {2}, f"e1 ranks {sorted(set(r1))}, F6 ranks {sorted(set(r2))}"


def crit_13():
    t0 = time.perf_counter()
    g1 = gp.uniform_grid(1.0, 0.05)
    B = gp.simulate_bridge(g1, 100_000, 7)
    rb = gp.empirical_cov(B, [(0.25, 0.5), (0.3, 0.7)], gp.bridge_cov)
    W = gp.simulate_bm(g1, 100_000, 11)
    rw = gp.empirical_cov(W, [(0.2, 0.4), (0.5, 1.0)], gp.bm_cov)
    O = gp.simulate_ou(1.0, 1.0, 1.0, gp.uniform_grid(5.0, 0.05), 100_000, 13)
    zs = []
    for t in (1.0, 5.0):
        col = O.values[:, int(round(t / 0.05))]
        m, se = gp.batch_stat(col, np.mean)
        zs.append(abs(m - gp.ou_mean(1.0, 1.0, t)) / se)
        v, se = gp.batch_stat(col, np.var)
        zs.append(abs(v - gp.ou_var(1.0, 1.0, t)) / se)
    again = gp.simulate_bridge(g1, 100_000, 7)
    det = np.array_equal(B.values, again.values)
    dt = time.perf_counter() - t0
    zmax = max(max(zs), rb.z_scores.max(), rw.z_scores.max())
    ok = rb.passed and rw.passed and max(zs) <= 4 and det and dt <= 120
    return ok, (f"bridge cov {rb.empirical[0]:.4f}, {rb.empirical[1]:.4f}; max z {zmax:.2f}; "
                f"deterministic {det}; {dt:.1f} s")


def crit_14():
    mu = M.splitting_measure()
    err = max(abs(M.splitting_F(x, 20) - M.bochner_eval(mu, x, cantor_terms=20)) for x in (0.5, 1.0))
    x = np.random.default_rng(3).uniform(-100, 100, 2000)
    bound = float(np.max(np.abs(M.splitting_F(x, 20))))
    return err < 1e-6 and bound <= 1 + 1e-12, f"max diff {err:.1e}, max |F| {bound:.12f}"


def crit_15():
    rng = np.random.default_rng(15)
    fails = []
    for i in PD_IDS:
        for j in PD_IDS:
            P = C.pointwise_product(C.get(i), C.get(j))
            if not C.psd_check(C.gram(P, _grid(rng, P.half_width, 5))).is_psd:
                fails.append(f"product {i}*{j}")
    for fid in ("im14", "im5", "e1", "splitting"):
        for m in np.linspace(-1, 1, 9):
            F = C.scale_imag(C.get(fid), m)
            for _ in range(5):
                if not C.psd_check(C.gram(F, _grid(rng, F.half_width, 5))).is_psd:
                    fails.append(f"scale_imag {fid} m={m:g}")
    F3 = C.get("F3")
    x = np.linspace(0, 1, 101)
    members = [(lambda t: np.exp(-t), lambda t: -np.exp(-t)), (np.ones_like, np.zeros_like),
               R.kernel_vector("F3", 0.4)]
    for k, (xi, dxi) in enumerate(members):
        if R.membership_test(F3, xi).in_rkhs != "yes":
            fails.append(f"member {k} not certified")
            continue
        n2 = R.energy_norm("F3", xi, dxi, breaks=(0.4,)).total
        v = xi(x)
        if np.max(np.abs(v)) > (1 + 1e-9) * math.sqrt(n2):
            fails.append(f"sup bound member {k}")
        d = np.abs(v[:, None] - v[None, :]) ** 2
        if np.any(d > 2 * n2 * (1 - F3(x[:, None] - x[None, :], closed=True)) + 1e-12):
            fails.append(f"continuity bound member {k}")
    P = C.periodize(C.exp_global(), 50)
    t = np.linspace(-0.5, 0.5, 201)
    gap = float(np.min(P(t) - np.exp(-np.abs(t))))
    if not gap > 0:
        fails.append("periodization")
    return not fails, f"min periodization gap {gap:.3f}" if not fails else "; ".join(fails[:5])


CRITERIA = {k: globals()[f"crit_{k}"] for k in range(1, 16)}


def run(k: int):
    ok, detail = CRITERIA[k]()
    line = f"{'PASS' if ok else 'FAIL'} criterion {k:2d}: {detail}"
    RESULTS[k] = line
    print(line)
    return ok, line


@pytest.mark.parametrize("k", list(CRITERIA))
def test_criterion(k):
    ok, line = run(k)
    assert ok, line


if __name__ == "__main__":
    for k in CRITERIA:
        run(k)
