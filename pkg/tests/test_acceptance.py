"""Acceptance suite: ten end-to-end criteria at their stated tolerances.

Each test records one PASS/FAIL line (shown in the terminal summary) and
then asserts.  Run on its own with ``pytest tests/test_acceptance.py -v``.
"""

import time
import warnings

import mpmath
import numpy as np

from artifact import (FourierSeries, birkhoff_orbit, build_chart, curvature_identity_residual,
                      extract_alpha_beta, gamma0, make_circle, make_ellipse)
from artifact.dynamics import perimeter_derivative
from artifact.higher_order import constraint_decay, regrouping_identity_residual
from artifact.lazutkin import orbit_defects
from artifact.operators import dilation_field, translation_field, verify_mode_lemmas
from artifact.rigidity import (annihilation_residual, assemble_operator, bound_budget,
                               contraction_search, deformation_space)

RESULTS = []


def record(number, ok, detail):
    RESULTS.append(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(RESULTS[-1])
    return ok


def fitted_slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def test_01_circle_exactness():
    t0 = time.perf_counter()
    c = make_circle()
    ch = build_chart(c)
    mu_err = float(np.abs(ch.mu(np.linspace(0, 1, 257)) - np.pi).max())
    orbit_err = 0.0
    for q in (3, 4, 5, 8, 13):
        orb = birkhoff_orbit(c, 1, q, seed_s=0.37, chart=ch)
        orbit_err = max(orbit_err, abs(orb.perimeter - 2 * q * np.sin(np.pi / q)),
                        float(np.abs(orb.angles - np.pi / q).max()),
                        float(np.abs(np.diff(orb.t) - 2 * np.pi / q).max()))
    data = extract_alpha_beta(c, ch, (32, 64), 64)
    x = np.linspace(0, 1, 257)
    ab = float(max(np.abs(data.alpha(x)).max(), np.abs(data.beta(x)).max()))
    dt = time.perf_counter() - t0
    ok = mu_err <= 1e-10 and orbit_err <= 1e-10 and ab <= 1e-6 and dt < 10
    assert record(1, ok, f"mu err {mu_err:.1e}, q-gon err {orbit_err:.1e}, sup|alpha,beta| {ab:.1e}, {dt:.1f}s")


def test_02_poncelet_constancy():
    t0 = time.perf_counter()
    e = make_ellipse(2.0, 1.0)
    ch = build_chart(e)
    grid = np.arange(64) / 64
    worst = max(float(np.abs(perimeter_derivative(e, ch, 1, q, grid)).max()) for q in (5, 8, 13, 21, 34))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 60
    assert record(2, ok, f"sup |dL/dxi| = {worst:.1e} over q in 5..34, {dt:.1f}s")


def test_03_lazutkin_decay():
    t0 = time.perf_counter()
    e = make_ellipse(2.0, 1.0)
    ch = build_chart(e)
    data = extract_alpha_beta(e, ch, (32, 64), 64)
    qs = [16, 32, 64, 128]
    res = []
    for q in qs:
        d = orbit_defects(e, ch, q, 64)
        res.append(float(np.abs(d.dx - data.alpha(d.y)).max()) / q ** 2)
    s = fitted_slope(qs, res)
    dt = time.perf_counter() - t0
    ok = abs(s + 4) <= 0.5 and dt < 300
    assert record(3, ok, f"position residual slope {s:.3f} (target -4 +- 0.5), {dt:.1f}s")


def test_04_curvature_identity():
    e = make_ellipse(2.0, 1.0)
    ch = build_chart(e)
    r_e = curvature_identity_residual(e, ch, extract_alpha_beta(e, ch, (32, 64), 64))
    c = make_circle()
    cc = build_chart(c)
    r_c = curvature_identity_residual(c, cc, extract_alpha_beta(c, cc, (32, 64), 64))
    ok = r_e <= 1e-3 and r_c <= 1e-12
    assert record(4, ok, f"ellipse residual {r_e:.2e} (<= 1e-3), circle residual {r_c:.1e} (<= 1e-12)")


def test_05_gamma0():
    g = gamma0()
    with mpmath.workdps(30):
        total = float(mpmath.zeta(mpmath.mpf(g) - 1, 2))
    ok = abs(g - 2.78831) <= 1e-4 and abs(total - 0.9) <= 1e-8
    assert record(5, ok, f"gamma0 = {g:.8f}, sum_k>=2 k^(1-gamma0) = {total:.10f}")


def test_06_mode_lemmas():
    e = make_ellipse(2.0, 1.0)
    ch = build_chart(e)
    qs = (16, 32, 64, 128)
    reps = {r.case: r for r in verify_mode_lemmas(e, ch, qs, ("p=q", "lq2"))}
    s1, s2 = reps["p=q"].slope, reps["lq2"].slope
    ok = abs(s1 + 1) <= 0.5 and abs(s2 + 3) <= 0.5
    sup2 = max(reps["lq2"].values)
    assert record(6, ok, f"p=q slope {s1:.3f} (target -1), Lq2 slope {s2:.3f} (target -3; "
                         f"sup|Lq2| = {sup2:.1e})")


def test_07_operator_contraction():
    t0 = time.perf_counter()
    e = make_ellipse(1.2, 1.0)
    ch = build_chart(e)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = contraction_search(e, ch, 2.8, 64, threshold=0.95)
    dt = time.perf_counter() - t0
    if res.found:
        detail = f"qbar = {res.qbar}, bound {res.report.bound:.4f} < 0.95"
    else:
        detail = (f"no qbar <= 64: row q = {res.blocking_row} has exact partial sum "
                  f"{res.blocking_lower:.4f} >= 0.95")
    assert record(7, res.found, f"{detail}, {dt:.1f}s")


def test_08_bound_budget():
    a = bound_budget("2.8", "1.5")
    b = bound_budget("2.4", "1.5")
    ok = a.all_negative and not b.window_nonempty
    assert record(8, ok, f"gamma 2.8: exponents {[str(x) for x in a.exponents]}; "
                         f"gamma 2.4 window ({float(b.window[0]):.3f}, {float(b.window[1]):.3f}) empty")


def test_09_deformation_space():
    c = make_circle()
    ch = build_chart(c)
    qbar = 8
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr = assemble_operator(c, ch, qbar, 2.8)
    space = deformation_space(c, ch, qbar, 2.8, trunc=tr)
    fields = [translation_field(ch), translation_field(ch, (0.0, 1.0)), dilation_field(ch)]
    ann = max(annihilation_residual(tr, f.nu0) for f in fields)
    span = max(space.contains(f.nu0) for f in fields)
    ok = ann < 1e-6 and span < 1e-6
    assert record(9, ok, f"rigid-field residual {ann:.1e}, distance to span {span:.1e}; dimension "
                         f"{space.dimension} vs 2qbar-1 = {2 * qbar - 1} and 2qbar+1 = {2 * qbar + 1}")


def test_10_higher_order():
    e = make_ellipse(2.0, 1.0)
    ch = build_chart(e)
    data = extract_alpha_beta(e, ch, (32, 64), 64)
    nu0 = FourierSeries.mode(1, "cos")
    mu2 = FourierSeries.from_function(lambda x: ch.mu(x) ** 2)
    regroup = regrouping_identity_residual(nu0, data.alpha, data.beta, mu2)
    rep = constraint_decay(e, ch, data, nu0, (17, 33, 65))
    gaps = [r.gap for r in rep.rows]
    ok = regroup <= 1e-12 and abs(rep.slope + 4) <= 0.7
    assert record(10, ok, f"regrouping {regroup:.1e}; gap slope {rep.slope:.2f} (target -4 +- 0.7), "
                          f"gaps {', '.join(f'{g:.1e}' for g in gaps)}")
