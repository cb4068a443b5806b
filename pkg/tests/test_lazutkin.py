import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from artifact import InvalidArgument, curvature_identity_residual, extract_alpha_beta, s_q
from artifact.lazutkin import (curvature_terms, orbit_defects, sinc_minus_one,
                               write_expansion_csv)

from conftest import slope


def _ellipse_density(a, b):
    # rho^{-2/3} |G'(t)| for the ellipse (a cos t, b sin t)
    return lambda t: (a * b) ** (2 / 3) / np.sqrt(a ** 2 * np.sin(t) ** 2 + b ** 2 * np.cos(t) ** 2)


def test_circle_chart(circle):
    c, ch = circle
    x = np.linspace(0, 1, 33)
    assert abs(ch.C - 1 / (2 * np.pi)) < 1e-14
    assert np.abs(ch.mu(x) - np.pi).max() < 1e-10
    assert np.abs(ch.x_of_s(2 * np.pi * x) - x).max() < 1e-13


def test_ellipse_chart_against_quadrature(ellipse):
    e, ch = ellipse
    dens = _ellipse_density(2.0, 1.0)
    total = quad(dens, 0, 2 * np.pi, epsabs=1e-14, epsrel=1e-14, limit=200)[0]
    assert abs(ch.C - 1 / total) < 1e-12
    for t in (0.3, 1.7, 4.0):
        partial = quad(dens, 0, t, epsabs=1e-14, epsrel=1e-14, limit=200)[0]
        assert abs(ch.x_of_t(t) - partial / total) < 1e-12
        rho = e.rho_t(t)
        assert abs(ch.mu_t(t) - 1 / (2 * ch.C * rho ** (1 / 3))) < 1e-12


def test_chart_inverse_and_monotone(generic):
    g, ch = generic
    x = np.linspace(0, 1, 101)
    t = ch.t_of_x(x)
    assert np.all(np.diff(t) > 0)
    assert np.abs(ch.x_of_t(t) - x).max() < 1e-14


def test_s_q_validation_and_values(circle):
    _, ch = circle
    with pytest.raises(InvalidArgument):
        s_q(ch, 1, 0.0)
    assert abs(s_q(ch, 4, 0.2) - (np.sin(np.pi / 4) / (np.pi / 4) - 1)) < 1e-15


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-8, 2.0))
def test_sinc_minus_one_against_high_precision(z):
    with mpmath.workdps(40):
        ref = float(mpmath.sin(z) / z - 1)
    assert abs(sinc_minus_one(np.array([z]))[0] - ref) <= 1e-15 * abs(ref)


def test_circle_expansion_vanishes(circle_data):
    x = np.linspace(0, 1, 64)
    assert np.abs(circle_data.alpha(x)).max() <= 1e-6
    assert np.abs(circle_data.beta(x)).max() <= 1e-6


def test_alpha_has_zero_mean_and_even_modes_on_ellipse(ellipse_data):
    a = ellipse_data.alpha
    assert a.a0 == 0.0
    # central symmetry: only even frequencies survive
    odd = np.concatenate([a.a[0::2], a.b[0::2]])
    assert np.abs(odd).max() < 1e-8 * np.abs(a.coefficients()).max()


def test_curvature_identity(ellipse, ellipse_data, circle, circle_data):
    e, ch = ellipse
    assert curvature_identity_residual(e, ch, ellipse_data) <= 1e-3
    c, cc = circle
    assert curvature_identity_residual(c, cc, circle_data) <= 1e-12


def test_x_derivative_reading_is_inconsistent(ellipse, ellipse_data):
    e, ch = ellipse
    # the identity fails by orders of magnitude when rho is differentiated in x
    assert curvature_identity_residual(e, ch, ellipse_data, convention="x") > 1.0
    with pytest.raises(InvalidArgument):
        curvature_terms(ch, 0.1, convention="t")


def test_position_residual_decay(ellipse, ellipse_data):
    e, ch = ellipse
    qs = [16, 32, 64]
    res = []
    for q in qs:
        d = orbit_defects(e, ch, q, 32)
        res.append(np.abs(d.dx - ellipse_data.alpha(d.y)).max() / q ** 2)
    assert abs(slope(qs, res) + 4) < 0.5


def test_extraction_arguments(ellipse):
    e, ch = ellipse
    with pytest.raises(InvalidArgument):
        extract_alpha_beta(e, ch, (32, 48))
    with pytest.raises(InvalidArgument):
        extract_alpha_beta(e, ch, (32, 64), n_grid=48)


def test_expansion_csv(tmp_path, ellipse, ellipse_data):
    _, ch = ellipse
    write_expansion_csv(tmp_path / "a.csv", ch, ellipse_data, n=16)
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "x,alpha,beta,alpha_prime,identity_residual"
    assert len(lines) == 17
