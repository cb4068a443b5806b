import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact import FourierSeries, InvalidArgument, higher_constraint_residual, two_p_expansion_check
from artifact.higher_order import (displayed_sum, projection_check, regrouping_identity_residual,
                                   three_q_family, two_p_residuals)
from artifact.operators import translation_field

from conftest import slope


def test_circle_star_polygons_are_exact(circle, circle_data):
    c, ch = circle
    r = two_p_residuals(c, ch, circle_data, 17)
    assert max(r.position, r.angle, r.sinc) < 1e-12


def test_two_p_expansions_decay(ellipse, ellipse_data):
    e, ch = ellipse
    rep = two_p_expansion_check(e, ch, ellipse_data, (17, 33))
    r17, r33 = rep.rows
    expected = (33 / 17) ** -4
    for key in ("position", "angle", "sinc"):
        ratio = getattr(r33, key) / getattr(r17, key)
        assert expected / 2 <= ratio <= expected * 2, key


def test_two_p_requires_odd_large_p(ellipse, ellipse_data):
    e, ch = ellipse
    with pytest.raises(InvalidArgument):
        two_p_expansion_check(e, ch, ellipse_data, (16,))
    with pytest.raises(InvalidArgument):
        two_p_expansion_check(e, ch, ellipse_data, (15,))
    with pytest.raises(InvalidArgument):
        higher_constraint_residual(e, ch, ellipse_data, FourierSeries.mode(1), 18)


def test_translation_satisfies_the_constraint(ellipse, ellipse_data):
    e, ch = ellipse
    nu0 = translation_field(ch).nu0
    for p in (17, 33, 65):
        assert higher_constraint_residual(e, ch, ellipse_data, nu0, p).exact_sup < 1e-7


def test_displayed_sum_vanishes_on_circle(circle, circle_data):
    _, ch = circle
    nu0 = FourierSeries(0.2, [1.0, -0.5, 0.3], [0.0, 0.7, 0.0])
    x = np.linspace(0, 1, 32)
    assert np.abs(displayed_sum(ch, circle_data, nu0, 17, x)).max() < 1e-14


def test_exact_and_displayed_both_small_for_analytic_data(ellipse, ellipse_data):
    # for analytic nu0 and boundary both quantities are equispaced sums of
    # smooth functions, hence far below any algebraic rate in p
    e, ch = ellipse
    r = higher_constraint_residual(e, ch, ellipse_data, FourierSeries.mode(1), 33)
    assert r.exact_sup < 1e-9 and r.displayed_sup < 1e-9


def test_regrouping_identity(ellipse, ellipse_data):
    _, ch = ellipse
    mu2 = FourierSeries.from_function(lambda x: ch.mu(x) ** 2)
    for nu0 in (FourierSeries.mode(1), FourierSeries(0.1, [0.0, 0.5, 0.0, 0.2], [0.3, 0.0, 0.1, 0.0])):
        assert regrouping_identity_residual(nu0, ellipse_data.alpha, ellipse_data.beta, mu2) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=24), st.integers(2, 9))
def test_equispaced_sum_is_multiple_mode_projection(c, p):
    n = len(c) // 2
    g = FourierSeries(0.0, c[:n], c[n:2 * n])
    assert projection_check(g, p) < 1e-10


def test_three_q_family(ellipse):
    e, ch = ellipse
    fam = three_q_family(e, ch, 4, [0.0, 0.3])
    assert all(o.p == 3 and o.q == 14 for o in fam)
    assert abs(fam[0].perimeter - fam[1].perimeter) < 1e-12
    with pytest.raises(InvalidArgument):
        three_q_family(e, ch, 3, [0.0])
