import numpy as np
import pytest

from artifact import FourierSeries, InvalidArgument, dL_operator, operator_at, orbit_grid_family
from artifact.operators import (DeformationFunction, dilation_field, dL_split_grid, deformation_sum,
                                kq_leading_terms, lq1_asymptotic, lq2_asymptotic, mode_case_values,
                                operator_jet, phase_of, rotation_field, translation_field,
                                verify_mode_lemmas)


def test_rigid_fields_are_annihilated_on_ellipse(ellipse):
    e, ch = ellipse
    x = np.arange(16) / 16
    for fld in (translation_field(ch), translation_field(ch, (0.0, 1.0)), dilation_field(ch),
                rotation_field(ch)):
        for q in (5, 12):
            assert np.abs(operator_at(e, ch, q, x, fld.nu0)).max() < 1e-10


def test_constant_is_annihilated_on_ellipse(ellipse):
    e, ch = ellipse
    jet = operator_jet(e, ch, 9, np.arange(8) / 8)
    assert np.abs(jet.constant_response()).max() < 1e-12


def test_generic_domain_has_nonzero_response(generic):
    g, ch = generic
    assert np.abs(operator_at(g, ch, 7, np.arange(8) / 8, FourierSeries.constant(1.0))).max() > 1e-6


def test_grid_and_jet_routes_agree(generic):
    g, ch = generic
    f = FourierSeries(0.3, [0.0, 1.0, 0.0, 0.2], [0.5, 0.0, 0.1, 0.0])
    fam = orbit_grid_family(g, ch, 1, 16, 64)
    x = fam.x_grid
    assert np.abs(dL_operator(g, ch, fam, f)(x) - operator_at(g, ch, 16, x, f)).max() < 1e-10
    s1, s2 = dL_split_grid(g, ch, fam, f)
    j1, j2 = operator_at(g, ch, 16, x, f, split=True)
    assert np.abs(s1(x) - j1).max() < 1e-10
    assert np.abs(s2(x) - j2).max() < 1e-10


def test_deformation_sum_derivative(generic):
    g, ch = generic
    fam = orbit_grid_family(g, ch, 1, 11, 64)
    n = FourierSeries.mode(2, "sin")
    total = deformation_sum(g, ch, fam, n)
    dfn = DeformationFunction.from_n(ch, n)
    x = fam.x_grid
    jet_val = operator_at(g, ch, 11, x, dfn.nu0)
    assert np.allclose(total.derivative()(x) / (2 * np.pi * 11), jet_val, atol=1e-9)


def test_mode_response_matches_direct_application(generic):
    g, ch = generic
    jet = operator_jet(g, ch, 13, [0.1, 0.0])
    resp = jet.mode_response(np.array([1, 5, 13, 40]))
    for i, j in enumerate([1, 5, 13, 40]):
        assert np.allclose(resp[:, i].real, jet.apply(FourierSeries.mode(j, "cos")), atol=1e-13)
        assert np.allclose(resp[:, i].imag, jet.apply(FourierSeries.mode(j, "sin")), atol=1e-13)
    streamed = np.concatenate([e for _, e in jet.stream_modes(1, 50, block=16)], axis=1)
    assert np.allclose(streamed, jet.mode_response(np.arange(1, 50)), atol=1e-12)


def test_asymptotic_operator_matches_exact(generic):
    g, ch = generic
    from artifact import extract_alpha_beta
    data = extract_alpha_beta(g, ch, (32, 64), 64)
    f = FourierSeries.mode(2, "cos")
    gaps = []
    for q in (16, 32, 64):
        x0 = np.arange(32) / 32
        th = phase_of(data, q, x0)
        l1, l2 = operator_at(g, ch, q, x0, f, split=True)
        gaps.append(max(np.abs(l1 - lq1_asymptotic(ch, data, q, f, th)).max(),
                        np.abs(l2 - lq2_asymptotic(ch, data, q, f, th)).max()))
    assert gaps[-1] < 1e-11
    assert gaps[0] > gaps[1] > gaps[2]


def test_p_equals_q_case(ellipse):
    e, ch = ellipse
    rep = verify_mode_lemmas(e, ch, (16, 32, 64), ("constant", "p=q"))
    assert all(r.passed for r in rep)


def test_lq2_decay_on_generic_domain(generic):
    g, ch = generic
    (rep,) = verify_mode_lemmas(g, ch, (16, 32, 64, 128), ("lq2",))
    assert rep.passed and abs(rep.slope + 3) < 0.5


def test_kq_cases(ellipse, ellipse_data):
    e, ch = ellipse
    reps = verify_mode_lemmas(e, ch, (16, 32, 64), ("p=kq", "p=kq+r"), k=2, r=2, data=ellipse_data)
    assert all(r.passed for r in reps), [r.as_dict() for r in reps]


def test_kq_leading_terms_circle(circle_data):
    # alpha = 0: A_s = 0, A_c = 1
    c, s = kq_leading_terms(circle_data, 8, 2, np.array([0.0, 0.01]))
    assert np.allclose(c, -2 * np.sin(2 * np.pi * 16 * np.array([0.0, 0.01])))
    assert np.allclose(s, 2 * np.cos(2 * np.pi * 16 * np.array([0.0, 0.01])))


def test_mode_case_validation(ellipse):
    e, ch = ellipse
    with pytest.raises(InvalidArgument):
        mode_case_values(e, ch, 16, "p=kq")
    with pytest.raises(InvalidArgument):
        mode_case_values(e, ch, 16, "p=kq+r", r=16)
    with pytest.raises(InvalidArgument):
        mode_case_values(e, ch, 16, "bogus")
    with pytest.raises(InvalidArgument):
        orbit_grid_family(e, ch, 1, 5, 12)
