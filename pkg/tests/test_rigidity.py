import json
import warnings
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from artifact import (FourierSeries, InvalidArgument, NotContractive, assemble_operator,
                      bound_budget, contraction_search, deformation_space, gamma0, norm_deviation,
                      xgamma_norm)
from artifact.operators import dilation_field, operator_jet, translation_field
from artifact.rigidity import (HGammaVector, OperatorTruncation, _large_sieve_tail, annihilation_residual,
                               diagonal_limit, write_basis_csv)


@pytest.fixture(scope="module")
def circle_trunc(circle):
    c, ch = circle
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return assemble_operator(c, ch, 8, 2.8)


def test_xgamma_norm_examples():
    assert xgamma_norm(FourierSeries.constant(1.0), 2.5) == 1.0
    assert abs(xgamma_norm(FourierSeries.mode(4, "cos"), 2.5) - 4 ** 2.5) < 1e-12
    j = np.arange(1, 11)
    f = FourierSeries(0.0, j ** -3.0, np.zeros(10))
    assert abs(xgamma_norm(f, 2.8) - 1.0) < 1e-15
    for bad in (2.0, 3.0, 1.5):
        with pytest.raises(InvalidArgument):
            xgamma_norm(f, bad)


def test_hgamma_vector():
    v = HGammaVector.from_interleaved([0.5, 1.0, -2.0, 0.1, 0.0])
    assert v.c.tolist() == [1.0, 0.1] and v.d.tolist() == [-2.0, 0.0]
    assert abs(v.norm(2.5) - 2.0) < 1e-15
    assert v.interleaved().tolist() == [0.5, 1.0, -2.0, 0.1, 0.0]


def test_gamma0_against_independent_zeta():
    g = gamma0()
    with mpmath.workdps(30):
        ref = mpmath.findroot(lambda s: mpmath.zeta(s - 1) - mpmath.mpf("1.9"), 2.8)
        # Hurwitz zeta: sum_{k>=2} k^{1-g}
        total = mpmath.zeta(mpmath.mpf(g) - 1, 2)
    assert abs(g - float(ref)) < 1e-8
    assert abs(g - 2.78831) < 1e-4
    assert 8 / 3 < g < 3
    assert abs(float(total) - 0.9) < 1e-8


def test_bound_budget():
    rep = bound_budget(2.8, 1.5)
    assert rep.all_negative
    assert rep.exponents[0] == Fraction(-1, 5) and rep.exponents[1] == Fraction(-1, 5)
    assert rep.window_nonempty
    rep = bound_budget(2.6, 1.5)
    assert rep.window == (Fraction(5, 3), Fraction(15, 7)) and rep.window_nonempty
    assert not bound_budget(2.4, 1.5).window_nonempty
    assert bound_budget("2.8", "1.5", qbar=8).decay_factors[1] == pytest.approx(8 ** -0.2)


def test_identity_rows_are_exact(circle_trunc):
    m = circle_trunc.matrix
    head = m[:2 * circle_trunc.qbar - 1]
    eye = np.zeros_like(head)
    eye[np.arange(head.shape[0]), np.arange(head.shape[0])] = 1.0
    assert np.array_equal(head, eye)
    assert m.shape == (2 * 32 + 1, 2 * 64 + 1)


def test_assembly_preconditions(circle):
    c, ch = circle
    with pytest.raises(InvalidArgument):
        assemble_operator(c, ch, 2, 2.8)
    with pytest.raises(InvalidArgument):
        assemble_operator(c, ch, 8, 2.8, Q=6)
    with pytest.raises(InvalidArgument):
        assemble_operator(c, ch, 8, 2.8, Q=16, J=12)


def test_circle_diagonal_close_to_identity(circle_trunc):
    for q in range(8, 33):
        assert abs(circle_trunc.matrix[2 * q - 1, 2 * q - 1] - 1) <= 1.0 / q
        assert abs(circle_trunc.matrix[2 * q, 2 * q] - 1) <= 1.0 / q


def test_circle_norm_below_threshold(circle_trunc):
    rep = norm_deviation(circle_trunc)
    assert rep.bound < 0.95
    assert rep.extrapolated is not None and rep.sigma > 0
    # rows approach the universal limit from above
    assert all(v > diagonal_limit(2.8) for v in rep.rows.values())
    assert abs(rep.rows[32] - diagonal_limit(2.8)) < 0.02


def test_identity_truncation_has_zero_norm():
    m = np.zeros((9, 17))
    m[np.arange(9), np.arange(9)] = 1.0
    rows = {q: 0.0 for q in (3, 4)}
    tr = OperatorTruncation(3, 2.8, 4, 8, m, 0.0, rows, rows, 0.0, 0.0, {}, rows)
    rep = norm_deviation(tr)
    assert rep.value == 0.0 and rep.bound == 0.0


def test_norm_monotone_in_qbar(near_circle):
    e, ch = near_circle
    vals = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for qbar in (6, 9, 12):
            tr = assemble_operator(e, ch, qbar, 2.8, Q=24, J=48)
            vals.append(norm_deviation(tr, extrapolate=False).value)
    assert vals[0] >= vals[1] - 1e-12 >= vals[2] - 2e-12


def test_large_sieve_tail_dominates_exact_sum(generic):
    g, ch = generic
    gamma = 2.8
    jet = operator_jet(g, ch, 16, [3 / 64, 0.0])
    exact = 0.0
    for jj, e in jet.stream_modes(65, 1 << 16):
        exact += float((jj ** -gamma * (np.abs(e.real) + np.abs(e.imag)).sum(axis=0)).sum())
    assert exact <= _large_sieve_tail(jet, gamma, 64)


def test_entries_follow_off_diagonal_shape(near_circle):
    e, ch = near_circle
    q = 32
    jet = operator_jet(e, ch, q, [3 / (4 * q), 0.0])
    r = np.arange(1, q)
    ratios = []
    for k in (1, 2):
        j = k * q + r
        m = np.abs(jet.mode_response(j)).max(axis=0)
        ratios.append((m / ((j / q) * (1 / r ** 2 + 1 / (q - r) ** 2))).max())
    # a constant measured on the first block also bounds the next one
    assert ratios[1] <= 2 * ratios[0]


def test_deformation_space_on_circle(circle, circle_trunc):
    c, ch = circle
    space = deformation_space(c, ch, 8, 2.8, trunc=circle_trunc)
    assert space.dimension == 2 * 8 - 1 == space.expected_dimension
    assert space.residual < 1e-6
    for fld in (translation_field(ch), translation_field(ch, (0.0, 1.0)), dilation_field(ch)):
        assert annihilation_residual(circle_trunc, fld.nu0) < 1e-6
        assert space.contains(fld.nu0) < 1e-6
    # basis in n-space is nu0 / mu = nu0 / pi on the circle
    x = np.linspace(0, 1, 9)
    assert np.allclose(space.basis_n[0](x), space.basis_nu0[0](x) / np.pi, atol=1e-12)


def test_not_contractive(ellipse):
    e, ch = ellipse
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr = assemble_operator(e, ch, 8, 2.8)
    with pytest.raises(NotContractive):
        deformation_space(e, ch, 8, 2.8, trunc=tr)


def test_contraction_search(circle, near_circle):
    c, ch = circle
    found = contraction_search(c, ch, 2.8, 6)
    assert found.found and found.report.bound < 0.95
    e, che = near_circle
    blocked = contraction_search(e, che, 2.8, 16)
    assert not blocked.found and blocked.blocking_lower >= 0.95


def test_exports(tmp_path, circle, circle_trunc):
    c, ch = circle
    circle_trunc.to_text(tmp_path / "m.txt")
    header = (tmp_path / "m.txt").read_text().splitlines()[0]
    assert "qbar=8" in header and "Q=32" in header and "J=64" in header
    assert np.array_equal(np.loadtxt(tmp_path / "m.txt"), circle_trunc.matrix)
    space = deformation_space(c, ch, 8, 2.8, trunc=circle_trunc)
    write_basis_csv(tmp_path / "b.csv", space)
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert len(lines) == 1 + space.dimension
    json.dumps(norm_deviation(circle_trunc).as_dict())
