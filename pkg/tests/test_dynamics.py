import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact import InvalidArgument, PhasePoint, billiard_step, birkhoff_orbit, family_jet, orbit_family
from artifact.dynamics import perimeter_derivative, write_orbits_csv


@pytest.mark.parametrize("q", [3, 5, 12])
def test_circle_orbits_are_regular_polygons(circle, q):
    c, ch = circle
    orb = birkhoff_orbit(c, 1, q, seed_s=0.3, chart=ch)
    assert abs(orb.perimeter - 2 * q * np.sin(np.pi / q)) < 1e-10
    assert np.allclose(orb.angles, np.pi / q, atol=1e-10)
    assert np.allclose(np.diff(orb.t), 2 * np.pi / q, atol=1e-10)


def test_star_polygon_on_circle(circle):
    c, ch = circle
    orb = birkhoff_orbit(c, 2, 7, chart=ch)
    assert abs(orb.perimeter - 14 * np.sin(2 * np.pi / 7)) < 1e-10


def test_rotation_number_validation(circle):
    c, ch = circle
    with pytest.raises(InvalidArgument):
        birkhoff_orbit(c, 2, 4, chart=ch)
    with pytest.raises(InvalidArgument):
        birkhoff_orbit(c, 3, 5, chart=ch)


@pytest.mark.parametrize("q", [5, 8, 13])
def test_poncelet_constancy_on_ellipse(ellipse, q):
    e, ch = ellipse
    x = np.arange(32) / 32
    fam = orbit_family(e, ch, 1, q, x)
    per = np.array([o.perimeter for o in fam])
    assert per.max() - per.min() < 1e-12
    assert np.abs(perimeter_derivative(e, ch, 1, q, x)).max() < 1e-8


def test_generic_domain_perimeter_varies(generic):
    g, ch = generic
    assert np.abs(perimeter_derivative(g, ch, 1, 5, np.arange(16) / 16)).max() > 1e-3


def test_birkhoff_orbit_is_a_billiard_trajectory(generic):
    g, ch = generic
    orb = birkhoff_orbit(g, 1, 7, seed_s=0.4, chart=ch)
    assert orb.gradient_norm < 1e-12
    pt = PhasePoint(orb.impacts[0], orb.angles[0])
    for k in range(1, 8):
        pt = billiard_step(g, pt)
        kk = k % 7
        assert abs(np.mod(pt.s - orb.impacts[kk] + g.length / 2, g.length) - g.length / 2) < 1e-9
        assert abs(pt.phi - orb.angles[kk]) < 1e-9


def test_birkhoff_orbit_maximizes_over_starting_points(generic):
    g, ch = generic
    orb = birkhoff_orbit(g, 1, 5, chart=ch)
    fam = orbit_family(g, ch, 1, 5, np.arange(64) / 64)
    assert orb.perimeter >= max(o.perimeter for o in fam) - 1e-12


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(3, 20))
def test_impacts_stay_cyclically_ordered(x0, q):
    from artifact import build_chart, make_ellipse
    e = make_ellipse(1.5, 1.0)
    ch = build_chart(e)
    orb = orbit_family(e, ch, 1, q, [x0])[0]
    gaps = np.diff(np.append(orb.t, orb.t[0] + 2 * np.pi))
    assert np.all(gaps > 0)
    assert np.all((orb.angles > 0) & (orb.angles < np.pi))


def test_billiard_step_rejects_bad_angle(circle):
    c, _ = circle
    with pytest.raises(InvalidArgument):
        billiard_step(c, PhasePoint(0.0, 0.0))


def test_family_jet_against_finite_differences(generic):
    g, ch = generic
    x0, h = 0.21, 1e-5
    j = family_jet(g, ch, 1, 9, [x0])
    jp, jm = family_jet(g, ch, 1, 9, [x0 + h]), family_jet(g, ch, 1, 9, [x0 - h])
    assert np.abs(j.dx - (jp.x - jm.x) / (2 * h)).max() < 1e-7
    assert np.abs(j.dw - (jp.w - jm.w) / (2 * h)).max() < 1e-7
    # w = sin(phi)/mu
    assert np.allclose(j.w, np.sin(j.phi) / ch.mu(j.x), atol=1e-12)


def test_orbit_csv(tmp_path, ellipse):
    e, ch = ellipse
    x = [0.0, 0.5]
    fam = orbit_family(e, ch, 1, 4, x)
    write_orbits_csv(tmp_path / "o.csv", fam, x)
    lines = (tmp_path / "o.csv").read_text().splitlines()
    assert lines[0] == "x,k,s_k,phi_k,perimeter"
    assert len(lines) == 9
