import warnings

import numpy as np
import pytest

from artifact import FourierSeries, build_chart, extract_alpha_beta, make_circle, make_ellipse
from artifact.geometry import make_from_curvature_fourier


@pytest.fixture(scope="session")
def circle():
    c = make_circle()
    return c, build_chart(c)


@pytest.fixture(scope="session")
def ellipse():
    e = make_ellipse(2.0, 1.0)
    return e, build_chart(e)


@pytest.fixture(scope="session")
def near_circle():
    e = make_ellipse(1.2, 1.0)
    return e, build_chart(e)


@pytest.fixture(scope="session")
def generic():
    """A domain without symmetry: rho = 1 + 0.1 cos 2theta + 0.05 sin 3theta."""
    g = make_from_curvature_fourier(FourierSeries(1.0, [0.0, 0.1, 0.0], [0.0, 0.0, 0.05]))
    return g, build_chart(g)


@pytest.fixture(scope="session")
def ellipse_data(ellipse):
    e, ch = ellipse
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        return extract_alpha_beta(e, ch, (32, 64), 64)


@pytest.fixture(scope="session")
def circle_data(circle):
    c, ch = circle
    return extract_alpha_beta(c, ch, (32, 64), 64)


def slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
