"""Orbits of rotation number 2/p and the second-order constraint.

For odd p the (2, p) orbits obey the same Lazutkin expansion as 1/q orbits
with ``q = p/2``: ``x_k = x + 2k/p + 4 alpha(x + 2k/p)/p^2`` and
``phi_k p / (2 mu(x_k)) = 1 + 4 beta(x + 2k/p)/p^2`` up to ``O(p^-4)``.
Subtracting twice the 1/p operator from the 2/p operator cancels the
leading order and leaves

    LL_{2,p}(nu0) = (6/p^3) sum_k ((nu0' alpha)' + (nu0 beta)' - (nu0 mu^2)'/6)(x + k/p) + O(p^-4).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .dynamics import _angles, family_jet, orbit_family, pinned_family_t
from .errors import InvalidArgument
from .fourier import FourierSeries
from .lazutkin import ExpansionData, sinc_minus_one


def _check_odd(p, minimum=3):
    if p % 2 == 0 or p < minimum:
        raise InvalidArgument(f"p must be odd and at least {minimum}, got {p}")


def _slope(ps, vals):
    ps, vals = np.asarray(ps, float), np.asarray(vals, float)
    ok = vals > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(ps[ok]), np.log(vals[ok]), 1)[0])


# -- 2/p expansions -----------------------------------------------------------

@dataclass
class TwoPResidual:
    p: int
    position: float
    angle: float
    sinc: float


@dataclass
class TwoPReport:
    """Sup residuals of the 2/p expansions and their log-log slopes in p."""

    rows: list
    slopes: dict = field(default_factory=dict)

    def as_dict(self):
        return {"rows": [vars(r) for r in self.rows], "slopes": self.slopes}


def two_p_residuals(curve, chart, data: ExpansionData, p: int, n_points: int = 16) -> TwoPResidual:
    """Compare a pinned (2, p) family with the expansions built from alpha, beta.

    ``position`` is ``sup |x_k - y_k - 4 alpha(y_k)/p^2|`` with phase points
    ``y_k = theta + 2k/p``; ``angle`` is
    ``sup |phi_k p/(2 mu(x_k)) - 1 - 4 beta(y_k)/p^2|``; ``sinc`` is
    ``sup |w_k p/2 - 1 - S_{2,p}(x_k) - 4 beta(y_k)/p^2|`` with
    ``w = sin(phi)/mu`` and ``S_{2,p} = sin(2 mu/p)/(2 mu/p) - 1``.
    """
    _check_odd(p)
    x0 = np.arange(n_points) / (n_points * p)
    t = pinned_family_t(curve, chart, 2, p, x0)
    x = chart.x_of_t(t)
    phi = _angles(curve, t, 2)
    mu = chart.mu_t(t)
    k = 2.0 * np.arange(p) / p
    theta = (x - k).mean(axis=1, keepdims=True)
    y = theta + k
    p2 = float(p) ** 2
    a, b = data.alpha(y), data.beta(y)
    pos = np.abs(x - y - 4.0 * a / p2).max()
    ang = np.abs(phi * p / (2.0 * mu) - 1.0 - 4.0 * b / p2).max()
    w = np.sin(phi) / mu
    sinc = np.abs(w * p / 2.0 - 1.0 - sinc_minus_one(2.0 * mu / p) - 4.0 * b / p2).max()
    return TwoPResidual(p, float(pos), float(ang), float(sinc))


def two_p_expansion_check(curve, chart, data: ExpansionData, p_list=(17, 33),
                          n_points: int = 16) -> TwoPReport:
    for p in p_list:
        _check_odd(p, 17)
    rows = [two_p_residuals(curve, chart, data, p, n_points) for p in p_list]
    ps = [r.p for r in rows]
    slopes = {key: _slope(ps, [getattr(r, key) for r in rows]) for key in ("position", "angle", "sinc")}
    return TwoPReport(rows, slopes)


# -- the combined operator ----------------------------------------------------

def _orbit_derivative_sum(curve, chart, nu0: FourierSeries, rot: int, p: int, x0):
    """``d/dx sum_k nu0(x_k) w_k`` along the pinned (rot, p) family."""
    jet = family_jet(curve, chart, rot, p, x0)
    return (nu0.derivative()(jet.x) * jet.dx * jet.w + nu0(jet.x) * jet.dw).sum(axis=1)


def exact_two_p_operator(curve, chart, nu0: FourierSeries, p: int, x0) -> np.ndarray:
    """``d/dx L^{2,p}(nu0) - 2 d/dx L^{p}(nu0)`` from exact orbit data."""
    _check_odd(p)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    return (_orbit_derivative_sum(curve, chart, nu0, 2, p, x0)
            - 2.0 * _orbit_derivative_sum(curve, chart, nu0, 1, p, x0))


def constraint_integrand(chart, data: ExpansionData, nu0: FourierSeries) -> FourierSeries:
    """``G = nu0' alpha + nu0 beta - nu0 mu^2 / 6`` as a series."""
    mu = chart.mu_series
    d1 = nu0.derivative()
    return FourierSeries.from_function(
        lambda y: d1(y) * data.alpha(y) + nu0(y) * data.beta(y) - nu0(y) * mu(y) ** 2 / 6.0)


def displayed_sum(chart, data: ExpansionData, nu0: FourierSeries, p: int, x0) -> np.ndarray:
    """``(6/p^3) sum_k G'(x + k/p)``."""
    g1 = constraint_integrand(chart, data, nu0).derivative()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    return 6.0 / float(p) ** 3 * g1(np.add.outer(x0, np.arange(p) / p)).sum(axis=1)


@dataclass
class ConstraintResidual:
    p: int
    x: np.ndarray
    exact: np.ndarray
    displayed: np.ndarray

    @property
    def exact_sup(self) -> float:
        return float(np.abs(self.exact).max())

    @property
    def displayed_sup(self) -> float:
        return float(np.abs(self.displayed).max())

    @property
    def gap(self) -> float:
        return float(np.abs(self.exact - self.displayed).max())

    def as_dict(self):
        return {"p": self.p, "exact_sup": self.exact_sup, "displayed_sup": self.displayed_sup,
                "gap": self.gap}


def higher_constraint_residual(curve, chart, data: ExpansionData, nu0: FourierSeries, p: int,
                               n_points: int = 64) -> ConstraintResidual:
    """Exact combined operator against the displayed leading sum on a grid."""
    if p % 2 == 0:
        raise InvalidArgument("p must be odd")
    x = np.arange(n_points) / n_points
    return ConstraintResidual(p, x, exact_two_p_operator(curve, chart, nu0, p, x),
                              displayed_sum(chart, data, nu0, p, x))


@dataclass
class ConstraintReport:
    rows: list
    slope: float

    def as_dict(self):
        return {"rows": [r.as_dict() for r in self.rows], "gap_slope": self.slope}


def constraint_decay(curve, chart, data, nu0, p_list=(17, 33, 65), n_points: int = 64) -> ConstraintReport:
    rows = [higher_constraint_residual(curve, chart, data, nu0, p, n_points) for p in p_list]
    return ConstraintReport(rows, _slope([r.p for r in rows], [r.gap for r in rows]))


# -- algebraic checks ---------------------------------------------------------

def _product_series(*factors: FourierSeries) -> FourierSeries:
    # the product of trigonometric polynomials has order at most the sum of
    # orders; modes above it are pure rounding noise that d/dx would amplify
    order = sum(f.order for f in factors)
    n = 1 << int(np.ceil(np.log2(2 * order + 2)))
    x = np.arange(n) / n
    v = np.ones(n)
    for f in factors:
        v = v * f(x)
    return FourierSeries.from_samples(v, max_mode=order)


def regrouping_identity_residual(nu0: FourierSeries, alpha: FourierSeries, beta: FourierSeries,
                                 mu2: FourierSeries, n: int = 256) -> float:
    """Sup over a grid of the expanded minus the regrouped integrand.

    Expanded: ``nu0'' alpha + nu0' alpha' + nu0' beta - nu0' mu2/6 + nu0 beta' - nu0 mu2'/6``.
    Regrouped: ``(nu0' alpha)' + (nu0 beta)' - (nu0 mu2)'/6``, each product
    resolved on a grid and differentiated spectrally.
    """
    x = np.arange(n) / n
    d1, d2 = nu0.derivative(), nu0.derivative(2)
    lhs = (d2(x) * alpha(x) + d1(x) * alpha.derivative()(x) + d1(x) * beta(x)
           - d1(x) * mu2(x) / 6.0 + nu0(x) * beta.derivative()(x) - nu0(x) * mu2.derivative()(x) / 6.0)
    rhs = (_product_series(d1, alpha).derivative()(x) + _product_series(nu0, beta).derivative()(x)
           - _product_series(nu0, mu2).derivative()(x) / 6.0)
    return float(np.abs(lhs - rhs).max())


def equispaced_derivative_sum(g: FourierSeries, p: int, x) -> np.ndarray:
    """``sum_k g'(x + k/p) / p`` by direct summation."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return g.derivative()(np.add.outer(x, np.arange(p) / p)).mean(axis=1)


def multiple_mode_projection(g: FourierSeries, p: int) -> FourierSeries:
    """The part of ``g'`` supported on modes that are multiples of p."""
    d = g.derivative()
    keep = (np.arange(1, d.order + 1) % p) == 0
    return FourierSeries(0.0, np.where(keep, d.a, 0.0), np.where(keep, d.b, 0.0))


def projection_check(g: FourierSeries, p: int, n: int = 128) -> float:
    x = np.arange(n) / n
    return float(np.abs(equispaced_derivative_sum(g, p, x) - multiple_mode_projection(g, p)(x)).max())


# -- 3/q family ---------------------------------------------------------------

def three_q_family(curve, chart, qbar: int, x_grid, tol: float = 1e-12):
    """Orbits of rotation number 3/q with ``q = 3 qbar + 2`` and qbar even."""
    if qbar % 2 or qbar < 2:
        raise InvalidArgument("qbar must be even and positive")
    q = 3 * qbar + 2
    assert gcd(3, q) == 1
    return orbit_family(curve, chart, 3, q, x_grid, tol=tol)
