"""Lazutkin coordinates and the asymptotic shape of 1/q orbits.

The chart ``x(s) = C * int_0^s rho^{-2/3}`` straightens near-grazing billiard
dynamics into an almost rigid rotation.  Along a 1/q periodic orbit the
impacts and angles deviate from equispacing by ``alpha/q^2`` and
``beta/q^2`` corrections; :func:`extract_alpha_beta` recovers these two
1-periodic functions from computed orbit families and
:func:`curvature_identity_residual` checks them against the curvature
relation ``alpha' = beta - rho^{1/3} rho_ss / (36 C^2) + rho^{-2/3} rho_s^2 / (54 C^2)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import AsymptoticsMismatchWarning, InvalidArgument, NumericalFailure
from .fourier import TWO_PI, FourierSeries
from .geometry import BoundaryCurve, write_table


class LazutkinChart:
    """Change of variables between native parameter, arclength and ``x``."""

    def __init__(self, curve: BoundaryCurve):
        self.curve = curve
        lam = FourierSeries.from_function(
            lambda u: curve.rho_t(TWO_PI * u) ** (-2.0 / 3.0) * curve.speed_t(TWO_PI * u))
        self._lam = lam
        self.C = 1.0 / (TWO_PI * lam.a0)
        per = (lam - lam.a0).antiderivative() * (1.0 / lam.a0)
        self._per = per - per(0.0)

    # -- native parameter <-> x ---------------------------------------------

    def x_of_t(self, t):
        u = np.asarray(t, dtype=float) / TWO_PI
        return u + self._per(u)

    def dx_dt(self, t):
        """``C rho^{-2/3} |dG/dt|``."""
        return self.C * self._lam(np.asarray(t, dtype=float) / TWO_PI)

    def t_of_x(self, x):
        x = np.asarray(x, dtype=float)
        t = TWO_PI * x
        for _ in range(60):
            err = self.x_of_t(t) - x
            t = t - err / self.dx_dt(t)
            if np.max(np.abs(err), initial=0.0) < 2e-15:
                return t
        raise NumericalFailure("Lazutkin inversion did not converge",
                               residual=float(np.max(np.abs(err))))

    # -- arclength <-> x -----------------------------------------------------

    def x_of_s(self, s):
        return self.x_of_t(self.curve.t_of_s(np.asarray(s, dtype=float)))

    def s_of_x(self, x):
        return self.curve.s_of_t(self.t_of_x(x))

    # -- density -------------------------------------------------------------

    def mu_t(self, t):
        return 1.0 / (2.0 * self.C * self.curve.rho_series(np.asarray(t, dtype=float) / TWO_PI) ** (1.0 / 3.0))

    def mu(self, x):
        """Lazutkin density ``1 / (2 C rho^{1/3})`` at Lazutkin coordinate x."""
        return self.mu_t(self.t_of_x(x))

    @cached_property
    def mu_series(self) -> FourierSeries:
        return FourierSeries.from_function(self.mu)

    def rho_in_x(self, x):
        """``(rho, rho_s, rho_ss)`` at the boundary point with coordinate x."""
        return self.curve.rho_derivs_t(self.t_of_x(x))

    def table(self, n: int = 256) -> np.ndarray:
        x = np.arange(n) / n
        t = self.t_of_x(x)
        return np.column_stack([x, self.curve.s_of_t(t), self.mu_t(t),
                                self.curve.rho_series(t / TWO_PI)])

    def to_csv(self, path, n: int = 256) -> None:
        write_table(path, ["x", "s", "mu", "rho"], self.table(n))


def build_chart(curve: BoundaryCurve) -> LazutkinChart:
    return LazutkinChart(curve)


def s_q(chart: LazutkinChart, q: float, x):
    """``sin(mu/q) / (mu/q) - 1`` at Lazutkin points x."""
    if q < 2:
        raise InvalidArgument("s_q needs q >= 2")
    return sinc_minus_one(chart.mu(x) / q)


def sinc_minus_one(z):
    """``sin(z)/z - 1`` without cancellation for small z."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1.0
    zs = z[small] ** 2
    # Taylor series in Horner form; the first omitted term is below 1e-22 z^2
    acc = np.ones_like(zs)
    for k in range(10, 1, -1):
        acc = 1.0 - zs / ((2 * k) * (2 * k + 1)) * acc
    out[small] = -zs / 6.0 * acc
    zb = z[~small]
    out[~small] = np.sin(zb) / zb - 1.0
    return out if out.ndim else float(out)


# -- expansion functions ------------------------------------------------------

# fitted coefficients smaller than this many standard errors are treated as noise
SIGNIFICANCE = 5.0

@dataclass(frozen=True)
class ExpansionData:
    """Extracted alpha, beta and the remainders left after subtracting them.

    ``residual_magnitudes[q]`` is ``(position, angle)``: the sup over all
    sampled impacts of ``|x_k - y_k - alpha(y_k)/q^2|`` and of
    ``|q phi_k / mu(x_k) - 1 - beta(y_k)/q^2|``.
    """

    alpha: FourierSeries
    beta: FourierSeries
    q_pair: tuple[int, int]
    residual_magnitudes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class OrbitDefects:
    """Scaled deviations of a 1/q pinned family from equispacing.

    ``y`` are the phase points ``theta + k/q`` where ``theta`` is the mean of
    ``x_k - k/q`` over the orbit, ``dx = q^2 (x_k - y)`` and
    ``dphi = q^2 (q phi_k / mu(x_k) - 1)``.
    """

    q: int
    x: np.ndarray
    y: np.ndarray
    dx: np.ndarray
    dphi: np.ndarray


def orbit_defects(curve, chart, q: int, n_grid: int = 64) -> OrbitDefects:
    from .dynamics import _angles, pinned_family_t

    m = max(2, -(-2 * n_grid // q))
    x0 = np.arange(m) / (m * q)
    t = pinned_family_t(curve, chart, 1, q, x0)
    x = chart.x_of_t(t)
    phi = _angles(curve, t, 1)
    k = np.arange(q) / q
    theta = (x - k).mean(axis=1, keepdims=True)
    y = theta + k
    q2 = float(q) ** 2
    return OrbitDefects(q, x, y, q2 * (x - y), q2 * (q * phi / chart.mu_t(t) - 1.0))


def _fit(y, v, n_modes):
    """Least-squares trigonometric fit; returns coefficients and standard errors."""
    y = y.ravel()
    j = np.arange(1, n_modes + 1)
    arg = TWO_PI * np.outer(y, j)
    design = np.hstack([np.ones((y.size, 1)), np.cos(arg), np.sin(arg)])
    c, *_ = np.linalg.lstsq(design, v.ravel(), rcond=None)
    dof = max(y.size - c.size, 1)
    sigma2 = np.sum((design @ c - v.ravel()) ** 2) / dof
    cov = np.linalg.pinv(design.T @ design)
    return c, np.sqrt(np.maximum(sigma2 * np.diag(cov), 0.0))


def _series(c, n_modes):
    return FourierSeries(c[0], c[1:n_modes + 1], c[n_modes + 1:])


def _richardson(fit_q, fit_2q, n_modes, keep_mean=True):
    """Combine two fits and drop coefficients that are not significant."""
    (c1, e1), (c2, e2) = fit_q, fit_2q
    c = (4.0 * c2 - c1) / 3.0
    err = np.sqrt(16.0 * e2 ** 2 + e1 ** 2) / 3.0
    c = np.where(np.abs(c) > SIGNIFICANCE * err, c, 0.0)
    if not keep_mean:
        c[0] = 0.0
    return _series(c, n_modes)


def _residuals(d: OrbitDefects, alpha, beta):
    q2 = float(d.q) ** 2
    pos = np.abs(d.dx - alpha(d.y)) / q2
    ang = np.abs(d.dphi - beta(d.y)) / q2
    return float(pos.max()), float(ang.max())


def extract_alpha_beta(curve, chart, q_pair=(32, 64), n_grid: int = 64) -> ExpansionData:
    """Recover alpha and beta from two orbit families by Richardson extrapolation.

    For each q the scaled defects are fitted, over every sampled impact, by
    a trigonometric polynomial with ``n_grid // 2 - 1`` modes (the k-averaged
    defect as a function of the phase point); the fits for q and 2q are
    combined as ``(4 D_{2q} - D_q) / 3`` to cancel the ``1/q^2`` error.
    Alpha is normalized to zero mean, which fixes the phase of the orbit.
    """
    q1, q2 = q_pair
    if q2 != 2 * q1 or q1 < 2:
        raise InvalidArgument("q_pair must be (q, 2q)")
    if n_grid < 8 or n_grid & (n_grid - 1):
        raise InvalidArgument("n_grid must be a power of two >= 8")
    modes = n_grid // 2 - 1
    d1 = orbit_defects(curve, chart, q1, n_grid)
    d2 = orbit_defects(curve, chart, q2, n_grid)
    fa1, fa2 = _fit(d1.y, d1.dx, modes), _fit(d2.y, d2.dx, modes)
    fb1, fb2 = _fit(d1.y, d1.dphi, modes), _fit(d2.y, d2.dphi, modes)
    alpha = _richardson(fa1, fa2, modes, keep_mean=False)
    beta = _richardson(fb1, fb2, modes)
    res = {q1: _residuals(d1, alpha, beta), q2: _residuals(d2, alpha, beta)}
    # the raw defects must approach their limit at rate 1/q^2
    a1, a2 = _series(fa1[0], modes), _series(fa2[0], modes)
    gap1 = (a1 - alpha - (a1 - alpha).a0).sup_estimate()
    gap2 = (a2 - alpha - (a2 - alpha).a0).sup_estimate()
    if gap1 > 1e-9 and gap2 > gap1 / 2.0:
        warnings.warn(f"defects at q={q2} do not approach alpha faster than at q={q1} "
                      f"({gap2:.2e} vs {gap1:.2e})", AsymptoticsMismatchWarning, stacklevel=2)
    return ExpansionData(alpha, beta, (q1, q2), res)


def curvature_terms(chart: LazutkinChart, x, convention: str = "s"):
    """``-rho^{1/3} rho''/(36 C^2) + rho^{-2/3} rho'^2/(54 C^2)`` at Lazutkin points.

    With ``convention="s"`` the primes are arclength derivatives (those that
    arise from the Taylor expansion of the billiard map in ``s``); ``"x"``
    differentiates the composed function ``rho(s(x))`` in x instead, using
    ``ds/dx = rho^{2/3} / C``.
    """
    rho, r1, r2 = chart.rho_in_x(x)
    c2 = chart.C ** 2
    if convention == "x":
        r2 = (r2 * rho ** (2.0 / 3.0) + (2.0 / 3.0) * r1 ** 2 * rho ** (-1.0 / 3.0)) * rho ** (2.0 / 3.0) / c2
        r1 = r1 * rho ** (2.0 / 3.0) / chart.C
    elif convention != "s":
        raise InvalidArgument(f"unknown derivative convention {convention!r}")
    return -rho ** (1.0 / 3.0) * r2 / (36.0 * c2) + rho ** (-2.0 / 3.0) * r1 ** 2 / (54.0 * c2)


def identity_residual_samples(chart, data: ExpansionData, n: int = 256, convention: str = "s"):
    x = np.arange(n) / n
    return x, data.alpha.derivative()(x) - data.beta(x) - curvature_terms(chart, x, convention)


def curvature_identity_residual(curve, chart, data: ExpansionData, n: int = 256,
                                convention: str = "s") -> float:
    """Sup over ``n`` grid points of ``|alpha' - beta - curvature terms|``."""
    _, r = identity_residual_samples(chart, data, n, convention)
    return float(np.abs(r).max())


def expansion_table(chart, data: ExpansionData, n: int = 256) -> np.ndarray:
    x, r = identity_residual_samples(chart, data, n)
    return np.column_stack([x, data.alpha(x), data.beta(x), data.alpha.derivative()(x), r])


def write_expansion_csv(path, chart, data: ExpansionData, n: int = 256) -> None:
    write_table(path, ["x", "alpha", "beta", "alpha_prime", "identity_residual"],
                expansion_table(chart, data, n))
