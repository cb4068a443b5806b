"""Strictly convex planar boundaries.

Every curve is described internally by a smooth 2 pi-periodic native parameter
``t`` (the eccentric angle for ellipses, the tangent angle for curvature-based
domains, scaled arclength for sampled tables) with closed-form or spectral
position, velocity and acceleration.  Arclength ``s`` is derived from the
speed by spectral quadrature and inverted by Newton's method, so all public
accessors take arclength while the billiard solvers work in ``t``.
"""

from __future__ import annotations

import csv
import itertools
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ClosureViolation, ConvexityError, InvalidArgument, NumericalFailure
from .fourier import TWO_PI, FourierSeries

_ids = itertools.count()


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


class BoundaryCurve:
    """Counter-clockwise strictly convex closed curve.

    Subclasses provide :meth:`frame`, returning position, first and second
    derivatives with respect to the native parameter.  ``s = 0`` corresponds
    to ``t = 0``.
    """

    kind = "curve"

    def __init__(self):
        self.curve_id = f"{self.kind}-{next(_ids)}"

    # -- native parametrization ---------------------------------------------

    def frame(self, t):
        """Return ``(G, dG, d2G)``, each of shape ``(2,) + t.shape``."""
        raise NotImplementedError

    def speed_t(self, t):
        _, d1, _ = self.frame(t)
        return np.hypot(d1[0], d1[1])

    def rho_t(self, t):
        """Radius of curvature as a function of the native parameter."""
        _, d1, d2 = self.frame(t)
        sp = np.hypot(d1[0], d1[1])
        return sp ** 3 / _cross(d1, d2)

    @cached_property
    def _speed_series(self) -> FourierSeries:
        return FourierSeries.from_function(lambda u: self.speed_t(TWO_PI * u))

    @cached_property
    def rho_series(self) -> FourierSeries:
        """rho as a 1-periodic series in ``u = t / 2 pi``."""
        rho = FourierSeries.from_function(lambda u: self.rho_t(TWO_PI * u))
        grid = rho.sample(max(1024, 8 * rho.order))
        if grid.min() <= 0.0:
            raise ConvexityError(f"radius of curvature reaches {grid.min():.3e}")
        return rho

    @cached_property
    def length(self) -> float:
        return TWO_PI * self._speed_series.a0

    @cached_property
    def _arclength_periodic(self) -> FourierSeries:
        sp = self._speed_series
        per = (sp - sp.a0).antiderivative() * TWO_PI
        return per - per(0.0)

    def s_of_t(self, t):
        """Arclength from ``t = 0``; monotone, ``s(t + 2 pi) = s(t) + length``."""
        t = np.asarray(t, dtype=float)
        return self.length * t / TWO_PI + self._arclength_periodic(t / TWO_PI)

    def t_of_s(self, s):
        s = np.asarray(s, dtype=float)
        t = TWO_PI * s / self.length
        for _ in range(60):
            err = self.s_of_t(t) - s
            t = t - err / self.speed_t(t)
            if np.max(np.abs(err), initial=0.0) < 1e-14 * self.length:
                return t
        raise NumericalFailure("arclength inversion did not converge",
                               residual=float(np.max(np.abs(err))))

    # -- arclength accessors -------------------------------------------------

    def _wrap(self, s):
        return np.mod(np.asarray(s, dtype=float), self.length)

    def position(self, s):
        g, _, _ = self.frame(self.t_of_s(self._wrap(s)))
        return np.moveaxis(g, 0, -1)

    def tangent(self, s):
        _, d1, _ = self.frame(self.t_of_s(self._wrap(s)))
        return np.moveaxis(d1 / np.hypot(d1[0], d1[1]), 0, -1)

    def outward_normal(self, s):
        tan = self.tangent(s)
        return np.stack([tan[..., 1], -tan[..., 0]], axis=-1)

    def curvature_radius(self, s):
        return self.rho_series(self.t_of_s(self._wrap(s)) / TWO_PI)

    def rho_derivs_t(self, t):
        """``(rho, d rho/ds, d^2 rho/ds^2)`` at native parameters ``t``."""
        u = np.asarray(t, dtype=float) / TWO_PI
        r = self.rho_series
        rho = r(u)
        rt = r.derivative()(u) / TWO_PI
        rtt = r.derivative(2)(u) / TWO_PI ** 2
        sp = self._speed_series
        sig = sp(u)
        sig_t = sp.derivative()(u) / TWO_PI
        return rho, rt / sig, (rtt * sig - rt * sig_t) / sig ** 3

    def curvature_radius_derivs(self, s):
        """First and second arclength derivatives of rho."""
        _, r1, r2 = self.rho_derivs_t(self.t_of_s(self._wrap(s)))
        return r1, r2

    # -- export --------------------------------------------------------------

    def table(self, n: int = 512) -> np.ndarray:
        s = self.length * np.arange(n) / n
        t = self.t_of_s(s)
        g, _, _ = self.frame(t)
        return np.column_stack([s, g[0], g[1], self.rho_series(t / TWO_PI)])

    def to_csv(self, path, n: int = 512) -> None:
        write_table(path, ["s", "x", "y", "rho"], self.table(n))


class Ellipse(BoundaryCurve):
    kind = "ellipse"

    def __init__(self, a: float, b: float):
        self.a, self.b = float(a), float(b)
        super().__init__()

    def frame(self, t):
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        a, b = self.a, self.b
        return (np.array([a * c, b * s]), np.array([-a * s, b * c]), np.array([-a * c, -b * s]))

    def rho_t(self, t):
        t = np.asarray(t, dtype=float)
        q = (self.a * np.sin(t)) ** 2 + (self.b * np.cos(t)) ** 2
        return q ** 1.5 / (self.a * self.b)


class CurvatureCurve(BoundaryCurve):
    """Curve given by its radius of curvature as a function of tangent angle.

    The tangent at native parameter ``theta`` is ``(-sin theta, cos theta)``
    so that ``theta = 0`` sits at the rightmost point, matching the ellipse
    convention.  Position is the closed-form integral of
    ``rho(theta) * tangent(theta)``.
    """

    kind = "curvature_fourier"

    def __init__(self, coeffs: FourierSeries):
        self.coeffs = coeffs
        # rho(theta) = sum_m r_m e^{i m theta}, m = -J..J
        c = coeffs.complex_coefficients()
        self._m = np.arange(1, c.size)
        self._r_pos = 0.5 * c[1:]
        self._r0 = c[0].real
        self._r_neg = np.conj(self._r_pos)
        closure = TWO_PI * abs(self._r_neg[0]) if c.size > 1 else 0.0
        if closure > 1e-10:
            raise ClosureViolation(
                f"first harmonic of rho has size {closure:.3e}; the curve does not close")
        th = TWO_PI * np.arange(4096) / 4096
        rmin = coeffs(th / TWO_PI).min()
        if rmin <= 0.0:
            raise ConvexityError(f"radius of curvature reaches {rmin:.3e}")
        # centre the boundary samples on the origin
        self._offset = np.zeros(2)
        self._offset = -self._position(th[::16]).mean(axis=1)
        super().__init__()

    def _rho(self, th):
        return self.coeffs(th / TWO_PI)

    def frame(self, t):
        th = np.asarray(t, dtype=float)
        rho = self._rho(th)
        drho = self.coeffs.derivative()(th / TWO_PI) / TWO_PI
        tan = np.array([-np.sin(th), np.cos(th)])
        nrm = np.array([-np.cos(th), -np.sin(th)])
        z = self._position(th)
        return z, rho * tan, drho * tan + rho * nrm

    def _position(self, th):
        # Z(theta) = int_0^theta i rho(u) e^{iu} du, anchored so Z(0) is real
        flat = th.ravel()
        z = self._r0 * (np.exp(1j * flat) - 1.0)
        for sign, r in ((1, self._r_pos), (-1, self._r_neg)):
            m = sign * self._m
            keep = m != -1
            if not np.any(keep):
                continue
            mm, rr = m[keep], r[keep]
            z += (np.exp(1j * np.outer(flat, mm + 1)) - 1.0) @ (rr / (mm + 1))
        z = z.reshape(th.shape)
        return np.array([z.real, z.imag]) + self._offset.reshape((2,) + (1,) * th.ndim)

    def rho_t(self, t):
        return self._rho(np.asarray(t, dtype=float))


class SampledCurve(BoundaryCurve):
    """Curve stored as points on a uniform arclength grid.

    Position is the trigonometric interpolant of the samples; derivatives are
    spectral.  The native parameter is ``t = 2 pi s / L``.
    """

    kind = "sampled"

    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.size < 8 or x.size != y.size:
            raise InvalidArgument("need matching x, y samples (at least 8)")
        self._xs = FourierSeries.from_samples(x)
        self._ys = FourierSeries.from_samples(y)
        self._dx = self._xs.derivative()
        self._dy = self._ys.derivative()
        self._ddx = self._xs.derivative(2)
        self._ddy = self._ys.derivative(2)
        super().__init__()

    def frame(self, t):
        u = np.asarray(t, dtype=float) / TWO_PI
        g = np.array([self._xs(u), self._ys(u)])
        d1 = np.array([self._dx(u), self._dy(u)]) / TWO_PI
        d2 = np.array([self._ddx(u), self._ddy(u)]) / TWO_PI ** 2
        return g, d1, d2


def make_ellipse(a: float, b: float) -> Ellipse:
    """Ellipse with semi-axes ``a >= b > 0``; ``s = 0`` at ``(a, 0)``."""
    if not (a > 0 and b > 0):
        raise InvalidArgument("ellipse semi-axes must be positive")
    if a < b:
        raise InvalidArgument("expected a >= b")
    return Ellipse(a, b)


def make_circle(radius: float = 1.0) -> Ellipse:
    return make_ellipse(radius, radius)


def make_from_curvature_fourier(coeffs: FourierSeries) -> CurvatureCurve:
    """Curve whose radius of curvature, as a function of tangent angle
    ``theta = 2 pi u``, is ``coeffs(u)``.  The first harmonic must vanish."""
    return CurvatureCurve(coeffs)


def write_table(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in np.atleast_2d(rows):
            w.writerow([f"{float(v):.17g}" for v in row])


def read_table(path, required=None) -> dict[str, np.ndarray]:
    """Read a comma table with a header row into column arrays."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidArgument(f"{path}: empty table")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    if not body:
        raise InvalidArgument(f"{path}: table has a header but no rows")
    try:
        data = np.array([[float(v) for v in r] for r in body])
    except ValueError as exc:
        raise InvalidArgument(f"{path}: non-numeric entry ({exc})") from None
    if data.shape[1] != len(header):
        raise InvalidArgument(f"{path}: row width does not match header")
    cols = {h: data[:, i] for i, h in enumerate(header)}
    missing = set(required or ()) - cols.keys()
    if missing:
        raise InvalidArgument(f"{path}: missing columns {sorted(missing)}")
    return cols


def curve_from_csv(path) -> SampledCurve:
    """Rebuild a curve from an ``s, x, y, rho`` table on a uniform s grid."""
    cols = read_table(path, required=("s", "x", "y"))
    return SampledCurve(cols["x"], cols["y"])
