"""Billiard map and Birkhoff periodic orbits.

Orbits are critical points of the perimeter of cyclically ordered inscribed
polygons.  All solvers work in the curve's native parameter ``t``; a
(p, q) polygon is a vector ``t_0 < t_1 < ... < t_{q-1} < t_0 + 2 pi p`` whose
consecutive chords are the billiard trajectory.

The perimeter Hessian is tridiagonal with two corner entries.  Pinning the
first impact (as the families indexed by a starting point do) removes the
corners, so each Newton step is a Thomas solve, batched across orbits.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateOrbit, InvalidArgument, NumericalFailure
from .fourier import TWO_PI
from .geometry import BoundaryCurve, write_table


@dataclass(frozen=True)
class PhasePoint:
    s: float
    phi: float


@dataclass(frozen=True, eq=False)
class BirkhoffOrbit:
    """A (p, q) periodic billiard orbit.

    ``impacts`` are arclengths reduced to ``[0, length)`` in orbit order;
    ``t`` and ``x`` hold the same points unwrapped (increasing, total winding
    p) in the native parameter and, if a chart was supplied, in Lazutkin
    coordinates.
    """

    p: int
    q: int
    impacts: np.ndarray
    angles: np.ndarray
    perimeter: float
    t: np.ndarray
    x: np.ndarray | None = None
    gradient_norm: float = 0.0

    def points(self, curve: BoundaryCurve) -> np.ndarray:
        g, _, _ = curve.frame(self.t)
        return g.T


# -- perimeter functional -----------------------------------------------------

def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _polygon(curve, t, p):
    """Chord data for polygons ``t`` of shape (..., q)."""
    g, d1, d2 = curve.frame(t)
    nxt = np.roll(t, -1, axis=-1)
    nxt[..., -1] += TWO_PI * p
    gn, d1n, d2n = curve.frame(nxt)
    d = gn - g
    ell = np.hypot(d[0], d[1])
    u = d / ell
    return g, d1, d2, d1n, d2n, d, ell, u


def perimeter_derivatives(curve, t, p):
    """Perimeter, gradient and Hessian bands of polygons ``t`` (..., q).

    Returns ``(P, grad, diag, off)`` where ``off[..., k]`` couples ``t_k`` and
    ``t_{k+1}`` (index q-1 couples the last point to the first).
    """
    _, d1, d2, d1n, d2n, d, ell, u = _polygon(curve, t, p)
    # l_k depends on t_k (start) and t_{k+1} (end)
    dl_start = -(u[0] * d1[0] + u[1] * d1[1])
    dl_end = u[0] * d1n[0] + u[1] * d1n[1]
    cs = _cross(u, d1)
    ce = _cross(u, d1n)
    h_ss = cs ** 2 / ell - (u[0] * d2[0] + u[1] * d2[1])
    h_ee = ce ** 2 / ell + (u[0] * d2n[0] + u[1] * d2n[1])
    h_se = -cs * ce / ell
    grad = dl_start + np.roll(dl_end, 1, axis=-1)
    diag = h_ss + np.roll(h_ee, 1, axis=-1)
    return ell.sum(axis=-1), grad, diag, h_se


def _thomas(diag, off, rhs):
    """Solve symmetric tridiagonal systems batched over the leading axis.

    ``off[..., i]`` couples unknowns i and i+1.  Also returns the pivots,
    whose signs give the inertia of the matrix.
    """
    n = diag.shape[-1]
    c = np.empty_like(diag)
    dp = np.empty_like(diag)
    y = np.empty_like(rhs)
    dp[..., 0] = diag[..., 0]
    y[..., 0] = rhs[..., 0]
    for i in range(1, n):
        m = off[..., i - 1] / dp[..., i - 1]
        c[..., i - 1] = m
        dp[..., i] = diag[..., i] - m * off[..., i - 1]
        y[..., i] = rhs[..., i] - m * y[..., i - 1]
    x = np.empty_like(rhs)
    x[..., n - 1] = y[..., n - 1] / dp[..., n - 1]
    for i in range(n - 2, -1, -1):
        x[..., i] = (y[..., i] - off[..., i] * x[..., i + 1]) / dp[..., i]
    return x, dp


def _gaps(t, p):
    nxt = np.roll(t, -1, axis=-1)
    nxt[..., -1] += TWO_PI * p
    return nxt - t


def _check_rotation(p, q):
    if p < 1 or q < 2 or gcd(p, q) != 1:
        raise InvalidArgument(f"need coprime positive p, q (got {p}/{q})")
    if 2 * p >= q:
        raise InvalidArgument(f"rotation number {p}/{q} must be below 1/2")


def solve_pinned(curve, t, p, tol=1e-12, max_iter=60):
    """Maximize the perimeter over ``t[..., 1:]`` with ``t[..., 0]`` fixed.

    ``t`` is a batch of seeds of shape (B, q).  Returns the converged batch
    and the final gradient norms.
    """
    t = np.array(t, dtype=float, copy=True)
    if t.ndim == 1:
        t = t[None]
    q = t.shape[1]
    active = np.ones(t.shape[0], dtype=bool)
    gnorm = np.full(t.shape[0], np.inf)
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        ta = t[idx]
        _, g, dg, off = perimeter_derivatives(curve, ta, p)
        gf = g[:, 1:]
        gnorm[idx] = np.abs(gf).max(axis=1)
        done = gnorm[idx] < tol
        active[idx[done]] = False
        if np.all(done):
            break
        step, piv = _thomas(dg[:, 1:], off[:, 1:q - 1], -gf)
        full = np.zeros_like(ta)
        full[:, 1:] = step
        gaps = _gaps(ta, p)
        dgaps = _gaps(full, 0)
        # keep the polygon cyclically ordered: shrink steps that would close a gap
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dgaps < 0, -0.5 * gaps / dgaps, np.inf).min(axis=1)
        scale = np.minimum(1.0, ratio)
        # away from a maximum (indefinite Hessian) fall back to a gradient step
        bad = np.any(piv >= 0, axis=1) & ~done
        if np.any(bad):
            h = 0.25 * gaps[bad].min(axis=1) / np.maximum(np.abs(gf[bad]).max(axis=1), 1e-300)
            full[bad, 1:] = np.sign(gf[bad]) * np.minimum(np.abs(gf[bad]) * h[:, None], 0.1 * gaps[bad].min(axis=1)[:, None])
            scale[bad] = 1.0
        upd = ~done
        t[idx[upd]] = ta[upd] + scale[upd, None] * full[upd]
        if np.any(_gaps(t[idx[upd]], p) <= 0):
            raise DegenerateOrbit("impact points merged during the perimeter ascent")
    if np.any(active):
        raise NumericalFailure("pinned orbit solver did not converge",
                               gradient_norm=float(gnorm[active].max()), q=q, p=p)
    _, g, dg, off = perimeter_derivatives(curve, t, p)
    _, piv = _thomas(dg[:, 1:], off[:, 1:q - 1], np.zeros_like(dg[:, 1:]))
    if np.any(piv >= 0):
        raise DegenerateOrbit("pinned critical point is not a strict perimeter maximum")
    return t, np.abs(g[:, 1:]).max(axis=1)


def _angles(curve, t, p):
    _, d1, _, _, _, d, _, _ = _polygon(curve, t, p)
    # angle from the tangent to the outgoing chord, in (0, pi)
    return np.arctan2(_cross(d1, d), d1[0] * d[0] + d1[1] * d[1])


def _make_orbit(curve, t, p, chart=None, gnorm=0.0):
    per, _, _, _ = perimeter_derivatives(curve, t, p)
    return BirkhoffOrbit(
        p=p, q=t.size,
        impacts=np.mod(curve.s_of_t(t), curve.length),
        angles=_angles(curve, t, p),
        perimeter=float(per),
        t=t.copy(),
        x=None if chart is None else chart.x_of_t(t),
        gradient_norm=float(gnorm),
    )


def _seed_t(curve, chart, p, q, x0):
    """Equispaced seed in Lazutkin x (or native t when no chart is given)."""
    k = np.arange(q)
    if chart is None:
        return np.add.outer(np.atleast_1d(x0) * TWO_PI, TWO_PI * k * p / q)
    return chart.t_of_x(np.add.outer(np.atleast_1d(x0), k * p / q))


# -- public operations --------------------------------------------------------

def billiard_step(curve: BoundaryCurve, point: PhasePoint) -> PhasePoint:
    """One bounce: follow the chord leaving ``point`` to the next impact."""
    if not 0.0 < point.phi < np.pi:
        raise InvalidArgument("reflection angle must lie in (0, pi)")
    t0 = float(curve.t_of_s(np.mod(point.s, curve.length)))
    g0, d10, _ = curve.frame(t0)
    tan = d10 / np.hypot(*d10)
    inward = np.array([-tan[1], tan[0]])
    direction = np.cos(point.phi) * tan + np.sin(point.phi) * inward

    def angle(t1):
        d = curve.frame(t1)[0] - g0
        return np.mod(np.arctan2(_cross(tan, d), tan @ d), TWO_PI) - point.phi

    # the chord angle seen from t0 increases from 0 to pi along the boundary
    lo, hi = t0 + 1e-7, t0 + TWO_PI - 1e-7
    if angle(lo) > 0 or angle(hi) < 0:
        raise NumericalFailure("chord intersection is not bracketed", phi=point.phi, s=point.s)
    t1 = brentq(angle, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    _, d11, _ = curve.frame(t1)
    tan1 = d11 / np.hypot(*d11)
    phi1 = np.arctan2(_cross(direction, tan1), direction @ tan1)
    return PhasePoint(float(np.mod(curve.s_of_t(t1), curve.length)), float(phi1))


def birkhoff_orbit(curve: BoundaryCurve, p: int, q: int, seed_s: float = 0.0,
                   chart=None, tol: float = 1e-12) -> BirkhoffOrbit:
    """Perimeter-maximizing (p, q) orbit starting near arclength ``seed_s``.

    The pinned maximum ``P*(t0)`` is scanned over one cell of starting
    points; its maximizer is a genuine billiard orbit, located by
    bracketing the zero of the envelope derivative ``dP*/dt0`` and polished
    by Newton's method on all q coordinates.
    """
    _check_rotation(p, q)
    x_seed = float(chart.x_of_s(seed_s)) if chart is not None else seed_s / curve.length
    cell = np.arange(16) / (16 * q) + x_seed
    seeds = _seed_t(curve, chart, p, q, cell)
    t, _ = solve_pinned(curve, seeds, p, tol=tol)
    per, g, _, _ = perimeter_derivatives(curve, t, p)
    if per.max() - per.min() <= 1e-12 * per.max() or np.abs(g[:, 0]).max() <= tol:
        # every starting point lies on a periodic orbit (integrable caustic)
        return _make_orbit(curve, t[0], p, chart, np.abs(g[0]).max())

    i = int(np.argmax(per))
    warm = t[i] - t[i, 0]

    def envelope(t0):
        tt, _ = solve_pinned(curve, (warm + t0)[None], p, tol=tol)
        return perimeter_derivatives(curve, tt[0], p)[1][0], tt[0]

    # the maximum of P*(t0) sits where dP*/dt0 changes sign from + to -
    h = t[(i + 1) % 16, 0] - t[i, 0]
    h = np.mod(h, TWO_PI) if h <= 0 else h
    lo_t, hi_t = t[i, 0] - h, t[i, 0] + h
    if not (envelope(lo_t)[0] > 0 > envelope(hi_t)[0]):
        raise NumericalFailure("could not bracket the maximizing starting point", p=p, q=q)
    t0 = brentq(lambda s: envelope(s)[0], lo_t, hi_t, xtol=1e-15, maxiter=200)
    t_best = envelope(t0)[1]
    t_best = _polish_full(curve, t_best, p, tol)
    gn = np.abs(perimeter_derivatives(curve, t_best, p)[1]).max()
    return _make_orbit(curve, t_best, p, chart, gn)


def _polish_full(curve, t, p, tol, max_iter=20):
    q = t.size
    for _ in range(max_iter):
        _, g, dg, off = perimeter_derivatives(curve, t, p)
        if np.abs(g).max() < tol:
            return t
        h = np.diag(dg) + np.diag(off[:q - 1], 1) + np.diag(off[:q - 1], -1)
        h[0, q - 1] += off[q - 1]
        h[q - 1, 0] += off[q - 1]
        step = np.linalg.lstsq(h, -g, rcond=1e-12)[0]
        t = t + step
    if np.abs(g).max() >= tol:
        raise NumericalFailure("unconstrained polish did not converge", gradient_norm=float(np.abs(g).max()))
    return t


def orbit_family(curve: BoundaryCurve, chart, p: int, q: int, x_grid,
                 tol: float = 1e-12, workers: int = 1) -> list[BirkhoffOrbit]:
    """Orbits with first impact pinned at each Lazutkin coordinate in ``x_grid``."""
    _check_rotation(p, q)
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    t = pinned_family_t(curve, chart, p, q, x_grid, tol=tol, workers=workers)
    return [_make_orbit(curve, row, p, chart) for row in t]


def pinned_family_t(curve, chart, p, q, x_grid, tol=1e-12, workers=1):
    """Native parameters of the pinned family, shape (len(x_grid), q)."""
    seeds = _seed_t(curve, chart, p, q, np.asarray(x_grid, dtype=float))
    if workers <= 1 or seeds.shape[0] < 2 * workers:
        return solve_pinned(curve, seeds, p, tol=tol)[0]
    chunks = np.array_split(seeds, workers)
    with ThreadPoolExecutor(workers) as ex:
        parts = list(ex.map(lambda c: solve_pinned(curve, c, p, tol=tol)[0], chunks))
    return np.concatenate(parts)


@dataclass(frozen=True)
class FamilyJet:
    """Pinned-family data and its first derivative in the starting point x.

    ``x[k]`` are the impacts (unwrapped Lazutkin), ``w[k] = sin(phi_k) /
    mu(x_k)``; ``dx`` and ``dw`` are derivatives with respect to the pinned
    coordinate ``x = x[0]``, obtained from the implicit function theorem
    applied to the pinned critical-point equations.
    """

    x: np.ndarray
    phi: np.ndarray
    w: np.ndarray
    dx: np.ndarray
    dw: np.ndarray
    perimeter: np.ndarray


def family_jet(curve, chart, p, q, x0, tol=1e-12) -> FamilyJet:
    """Pinned orbits at the points ``x0`` together with their x-derivatives."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    t = pinned_family_t(curve, chart, p, q, x0, tol=tol)
    per, _, dg, off = perimeter_derivatives(curve, t, p)
    # d t_free / d t_0 from H_ff tau = -H_f0
    rhs = np.zeros_like(dg[:, 1:])
    rhs[:, 0] -= off[:, 0]
    rhs[:, -1] -= off[:, q - 1]
    tau_f, _ = _thomas(dg[:, 1:], off[:, 1:q - 1], rhs)
    tau = np.concatenate([np.ones((t.shape[0], 1)), tau_f], axis=1)

    _, d1, d2, d1n, _, d, ell, _ = _polygon(curve, t, p)
    phi = np.arctan2(_cross(d1, d), d1[0] * d[0] + d1[1] * d[1])
    tau_n = np.roll(tau, -1, axis=1)
    sp2 = d1[0] ** 2 + d1[1] ** 2
    turn = _cross(d1, d2) / sp2
    dphi = (_cross(d, d1n) * tau_n - _cross(d, d1) * tau) / ell ** 2 - turn * tau

    u = t / TWO_PI
    rho = curve.rho_series(u)
    rho_t = curve.rho_series.derivative()(u) / TWO_PI
    c2 = 2.0 * chart.C
    w = c2 * rho ** (1.0 / 3.0) * np.sin(phi)
    dw = c2 * (rho ** (1.0 / 3.0) * np.cos(phi) * dphi
               + np.sin(phi) * rho ** (-2.0 / 3.0) * rho_t * tau / 3.0)
    xt = chart.dx_dt(t)
    dt0 = xt[:, :1]
    return FamilyJet(x=chart.x_of_t(t), phi=phi, w=w, dx=xt * tau / dt0, dw=dw / dt0,
                     perimeter=per)


def perimeter_derivative(curve, chart, p: int, q: int, x_grid, tol: float = 1e-12) -> np.ndarray:
    """``d/dx`` of the pinned-family perimeter at each starting point.

    The free impacts are critical, so only the explicit dependence on the
    pinned impact survives: ``dP/dx = (dP/dt_0) / (dx/dt)``.  It vanishes
    identically when the family lies on an integrable caustic.
    """
    _check_rotation(p, q)
    t = pinned_family_t(curve, chart, p, q, np.atleast_1d(np.asarray(x_grid, dtype=float)), tol=tol)
    _, g, _, _ = perimeter_derivatives(curve, t, p)
    return g[:, 0] / chart.dx_dt(t[:, 0])


def orbit_table(orbits, x_grid) -> np.ndarray:
    rows = []
    for x, orb in zip(x_grid, orbits):
        for k in range(orb.q):
            rows.append([x, k, orb.impacts[k], orb.angles[k], orb.perimeter])
    return np.array(rows)


def write_orbits_csv(path, orbits, x_grid) -> None:
    write_table(path, ["x", "k", "s_k", "phi_k", "perimeter"], orbit_table(orbits, x_grid))
