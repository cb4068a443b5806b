"""Figures: deterministic SVG orbit drawings and matplotlib report plots."""

from __future__ import annotations

from pathlib import Path

import numpy as np

CANVAS = 1000
MARGIN = 50


# -- chord envelope -----------------------------------------------------------

def chord_envelope(polygons) -> np.ndarray:
    """Intersections of consecutive chords of each closed polygon.

    For an orbit tangent to a caustic these points lie on the caustic.
    Points are returned sorted by angle about their centroid.
    """
    pts = []
    for poly in polygons:
        poly = np.asarray(poly, dtype=float)
        a, b = poly, np.roll(poly, -1, axis=0)
        c = np.roll(poly, -2, axis=0)
        d1, d2 = b - a, c - b
        den = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        ok = np.abs(den) > 1e-14
        # a + s d1 = b + u d2
        diff = b - a
        s = (diff[:, 0] * d2[:, 1] - diff[:, 1] * d2[:, 0])[ok] / den[ok]
        pts.append(a[ok] + s[:, None] * d1[ok])
    if not pts:
        return np.zeros((0, 2))
    p = np.concatenate(pts)
    if p.size == 0:
        return p.reshape(0, 2)
    ctr = p.mean(axis=0)
    return p[np.argsort(np.arctan2(p[:, 1] - ctr[1], p[:, 0] - ctr[0]), kind="stable")]


# -- SVG ----------------------------------------------------------------------

def _mapper(boundary):
    lo, hi = boundary.min(axis=0), boundary.max(axis=0)
    scale = (CANVAS - 2 * MARGIN) / max(hi[0] - lo[0], hi[1] - lo[1])
    mid = 0.5 * (lo + hi)

    def to_px(xy):
        xy = np.atleast_2d(xy)
        px = CANVAS / 2 + (xy[:, 0] - mid[0]) * scale
        py = CANVAS / 2 - (xy[:, 1] - mid[1]) * scale
        return np.column_stack([px, py])
    return to_px


def _points_attr(px):
    return " ".join(f"{x:.3f},{y:.3f}" for x, y in px)


def orbit_svg(boundary, polygons, envelope: bool = False) -> str:
    """SVG 1.1 document on a fixed 1000x1000 canvas."""
    boundary = np.asarray(boundary, dtype=float)
    to_px = _mapper(boundary)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{CANVAS}" '
        f'viewBox="0 0 {CANVAS} {CANVAS}">',
        f'<rect x="0" y="0" width="{CANVAS}" height="{CANVAS}" fill="white"/>',
        f'<polygon id="boundary" points="{_points_attr(to_px(boundary))}" fill="none" '
        'stroke="black" stroke-width="2"/>',
    ]
    for i, poly in enumerate(polygons):
        out.append(f'<polygon id="orbit-{i}" points="{_points_attr(to_px(poly))}" fill="none" '
                   'stroke="#1f77b4" stroke-width="1"/>')
    if envelope:
        env = chord_envelope(polygons)
        if len(env):
            out.append(f'<polygon id="envelope" points="{_points_attr(to_px(env))}" fill="none" '
                       'stroke="#d62728" stroke-width="1.5" stroke-dasharray="6,4"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_orbit_svg(path, boundary, polygons, envelope: bool = False) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(orbit_svg(boundary, polygons, envelope))


# -- matplotlib report figures ------------------------------------------------

def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    _pyplot().close(fig)


def line_figure(path, x, series: dict, xlabel: str, ylabel: str, title: str = "") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in series.items():
        ax.plot(x, y, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    _save(fig, path)


def loglog_figure(path, series: dict, xlabel: str, ylabel: str, title: str = "") -> None:
    """``series`` maps label to ``(x, y)``; non-positive values are dropped."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (x, y) in series.items():
        x, y = np.asarray(x, float), np.asarray(y, float)
        ok = y > 0
        ax.loglog(x[ok], y[ok], "o-", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    _save(fig, path)


def orbit_figure(path, boundary, polygons, envelope: bool = False) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    b = np.vstack([boundary, boundary[:1]])
    ax.plot(b[:, 0], b[:, 1], "k-", lw=1.5)
    for poly in polygons:
        p = np.vstack([poly, poly[:1]])
        ax.plot(p[:, 0], p[:, 1], "-", color="#1f77b4", lw=0.6)
    if envelope:
        env = chord_envelope(polygons)
        if len(env):
            ax.plot(env[:, 0], env[:, 1], ".", color="#d62728", ms=2)
    ax.set_aspect("equal")
    ax.axis("off")
    _save(fig, path)
