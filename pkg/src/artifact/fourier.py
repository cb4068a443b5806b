"""Real trigonometric series on the unit circle and spectral grid tools.

A :class:`FourierSeries` represents a 1-periodic function

    f(x) = a0 + sum_j a_j cos(2 pi j x) + b_j sin(2 pi j x),   j = 1..J

and is the common currency for boundary data, Lazutkin quantities,
deformation functions and expansion coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi

# points x modes per block when summing a series directly
_EVAL_BLOCK = 2_000_000


@dataclass(frozen=True)
class FourierSeries:
    """Finite real Fourier series of a 1-periodic function."""

    a0: float = 0.0
    a: np.ndarray = field(default_factory=lambda: np.zeros(0))
    b: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        n = max(a.size, b.size)
        a = np.pad(a, (0, n - a.size))
        b = np.pad(b, (0, n - b.size))
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, c: float) -> "FourierSeries":
        return cls(c)

    @classmethod
    def mode(cls, j: int, kind: str = "cos", amplitude: float = 1.0) -> "FourierSeries":
        """Single harmonic ``amplitude * cos(2 pi j x)`` (or ``sin``)."""
        if j == 0:
            if kind != "cos":
                raise ValueError("the sine mode j=0 vanishes identically")
            return cls(amplitude)
        coef = np.zeros(j)
        coef[j - 1] = amplitude
        if kind == "cos":
            return cls(0.0, coef, np.zeros(j))
        if kind == "sin":
            return cls(0.0, np.zeros(j), coef)
        raise ValueError(f"unknown mode kind {kind!r}")

    @classmethod
    def from_samples(cls, values: Sequence[float], max_mode: int | None = None) -> "FourierSeries":
        """Trigonometric interpolant of samples on the grid ``x_i = i/N``.

        For even N the Nyquist mode is split evenly so the interpolant is real
        and its derivative is the usual spectral derivative with the Nyquist
        term dropped.
        """
        v = np.asarray(values, dtype=float)
        n = v.size
        c = np.fft.rfft(v) / n
        a0 = c[0].real
        a = 2.0 * c[1:].real
        b = -2.0 * c[1:].imag
        if n % 2 == 0:
            a[-1] *= 0.5
            b[-1] = 0.0
        if max_mode is not None:
            a, b = a[:max_mode], b[:max_mode]
        return cls(a0, a, b)

    @classmethod
    def from_function(
        cls,
        func: Callable[[np.ndarray], np.ndarray],
        n: int = 64,
        tol: float = 1e-15,
        max_n: int = 1 << 16,
    ) -> "FourierSeries":
        """Resolve a smooth periodic function by doubling the sample count.

        Stops once the upper half of the spectrum is below ``tol`` relative
        to the largest coefficient.
        """
        while True:
            x = np.arange(n) / n
            s = cls.from_samples(func(x))
            amp = np.hypot(s.a, s.b)
            scale = max(abs(s.a0), amp.max(initial=0.0), 1e-300)
            if amp[n // 4:].max(initial=0.0) <= tol * scale or n >= max_n:
                return s.trimmed(tol * scale * 1e-2)
            n *= 2

    # -- basic properties ---------------------------------------------------

    @property
    def order(self) -> int:
        return self.a.size

    def coefficients(self) -> np.ndarray:
        """Interleaved vector ``(a0, a1, b1, a2, b2, ...)``."""
        out = np.empty(2 * self.order + 1)
        out[0] = self.a0
        out[1::2] = self.a
        out[2::2] = self.b
        return out

    @classmethod
    def from_coefficients(cls, vec: Sequence[float]) -> "FourierSeries":
        v = np.asarray(vec, dtype=float)
        if v.size % 2 == 0:
            raise ValueError("interleaved coefficient vector must have odd length")
        return cls(v[0], v[1::2], v[2::2])

    def trimmed(self, tol: float = 0.0) -> "FourierSeries":
        amp = np.hypot(self.a, self.b)
        keep = np.nonzero(amp > tol)[0]
        n = keep[-1] + 1 if keep.size else 0
        return FourierSeries(self.a0, self.a[:n], self.b[:n])

    def complex_coefficients(self) -> np.ndarray:
        """``c_j`` for j = 0..J with ``f = Re sum c_j exp(2 pi i j x)``."""
        return np.concatenate(([self.a0], self.a - 1j * self.b))

    # -- evaluation ----------------------------------------------------------

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.full(flat.shape, self.a0)
        if self.order:
            c = self.a - 1j * self.b
            j = np.arange(1, self.order + 1)
            step = max(1, _EVAL_BLOCK // self.order)
            for lo in range(0, flat.size, step):
                xs = flat[lo:lo + step]
                # reduce the phase first: exact on dyadic grids, eps-accurate otherwise
                e = np.exp(TWO_PI * 1j * np.mod(np.outer(xs, j), 1.0))
                out[lo:lo + step] += (e @ c).real
        return out.reshape(x.shape) if x.ndim else out[0]

    def sample(self, n: int) -> np.ndarray:
        """Values on the grid ``i/n``; exact when ``n > 2 * order``."""
        if n <= 2 * self.order:
            return self(np.arange(n) / n)
        c = np.zeros(n // 2 + 1, dtype=complex)
        c[0] = self.a0
        c[1:self.order + 1] = 0.5 * (self.a - 1j * self.b)
        return np.fft.irfft(c * n, n)

    # -- calculus ------------------------------------------------------------

    def derivative(self, order: int = 1) -> "FourierSeries":
        s = self
        for _ in range(order):
            w = TWO_PI * np.arange(1, s.order + 1)
            s = FourierSeries(0.0, w * s.b, -w * s.a)
        return s

    def antiderivative(self) -> "FourierSeries":
        """Periodic antiderivative; requires a vanishing mean."""
        if abs(self.a0) > 1e-14 * max(1.0, np.abs(self.coefficients()).max()):
            raise ValueError("a series with nonzero mean has no periodic antiderivative")
        w = TWO_PI * np.arange(1, self.order + 1)
        return FourierSeries(0.0, -self.b / w, self.a / w)

    def mean(self) -> float:
        return self.a0

    # -- algebra -------------------------------------------------------------

    def _padded(self, other: "FourierSeries"):
        n = max(self.order, other.order)
        return (np.pad(self.a, (0, n - self.order)), np.pad(self.b, (0, n - self.order)),
                np.pad(other.a, (0, n - other.order)), np.pad(other.b, (0, n - other.order)))

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return FourierSeries(self.a0 + other, self.a, self.b)
        a1, b1, a2, b2 = self._padded(other)
        return FourierSeries(self.a0 + other.a0, a1 + a2, b1 + b2)

    __radd__ = __add__

    def __neg__(self):
        return FourierSeries(-self.a0, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if not isinstance(c, (int, float, np.floating)):
            return NotImplemented
        return FourierSeries(c * self.a0, c * self.a, c * self.b)

    __rmul__ = __mul__

    def shifted(self, h: float) -> "FourierSeries":
        """The series of ``x -> f(x + h)``."""
        c = self.complex_coefficients()
        c = c * np.exp(TWO_PI * 1j * np.arange(c.size) * h)
        return FourierSeries(c[0].real, c[1:].real, -c[1:].imag)

    # -- norms ---------------------------------------------------------------

    def sup_estimate(self, n: int | None = None) -> float:
        n = n or max(64, 8 * self.order)
        return float(np.abs(self.sample(n)).max())


def spectral_derivative(values: np.ndarray, order: int = 1, axis: int = -1) -> np.ndarray:
    """Derivative of 1-periodic grid data ``f(i/N)`` along ``axis``."""
    v = np.asarray(values, dtype=float)
    n = v.shape[axis]
    c = np.fft.rfft(v, axis=axis)
    k = np.arange(c.shape[axis])
    factor = (TWO_PI * 1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        factor[-1] = 0.0
    shape = [1] * v.ndim
    shape[axis] = -1
    return np.fft.irfft(c * factor.reshape(shape), n, axis=axis)


def trig_interpolate(values: np.ndarray, x, axis: int = 0) -> np.ndarray:
    """Evaluate the trigonometric interpolant of grid data at points ``x``.

    ``values`` holds samples at ``i/N`` along ``axis``; the remaining axes are
    carried through, so a table of several functions interpolates at once.
    """
    v = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = v.shape[0]
    c = np.fft.rfft(v, axis=0) / n
    w = np.full(c.shape[0], 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    c = c * w.reshape((-1,) + (1,) * (v.ndim - 1))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    e = np.exp(TWO_PI * 1j * np.outer(x, np.arange(c.shape[0])))
    out = (e @ c.reshape(c.shape[0], -1)).real
    return out.reshape((x.size,) + v.shape[1:])
