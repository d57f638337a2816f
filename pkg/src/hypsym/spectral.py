r"""Functions of time on a uniform periodic grid, and Fourier multipliers.

A :class:`SampledFunction` stores ``N`` samples over one period ``T_per``.
Trailing axes are allowed, so the same class carries scalar signals
(shape ``(N,)``) and matrix-valued signals (shape ``(N, m, m)``).

Spectra follow the convention

.. math:: c_k = \frac{1}{N}\sum_n f(t_n) e^{-2\pi i k n / N},

so that :math:`\cos(2\pi k t / T_{per})` has coefficients of modulus 1/2 at
``±k``.  Multipliers are written in terms of the angular frequency
:math:`\xi = 2\pi k / T_{per}`.

Functions given on an interval ``[0, T]`` are extended to period ``2T`` by
even reflection; the *window* records the interval on which norms are taken.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np
from scipy.integrate import trapezoid

from .errors import DomainError

Symbol = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]

DEFAULT_N = 2**14
DEFAULT_PERIOD = 2 * math.pi


def _check_size(n):
    if n < 8 or n & (n - 1):
        raise DomainError(f"grid size must be a power of two >= 8, got {n}")


def integer_frequencies(n):
    """Integer frequencies in FFT order, with the Nyquist index taken as +N/2."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    k[n // 2] = n // 2
    return k


@dataclass(frozen=True)
class SampledFunction:
    """Samples of a periodic function on ``t_n = n T_per / N``.

    Parameters
    ----------
    values : array_like
        Samples, first axis of length ``N`` (a power of two, ``N >= 8``).
    period : float
        Period ``T_per``.
    window : (float, float), optional
        Interval on which norms are evaluated; defaults to one full period.
    """

    values: np.ndarray
    period: float = DEFAULT_PERIOD
    window: tuple = None

    def __post_init__(self):
        v = np.array(self.values)
        if not (np.issubdtype(v.dtype, np.floating) or np.issubdtype(v.dtype, np.complexfloating)):
            v = v.astype(float)
        _check_size(v.shape[0])
        if not self.period > 0:
            raise DomainError("period must be positive")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        w = self.window
        if w is None:
            w = (0.0, float(self.period))
        w = (float(w[0]), float(w[1]))
        if not (0.0 <= w[0] < w[1] <= self.period + 1e-12 * self.period):
            raise DomainError(f"window {w} not inside one period")
        object.__setattr__(self, "window", w)

    # grid ---------------------------------------------------------------
    @property
    def n(self):
        return self.values.shape[0]

    @property
    def spacing(self):
        return self.period / self.n

    @property
    def times(self):
        return np.arange(self.n) * self.spacing

    @property
    def is_real(self):
        return not np.iscomplexobj(self.values)

    @cached_property
    def frequencies(self):
        """Angular frequencies ``2 pi k / T_per`` in FFT order."""
        return 2 * np.pi * integer_frequencies(self.n) / self.period

    @cached_property
    def spectrum(self):
        s = np.fft.fft(self.values, axis=0) / self.n
        s.flags.writeable = False
        return s

    def like(self, values):
        """A new function on the same grid and window."""
        return type(self)(values, self.period, self.window)

    # window -------------------------------------------------------------
    def window_indices(self, left=0.0, right=0.0):
        """Indices (possibly wrapping) of grid points in ``[a+left, b-right]``."""
        a, b = self.window
        h = self.spacing
        lo = math.ceil((a + left) / h - 1e-9)
        hi = math.floor((b - right) / h + 1e-9)
        if hi < lo:
            return np.array([], dtype=int)
        return np.arange(lo, hi + 1) % self.n

    @property
    def window_length(self):
        return self.window[1] - self.window[0]

    def window_values(self):
        return self.values[self.window_indices()]

    # elementary algebra -------------------------------------------------
    def __add__(self, other):
        return self.like(self.values + _vals(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.like(self.values - _vals(other))

    def __rsub__(self, other):
        return self.like(_vals(other) - self.values)

    def __mul__(self, other):
        return self.like(self.values * _vals(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.like(-self.values)


def _vals(x):
    return x.values if isinstance(x, SampledFunction) else x


class MatrixFunction(SampledFunction):
    """Matrix-valued samples, ``values.shape == (N, m, m)``."""

    def __post_init__(self):
        super().__post_init__()
        if self.values.ndim != 3 or self.values.shape[1] != self.values.shape[2]:
            raise DomainError("matrix function needs values of shape (N, m, m)")

    @property
    def m(self):
        return self.values.shape[1]

    def entry(self, i, j):
        return SampledFunction(self.values[:, i, j], self.period, self.window)

    def __matmul__(self, other):
        return self.like(self.values @ _vals(other))

    def adjoint(self):
        return self.like(np.conj(np.swapaxes(self.values, 1, 2)))


def sample_periodic(func, period=DEFAULT_PERIOD, n=DEFAULT_N):
    """Sample a ``period``-periodic callable on the uniform grid."""
    t = np.arange(n) * (period / n)
    return SampledFunction(np.asarray(func(t)), period)


def sample_interval(func, length, n=DEFAULT_N):
    """Sample a callable on ``[0, length]`` and extend it by even reflection.

    The result has period ``2*length`` and window ``[0, length]``.
    """
    period = 2.0 * length
    t = np.arange(n) * (period / n)
    t = np.where(t <= length, t, period - t)
    return SampledFunction(np.asarray(func(t)), period, (0.0, length))


def reflect(values, length):
    """Extend samples on ``[0, length]`` (``N/2 + 1`` points) by even reflection."""
    values = np.asarray(values)
    half = values.shape[0] - 1
    full = np.concatenate([values, values[half - 1:0:-1]], axis=0)
    return SampledFunction(full, 2.0 * length, (0.0, length))


def transform(f):
    """Normalized discrete Fourier coefficients of ``f`` in FFT order.

    Use ``f.frequencies`` (or :func:`integer_frequencies`) for the index.
    """
    return f.spectrum


def inverse_transform(spectrum, period=DEFAULT_PERIOD, window=None, real=False):
    """Samples with the given spectrum; ``real`` drops the imaginary part."""
    spectrum = np.asarray(spectrum)
    v = np.fft.ifft(spectrum * spectrum.shape[0], axis=0)
    if real:
        v = v.real
    return SampledFunction(v, period, window)


def _symbol_values(f, symbol):
    if callable(symbol):
        return np.asarray(symbol(f.frequencies), dtype=complex)
    s = np.asarray(symbol, dtype=complex)
    if s.shape[0] != f.n:
        raise DomainError("symbol array does not match the grid")
    return s


def _conjugate_symmetric(f, symbol, vals):
    if callable(symbol):
        neg = np.asarray(symbol(-f.frequencies), dtype=complex)
    else:
        neg = vals[(-np.arange(f.n)) % f.n]
        neg = neg.copy()
        neg[f.n // 2] = np.conj(vals[f.n // 2])
    scale = np.max(np.abs(vals), initial=0.0)
    return np.all(np.abs(neg - np.conj(vals)) <= 1e-14 * max(scale, 1e-300))


def apply_multiplier(f, symbol):
    """Apply the Fourier multiplier ``symbol(D)`` to ``f``.

    Parameters
    ----------
    f : SampledFunction
    symbol : callable or ndarray
        Either a function of the angular frequency (vectorized) or the
        multiplier values in FFT order.  Values may carry trailing axes that
        broadcast against ``f.values``.

    Returns
    -------
    SampledFunction
        Real when ``f`` is real and the symbol is conjugate symmetric; the
        Nyquist coefficient is then multiplied by the real part of the symbol.
    """
    vals = _symbol_values(f, symbol)
    spec = f.spectrum
    extra = spec.ndim - 1
    v = vals.reshape(vals.shape + (1,) * max(0, extra - (vals.ndim - 1)))
    mag = np.abs(spec)
    occupied = mag > 1e-14 * np.max(mag, initial=0.0)
    bad = ~np.isfinite(v)
    if np.any(np.broadcast_to(bad, occupied.shape) & occupied):
        raise DomainError("multiplier is not finite at an occupied frequency")
    v = np.where(bad, 0.0, v)
    real_out = f.is_real and _conjugate_symmetric(f, symbol, vals)
    if real_out:
        v = v.copy()
        v[f.n // 2] = v[f.n // 2].real
    out = np.fft.ifft(spec * v * f.n, axis=0)
    if real_out:
        out = out.real
    return f.like(out)


def derivative(f, order=1):
    """Spectral time derivative of order ``order``."""
    return apply_multiplier(f, lambda xi: (1j * xi) ** order)


def shift(f, tau):
    """The translate ``t -> f(t + tau)``.

    Integer multiples of the grid spacing use an exact index roll; other
    shifts use the phase multiplier ``exp(i xi tau)``.
    """
    m = tau / f.spacing
    r = round(m)
    if abs(m - r) < 1e-9:
        return f.like(np.roll(f.values, -r, axis=0))
    return apply_multiplier(f, lambda xi: np.exp(1j * xi * tau))


def lp_norm(f, p, left=0.0, right=0.0):
    """Windowed ``L^p`` norm over ``[a+left, b-right]``.

    ``p = inf`` is the max over grid points; finite ``p`` uses the trapezoid
    rule.  Matrix values are measured with the spectral norm per sample.
    """
    idx = f.window_indices(left, right)
    if idx.size == 0:
        raise DomainError("empty window")
    v = f.values[idx]
    if v.ndim == 3:
        a = np.linalg.norm(v, ord=2, axis=(1, 2))
    else:
        a = np.abs(v)
    if math.isinf(p):
        return float(np.max(a))
    if idx.size == 1:
        return 0.0
    integral = trapezoid(a**p, dx=f.spacing)
    return float(integral ** (1.0 / p))


def parseval_defect(f):
    """Relative gap between the two sides of Parseval's identity."""
    lhs = np.sum(np.abs(f.values) ** 2) / f.n
    rhs = np.sum(np.abs(f.spectrum) ** 2)
    return abs(lhs - rhs) / max(lhs, 1e-300)


__all__ = [
    "SampledFunction",
    "MatrixFunction",
    "sample_periodic",
    "sample_interval",
    "reflect",
    "integer_frequencies",
    "transform",
    "inverse_transform",
    "apply_multiplier",
    "derivative",
    "shift",
    "lp_norm",
    "parseval_defect",
    "DEFAULT_N",
    "DEFAULT_PERIOD",
]
