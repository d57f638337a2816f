r"""Dyadic (Littlewood-Paley) blocks, logarithmic Besov norms, and the
approximate primitive :math:`J_\mu`.

The low-pass cut-off :math:`\chi` equals 1 on :math:`|\xi|\le 1`, vanishes for
:math:`|\xi|\ge 2` and interpolates with the smooth step built from
:math:`e^{-1/x}`.  With :math:`\varphi(\xi)=\chi(\xi)-\chi(2\xi)`,

.. math::

    \Delta_0 = \chi(D),\qquad \Delta_j = \varphi(2^{-j}D)\ (j\ge 1),\qquad
    S_j = \chi(2^{-j}D) = \sum_{k\le j}\Delta_k .

Frequencies are angular, :math:`\xi = 2\pi k/T_{per}`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RangeError
from .spectral import apply_multiplier, lp_norm


def _smooth_step_part(x):
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def chi(xi):
    """Radial low-pass cut-off: 1 on ``|xi| <= 1``, 0 on ``|xi| >= 2``."""
    r = np.abs(np.asarray(xi, dtype=float))
    a = _smooth_step_part(2.0 - r)
    b = _smooth_step_part(r - 1.0)
    return a / (a + b)


def phi(xi):
    """Annulus cut-off ``chi(xi) - chi(2 xi)``, supported in ``1/2 <= |xi| <= 2``."""
    xi = np.asarray(xi, dtype=float)
    return chi(xi) - chi(2.0 * xi)


def primitive_cutoff(xi):
    """Cut-off ``theta``: 0 for ``|xi| <= 1/4``, 1 for ``|xi| >= 1/2``."""
    return 1.0 - chi(4.0 * np.asarray(xi, dtype=float))


@dataclass(frozen=True)
class DyadicFilterBank:
    """Cut-offs for a grid of ``n`` points over period ``period``.

    ``j_max`` is the smallest index with ``2**j_max`` above the Nyquist
    frequency, so the blocks ``0..j_max`` sum to the identity on the grid.
    """

    n: int
    period: float

    @classmethod
    def for_function(cls, f):
        return cls(f.n, f.period)

    @property
    def nyquist(self):
        return math.pi * self.n / self.period

    @property
    def j_max(self):
        return max(1, math.ceil(math.log2(self.nyquist) - 1e-12))

    def block_symbol(self, j):
        if j < 0 or j > self.j_max:
            raise RangeError(f"block index {j} outside 0..{self.j_max}")
        if j == 0:
            return chi
        scale = 2.0**-j
        return lambda xi: phi(scale * xi)

    def low_symbol(self, j):
        if j > self.j_max + 1:
            raise RangeError(f"cut-off index {j} above {self.j_max + 1}")
        if j < 0:
            return lambda xi: np.zeros_like(xi, dtype=float)
        scale = 2.0**-j
        return lambda xi: chi(scale * xi)

    def block_matrix(self, frequencies):
        """Rows are the block multipliers ``0..j_max`` at the given frequencies."""
        return np.stack([self.block_symbol(j)(frequencies) for j in range(self.j_max + 1)])

    def low_matrix(self, frequencies, shift=0):
        """Rows are the ``S_{j+shift}`` multipliers for ``j = 0..j_max``."""
        return np.stack([self.low_symbol(j + shift)(frequencies) for j in range(self.j_max + 1)])


def resolve_bank(f, bank):
    if bank is None:
        return DyadicFilterBank.for_function(f)
    if bank.n != f.n or not math.isclose(bank.period, f.period):
        raise DomainError("filter bank does not match the grid")
    return bank


def block(f, j, bank=None):
    """Dyadic block ``Delta_j f``."""
    bank = resolve_bank(f, bank)
    return apply_multiplier(f, bank.block_symbol(j))


def low_cut(f, j, bank=None):
    """Low-frequency cut-off ``S_j f = chi(2^-j D) f``; zero for ``j < 0``."""
    bank = resolve_bank(f, bank)
    return apply_multiplier(f, bank.low_symbol(j))


def _stack_apply(f, rows):
    """Apply each row multiplier to a scalar ``f``; returns shape ``(J, N)``."""
    spec = f.spectrum
    if spec.ndim != 1:
        raise DomainError("expected a scalar function")
    rows = np.asarray(rows, dtype=float)
    if f.is_real:
        rows = rows.copy()
        out = np.fft.ifft(rows * spec[None, :] * f.n, axis=1).real
    else:
        out = np.fft.ifft(rows * spec[None, :] * f.n, axis=1)
    return out


def all_blocks(f, bank=None):
    """All blocks ``Delta_0 f .. Delta_{j_max} f`` as an array ``(j_max+1, N)``."""
    bank = resolve_bank(f, bank)
    return _stack_apply(f, bank.block_matrix(f.frequencies))


def all_low_cuts(f, bank=None, shift=0):
    """``S_{j+shift} f`` for ``j = 0..j_max`` as an array ``(j_max+1, N)``."""
    bank = resolve_bank(f, bank)
    return _stack_apply(f, bank.low_matrix(f.frequencies, shift))


@dataclass(frozen=True)
class BesovSpec:
    """Indices ``(s, alpha, p, r)`` of the space ``B^{s + alpha log}_{p,r}``."""

    s: float
    alpha: float = 0.0
    p: float = math.inf
    r: float = math.inf

    def __post_init__(self):
        for name in ("p", "r"):
            v = getattr(self, name)
            if not (math.isinf(v) and v > 0) and not v >= 1:
                raise DomainError(f"{name} must be >= 1 or inf, got {v}")

    def weights(self, j_max):
        j = np.arange(j_max + 1, dtype=float)
        return 2.0 ** (j * self.s) * (1.0 + j) ** self.alpha


@dataclass(frozen=True)
class BesovNorm:
    """A Besov norm with its weighted block sequence.

    ``truncation`` is the weighted size of the top block, an indicator of
    how much the cut at ``j_max`` may hide.
    """

    value: float
    terms: np.ndarray
    truncation: float

    def __float__(self):
        return self.value


def _lp_rows(f, rows, p):
    return np.array([lp_norm(f.like(row), p) for row in rows])


def besov_decomposition(f, spec, bank=None):
    """Weighted block norms ``2^{js}(1+j)^alpha ||Delta_j f||_{L^p}`` and their ``l^r`` sum."""
    if not f.is_real:
        raise DomainError("Besov norms are computed for real functions")
    bank = resolve_bank(f, bank)
    rows = all_blocks(f, bank)
    terms = spec.weights(bank.j_max) * _lp_rows(f, rows, spec.p)
    if math.isinf(spec.r):
        value = float(np.max(terms))
    else:
        value = float(np.sum(terms**spec.r) ** (1.0 / spec.r))
    return BesovNorm(value, terms, float(terms[-1]))


def besov_norm(f, spec, bank=None):
    """Logarithmic Besov norm of ``f`` over its window."""
    return besov_decomposition(f, spec, bank).value


def sobolev_norm(f, s):
    """Direct ``H^s`` norm from the weighted spectrum, scaled to the window."""
    w = (1.0 + f.frequencies**2) ** s
    return float(math.sqrt(f.window_length * np.sum(w * np.abs(f.spectrum) ** 2)))


def primitive_symbol(mu):
    """Multiplier ``theta(2^-mu xi) / (i xi)`` of the approximate primitive."""
    scale = 2.0**-mu

    def symbol(xi):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        th = primitive_cutoff(scale * xi)
        nz = th != 0
        out[nz] = th[nz] / (1j * xi[nz])
        return out

    return symbol


def approximate_primitive(g, mu):
    """Approximate antiderivative ``J_mu g`` and its residual.

    Parameters
    ----------
    g : SampledFunction
    mu : int
        Cut level; frequencies with ``|xi| < 2**(mu-1)`` are only partly
        integrated and end up in the residual.

    Returns
    -------
    f : SampledFunction
        Spectrum ``theta(2^-mu xi)/(i xi)`` times that of ``g``.
    r : SampledFunction
        ``d/dt f - g = (theta_mu - 1) g``, spectrally supported in ``|xi| < 2**mu``.
        For real ``g`` the identity holds apart from the Nyquist mode, which
        has no real primitive on the grid and is dropped from ``f``.
    """
    if mu < 0:
        raise DomainError("mu must be nonnegative")
    f = apply_multiplier(g, primitive_symbol(mu))
    scale = 2.0**-mu
    r = apply_multiplier(g, lambda xi: primitive_cutoff(scale * xi) - 1.0)
    return f, r


def anchored_primitive(g, mu):
    """``J_mu g`` shifted to vanish at ``t = 0``, with the same residual."""
    f, r = approximate_primitive(g, mu)
    return f.like(f.values - f.values[0]), r


def primitive_gain(g, mu, s, p=math.inf, bank=None):
    """Measured ``||J_mu g||_{B^s_{p,inf}} / ||g||_{B^0_{p,inf}}``."""
    f, _ = approximate_primitive(g, mu)
    num = besov_norm(f, BesovSpec(s, 0.0, p), bank)
    den = besov_norm(g, BesovSpec(0.0, 0.0, p), bank)
    return num / den


__all__ = [
    "chi",
    "phi",
    "primitive_cutoff",
    "DyadicFilterBank",
    "block",
    "low_cut",
    "all_blocks",
    "all_low_cuts",
    "BesovSpec",
    "BesovNorm",
    "besov_decomposition",
    "besov_norm",
    "sobolev_norm",
    "primitive_symbol",
    "approximate_primitive",
    "anchored_primitive",
    "primitive_gain",
]
