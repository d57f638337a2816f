r"""Zygmund and log-Zygmund moduli, mollification, and rough test signals.

The second-difference seminorm is

.. math::

    |f|_{Z_p^\ell} = \sup_\tau
      \frac{\|f(\cdot+\tau)+f(\cdot-\tau)-2f\|_{L^p([\tau,T-\tau])}}
           {\tau\,\log^\ell(1+1/\tau)},

with the supremum taken over dyadic :math:`\tau = 2^{-k}`.  The dyadic sweep
gives a lower bound for the continuous supremum.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, ResolutionError
from .spectral import (
    DEFAULT_N,
    DEFAULT_PERIOD,
    SampledFunction,
    apply_multiplier,
    derivative,
    lp_norm,
    sample_interval,
    sample_periodic,
    shift,
)


@dataclass(frozen=True)
class RegularityClass:
    """Zygmund (``ell = 0``) or log-Zygmund (``ell = 1``) class with exponent ``p``."""

    kind: str = "zygmund"
    p: float = math.inf
    ell: int = None

    def __post_init__(self):
        expected = {"zygmund": 0, "log_zygmund": 1}
        if self.kind not in expected:
            raise DomainError(f"unknown regularity kind {self.kind!r}")
        if self.ell is None:
            object.__setattr__(self, "ell", expected[self.kind])
        if self.ell != expected[self.kind]:
            raise DomainError("ell inconsistent with kind")
        if not (self.p >= 1):
            raise DomainError("p must be >= 1")


def dyadic_taus(f, k_max=None):
    """Dyadic steps ``2^-k`` with ``tau < T/2`` and ``tau >= 2`` grid spacings."""
    length = f.window_length
    if k_max is None:
        k_max = math.floor(math.log2(1.0 / (2.0 * f.spacing)))
    taus = [2.0**-k for k in range(1, k_max + 1) if 2.0**-k < length / 2]
    if not taus:
        raise DomainError("window too short for any admissible tau")
    return np.array(taus)


@dataclass(frozen=True)
class ModulusProfile:
    """Ratios of a difference modulus along the dyadic sweep.

    ``growth`` is the least-squares slope of ``log2(ratio)`` against
    ``log2(1/tau)`` over the finer half of the sweep; a slope of about 1
    marks a jump-type singularity, and ``member`` is false above 1/2.
    """

    taus: np.ndarray
    ratios: np.ndarray
    value: float
    growth: float
    member: bool


def _growth(taus, ratios):
    half = max(3, len(taus) // 2)
    x = np.log2(1.0 / taus[-half:])
    y = np.log2(np.maximum(ratios[-half:], 1e-300))
    if len(x) < 2:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


def _profile(taus, ratios):
    ratios = np.asarray(ratios)
    g = _growth(taus, ratios)
    return ModulusProfile(taus, ratios, float(np.max(ratios)), g, g < 0.5)


def second_difference_profile(f, cls, k_max=None):
    taus = dyadic_taus(f, k_max)
    ratios = []
    for tau in taus:
        d2 = shift(f, tau) + shift(f, -tau) - 2.0 * f
        num = lp_norm(d2, cls.p, left=tau, right=tau)
        ratios.append(num / (tau * math.log(1.0 + 1.0 / tau) ** cls.ell))
    return _profile(taus, ratios)


def second_difference_seminorm(f, cls, k_max=None):
    """Dyadic second-difference (log-)Zygmund seminorm of a real ``f``."""
    return second_difference_profile(f, cls, k_max).value


def first_difference_profile(f, cls, k_max=None):
    taus = dyadic_taus(f, k_max)
    ratios = []
    for tau in taus:
        d1 = shift(f, tau) - f
        num = lp_norm(d1, cls.p, right=tau)
        ratios.append(num / (tau * math.log(1.0 + 1.0 / tau) ** (1 + cls.ell)))
    return _profile(taus, ratios)


def first_difference_modulus(f, cls, k_max=None):
    """Sup over dyadic ``tau`` of ``||f(.+tau) - f||_p / (tau log^{1+ell}(1+1/tau))``."""
    return first_difference_profile(f, cls, k_max).value


def lipschitz_quotients(f, p=math.inf, k_max=None):
    """Plain first-difference quotients ``||f(.+tau) - f||_p / tau`` on the sweep."""
    taus = dyadic_taus(f, k_max)
    q = np.array([lp_norm(shift(f, t) - f, p, right=t) / t for t in taus])
    return taus, q


def zygmund_norm(f, cls, k_max=None):
    """``||f||_{L^p} + |f|_Z``, the full norm compared against Besov norms."""
    return lp_norm(f, cls.p) + second_difference_seminorm(f, cls, k_max)


# ---------------------------------------------------------------------------
# mollifier


def _bump(s):
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) < 1.0, (15.0 / 16.0) * (1.0 - s * s) ** 2, 0.0)


def _bump_transform(w):
    w = np.abs(np.asarray(w, dtype=float))
    out = np.empty_like(w)
    small = w < 0.05
    ws = w[small] ** 2
    out[small] = 1.0 - ws / 14.0 + ws**2 / 504.0 - ws**3 / 33264.0
    x = w[~small]
    out[~small] = 15.0 * ((3.0 - x * x) * np.sin(x) - 3.0 * x * np.cos(x)) / x**5
    return out


@dataclass(frozen=True)
class MollifierKernel:
    """Even, nonnegative, unit-mass kernel supported in ``[-1, 1]``.

    ``profile`` is the continuous density; ``transform`` its Fourier
    transform (used only for checks).
    """

    profile: Callable = _bump
    transform: Callable = _bump_transform

    def sample(self, n=2**12):
        """The density sampled on ``[-1, 1]`` as a function of period 2."""
        t = np.arange(n) * (2.0 / n)
        t = np.where(t <= 1.0, t, t - 2.0)
        return SampledFunction(self.profile(t), 2.0, (0.0, 2.0))

    def weights(self, eps, spacing):
        """Discrete kernel on grid offsets ``-M..M``, normalized to unit mass."""
        if eps < 4 * spacing * (1 - 1e-12):
            raise ResolutionError(f"eps={eps:g} below 4 grid spacings ({4 * spacing:g})")
        m = math.floor(eps / spacing + 1e-9)
        offs = np.arange(-m, m + 1)
        w = self.profile(offs * spacing / eps)
        return offs, w / w.sum()


POLY_BUMP = MollifierKernel()


def mollifier_multiplier(eps, n, spacing, kernel=POLY_BUMP):
    """Multiplier (FFT order) of the discrete periodic convolution with ``rho_eps``."""
    offs, w = kernel.weights(eps, spacing)
    if 2 * offs[-1] >= n:
        raise ResolutionError("kernel support exceeds one period")
    arr = np.zeros(n)
    arr[offs % n] = w
    return np.fft.fft(arr).real


def mollify(f, eps, kernel=POLY_BUMP):
    """Periodic discrete convolution ``rho_eps * f`` on the grid of ``f``.

    Raises :class:`ResolutionError` when ``eps`` is below four grid spacings.
    """
    if not 0 < eps <= 1:
        raise DomainError("eps must lie in (0, 1]")
    return apply_multiplier(f, mollifier_multiplier(eps, f.n, f.spacing, kernel))


@dataclass(frozen=True)
class MollifierRates:
    """Normalized mollification errors along ``eps = 2^-k``.

    ``r0 = ||f_eps - f||_p / (eps L^ell)``, ``r1 = ||f_eps'||_p / L^{1+ell}``,
    ``r2 = eps ||f_eps''||_p / L^ell`` with ``L = log(1 + 1/eps)``.
    """

    ks: np.ndarray
    eps: np.ndarray
    r0: np.ndarray
    r1: np.ndarray
    r2: np.ndarray

    def rows(self):
        return (self.r0, self.r1, self.r2)


def mollifier_rates(f, cls, ks, kernel=POLY_BUMP):
    """The three rate sequences of :class:`MollifierRates` for a real ``f``."""
    ks = np.asarray(ks)
    eps = 2.0 ** -ks.astype(float)
    r0, r1, r2 = [], [], []
    for e in eps:
        fe = mollify(f, e, kernel)
        L = math.log(1.0 + 1.0 / e)
        r0.append(lp_norm(fe - f, cls.p) / (e * L**cls.ell))
        r1.append(lp_norm(derivative(fe), cls.p) / L ** (1 + cls.ell))
        r2.append(e * lp_norm(derivative(fe, 2), cls.p) / L**cls.ell)
    return MollifierRates(ks, eps, np.array(r0), np.array(r1), np.array(r2))


def blows_up(seq):
    """True when the finer half of ``seq`` exceeds twice the max of the coarser half."""
    seq = np.asarray(seq)
    half = len(seq) // 2
    return bool(np.max(seq[half:]) > 2.0 * np.max(seq[:half]))


# ---------------------------------------------------------------------------
# test signals

ROUGH_KINDS = ("weierstrass", "log_weierstrass", "lipschitz", "smooth", "constant", "step")


def _phases(depth, phases, seed):
    if phases == "zero":
        return np.zeros(depth + 1)
    if phases == "random":
        rng = np.random.default_rng(seed)
        return rng.uniform(0.0, 2 * np.pi, depth + 1)
    raise DomainError(f"phases must be 'zero' or 'random', got {phases!r}")


def rough_callable(kind, amplitude=1.0, depth=12, offset=0.0, base_frequency=1.0,
                   phases="zero", seed=0):
    """The generator as a callable of ``t`` plus its sup-norm bound around ``offset``."""
    a, w = amplitude, base_frequency
    if kind in ("weierstrass", "log_weierstrass"):
        psi = _phases(depth, phases, seed)
        j = np.arange(depth + 1)
        coef = 2.0**-j * ((1.0 + j) if kind == "log_weierstrass" else 1.0)
        freq = w * 2.0**j

        def func(t):
            t = np.asarray(t, dtype=float)
            out = np.full(t.shape, float(offset))
            for c, k, p in zip(coef, freq, psi):
                out += a * c * np.cos(k * t + p)
            return out

        return func, abs(a) * float(coef.sum())
    if kind == "lipschitz":
        return (lambda t: offset + a * np.abs(np.sin(w * np.asarray(t)))), abs(a)
    if kind == "smooth":
        return (lambda t: offset + a * np.sin(w * np.asarray(t))), abs(a)
    if kind == "constant":
        return (lambda t: np.full(np.shape(t), float(offset))), 0.0
    if kind == "step":
        return (lambda t: offset + a * np.sign(np.sin(w * np.asarray(t)))), abs(a)
    raise DomainError(f"unknown kind {kind!r}; expected one of {ROUGH_KINDS}")


def generate_rough(kind, amplitude=1.0, depth=12, offset=0.0, base_frequency=1.0,
                   phases="zero", seed=0, n=DEFAULT_N, period=DEFAULT_PERIOD,
                   length=None, positive=False):
    """Sample a test coefficient.

    Parameters
    ----------
    kind : str
        ``weierstrass``: ``c0 + A sum_{j<=K} 2^-j cos(w 2^j t + psi_j)``;
        ``log_weierstrass``: the same with an extra ``(1+j)`` weight;
        ``lipschitz``: ``c0 + A |sin(w t)|``; ``smooth``: ``c0 + A sin(w t)``;
        ``constant``: ``c0``; ``step``: ``c0 + A sign(sin(w t))``.
    amplitude, depth, offset, base_frequency
        ``A``, ``K``, ``c0`` and ``w`` above.
    phases : {'zero', 'random'}
        Random phases are drawn from ``numpy.random.default_rng(seed)``.
    n, period
        Periodic grid; ignored in favor of ``length`` when that is given.
    length : float, optional
        Sample on ``[0, length]`` and extend by even reflection.
    positive : bool
        Require ``c0`` to exceed the sup of the oscillating part.
    """
    func, bound = rough_callable(kind, amplitude, depth, offset, base_frequency, phases, seed)
    if positive and not offset > bound:
        raise DomainError(f"offset {offset} does not dominate the oscillation bound {bound:g}")
    if length is None:
        return sample_periodic(func, period, n)
    return sample_interval(func, length, n)


def write_corpus_csv(f, path):
    """Write ``t, f(t)`` over the window of ``f``."""
    idx = f.window_indices()
    t = f.window[0] + np.arange(idx.size) * f.spacing
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "f"])
        for ti, vi in zip(t, f.values[idx]):
            w.writerow([repr(float(ti)), repr(float(vi))])


__all__ = [
    "RegularityClass",
    "ModulusProfile",
    "dyadic_taus",
    "second_difference_profile",
    "second_difference_seminorm",
    "first_difference_profile",
    "first_difference_modulus",
    "lipschitz_quotients",
    "zygmund_norm",
    "MollifierKernel",
    "POLY_BUMP",
    "mollifier_multiplier",
    "mollify",
    "MollifierRates",
    "mollifier_rates",
    "blows_up",
    "ROUGH_KINDS",
    "rough_callable",
    "generate_rough",
    "write_corpus_csv",
]
