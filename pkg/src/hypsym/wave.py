r"""Wave equation :math:`\partial_t^2u - \alpha(t)\partial_x^2u = 0` as a 2x2 system.

With :math:`U = (-\partial_x u, \partial_t u)` the system is
:math:`\partial_t U + A(t)\partial_x U = 0`, :math:`A = ((0, 1), (\alpha, 0))`,
and everything is explicit in :math:`a = \sqrt\alpha`:

* eigenvalues :math:`\pm a|\xi|`, right eigenvectors
  :math:`(1, \pm a)/\sqrt{1+a^2}`, left eigenvectors
  :math:`\tfrac{\sqrt{1+a^2}}{2}(1, \pm 1/a)`;
* :math:`\theta_{11} = \theta_{22} = \tfrac12\partial_t\log((1+a^2)/a)`,
  :math:`\theta_{12} = \theta_{21} = \partial_t a/(2a)`;
* :math:`\Sigma^0 = a/(1+a^2)\,\mathrm{Id}`, :math:`S^0 = \tfrac12\mathrm{diag}(a, 1/a)`;
* :math:`\tilde\sigma_{12} = +i\,\partial_t a/(2a(1+a^2))` and
  :math:`S^1 = \tfrac{i\partial_t a}{4a^2}((0,-1),(1,0))`, which make
  :math:`G` vanish identically.

In terms of the scalar mode :math:`\hat u`, the energy :math:`S\hat U\cdot\hat U` reads
:math:`\tfrac12(a\xi^2|\hat u|^2 + |\partial_t\hat u|^2/a)
+ \tfrac{\partial_t a}{2a^2}\mathrm{Re}(\partial_t\hat u\,\bar{\hat u})`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hyperbolic import CoefficientMatrices, EigenStructure, assemble_symbol
from .spectral import MatrixFunction, SampledFunction, derivative
from .symmetrizer import (
    ThetaMatrix,
    assemble_and_validate,
    build_symmetrizer,
)
from .zygmund import RegularityClass


@dataclass(frozen=True)
class WaveCoefficient:
    """Squared speed ``alpha`` and its root ``a``, with bounds."""

    alpha: SampledFunction
    a: SampledFunction
    alpha_min: float
    alpha_max: float

    @classmethod
    def from_alpha(cls, alpha):
        v = np.asarray(alpha.values)
        if np.iscomplexobj(v) or not np.all(v > 0):
            raise DomainError("alpha must be real and positive")
        idx = alpha.window_indices()
        return cls(alpha, alpha.like(np.sqrt(v)), float(v[idx].min()), float(v[idx].max()))

    @classmethod
    def from_a(cls, a):
        v = np.asarray(a.values)
        if np.iscomplexobj(v) or not np.all(v > 0):
            raise DomainError("a must be real and positive")
        return cls.from_alpha(a.like(v * v))


def _as_coefficient(x):
    return x if isinstance(x, WaveCoefficient) else WaveCoefficient.from_alpha(x)


def wave_system(alpha, regularity=RegularityClass()):
    """Coefficients ``A(t) = ((0, 1), (alpha, 0))`` of the first-order wave system."""
    c = _as_coefficient(alpha)
    N = c.alpha.n
    A = np.zeros((N, 2, 2))
    A[:, 0, 1] = 1.0
    A[:, 1, 0] = c.alpha.values
    return CoefficientMatrices((MatrixFunction(A, c.alpha.period, c.alpha.window),), regularity)


def _mat(a, rows):
    return MatrixFunction(np.stack([np.stack(r, axis=-1) for r in rows], axis=-2), a.period, a.window)


def closed_form_eigenstructure(a, xi):
    """Explicit eigenstructure of the wave symbol at ``|xi|``."""
    v = a.values
    s = np.sqrt(1.0 + v * v)
    P = _mat(a, [[1 / s, 1 / s], [v / s, -v / s]])
    Q = _mat(a, [[s / 2, s / (2 * v)], [s / 2, -s / (2 * v)]])
    lam = SampledFunction(np.stack([v * abs(xi), -v * abs(xi)], axis=-1), a.period, a.window)
    return EigenStructure(lam, P, Q, ((0, 1), (1, 1)), abs(float(xi)))


def closed_form_theta(a):
    """``Theta = dQ/dt P`` from the closed forms."""
    v = a.values
    da = derivative(a).values
    d = 0.5 * (2 * v * da / (1 + v * v) - da / v)
    o = da / (2 * v)
    return ThetaMatrix(_mat(a, [[d, o], [o, d]]))


def closed_form_sigma(a, sign=1.0):
    """``(Sigma0, Sigma1)`` in closed form.

    ``sign = -1`` flips ``sigma_12``, reproducing the opposite sign
    convention; only ``sign = 1`` makes ``G`` vanish.
    """
    v = a.values
    da = derivative(a).values
    z = np.zeros_like(v)
    sig = v / (1 + v * v)
    s12 = sign * 1j * da / (2 * v * (1 + v * v))
    return _mat(a, [[sig, z], [z, sig]]), _mat(a, [[z, s12], [np.conj(s12), z]])


def closed_form_symmetrizer(a, xi, eps=0.0):
    """Assemble the explicit symmetrizer for a smooth (or pre-mollified) ``a``."""
    es = closed_form_eigenstructure(a, xi)
    S0, S1 = closed_form_sigma(a)
    A = es.reconstruct()
    return assemble_and_validate(S0, S1, closed_form_theta(a), es, A, xi, eps, None)


def closed_form_energy(a, xi, u, du):
    """Energy of the scalar mode ``u`` with time derivative ``du`` (arrays over t)."""
    v = a.values
    da = derivative(a).values
    return (0.5 * (v * xi**2 * np.abs(u) ** 2 + np.abs(du) ** 2 / v)
            + da / (2 * v * v) * np.real(du * np.conj(u)))


def tarama_energy(a, xi, u, du):
    """The variant with the cross term inside the factor 1/2."""
    v = a.values
    da = derivative(a).values
    return 0.5 * (v * xi**2 * np.abs(u) ** 2 + np.abs(du) ** 2 / v
                  + da / (2 * v * v) * np.real(du * np.conj(u)))


def system_vector(xi, u, du):
    """``U_hat = (-i xi u, du)`` for the scalar mode."""
    return np.stack([-1j * xi * np.asarray(u), np.asarray(du)], axis=-1)


@dataclass(frozen=True)
class WaveCrossCheck:
    """Generic construction against closed forms.

    Attributes
    ----------
    theta : float
        ``max_t |theta_generic - theta_closed|`` over all entries.
    sigma12 : float
        ``max_t |sigma12_generic/sigma_generic - sigma12_closed/sigma_closed|``,
        which removes the normalization of ``Sigma0``.
    sigma12_opposite : float
        The same against the opposite sign convention.
    S0 : float
        ``max_t |S0_generic - c S0_closed|`` with ``c`` matched at ``t = 0``.
    theta_budget, sigma12_budget, S0_budget : float
        A posteriori bounds: the first two from the mismatch between
        mollifying ``P`` and evaluating ``P`` at ``a_eps``, the last from the
        low-frequency remainder ``rho``.
    """

    theta: float
    sigma12: float
    sigma12_opposite: float
    S0: float
    theta_budget: float
    sigma12_budget: float
    S0_budget: float
    normalization: float
    xi: float


def cross_check(a, xi, eps=None, mu=None):
    """Compare :func:`build_symmetrizer` on the wave system with the closed forms.

    The closed forms are evaluated at the mollified speed ``a_eps`` (read
    off the mollified eigenvalue), which is the coefficient the generic
    construction actually symmetrizes.
    """
    c = WaveCoefficient.from_a(a)
    xi = abs(float(xi))
    symbol = assemble_symbol(wave_system(c), xi)
    symm = build_symmetrizer(symbol, xi, eps=eps, mu=mu)
    es = symm.structure
    a_eps = a.like(es.lambdas.values[:, 0] / xi)
    idx = a.window_indices()
    th_c = closed_form_theta(a_eps).theta.values
    th_g = symm.theta.theta.values
    d_theta = float(np.max(np.abs(th_g - th_c)[idx]))

    ces = closed_form_eigenstructure(a_eps, xi)
    dP = es.P.values - ces.P.values
    dQ = derivative(es.Q.like(es.Q.values - ces.Q.values)).values
    dQc = derivative(ces.Q).values
    theta_budget = float(np.max((np.abs(dQ @ es.P.values) + np.abs(dQc @ dP))[idx]))

    S0c, S1c = closed_form_sigma(a_eps)
    sig_g = symm.Sigma0.values[:, 0, 0]
    k_g = symm.Sigma1.values[:, 0, 1] / sig_g
    k_c = S1c.values[:, 0, 1] / S0c.values[:, 0, 0]
    d_s12 = float(np.max(np.abs(k_g - k_c)[idx]))
    d_opp = float(np.max(np.abs(k_g + k_c)[idx]))
    dA_g = derivative(symm.A_eps).values
    dA_c = derivative(ces.reconstruct()).values
    dD = es.Q.values @ dA_g @ es.P.values - ces.Q.values @ dA_c @ ces.P.values
    gap = es.lambdas.values[:, 0] - es.lambdas.values[:, 1]
    s12_budget = float(np.max((xi * (np.abs(dD[:, 0, 1]) + np.abs(dD[:, 1, 0])) / gap**2)[idx]))

    norm = float(sig_g[0] / S0c.values[0, 0, 0])
    S0_closed = 0.5 * np.stack([a_eps.values, 1 / a_eps.values], axis=-1)
    S0_gen = np.diagonal(symm.S0.values, axis1=1, axis2=2)
    d_S0 = float(np.max(np.abs(S0_gen - norm * S0_closed)[idx]))
    off = float(np.max(np.abs(symm.S0.values[:, 0, 1])[idx]))
    rho_int = float(np.sum(np.max(np.abs(symm.rho.values[idx]), axis=1)) * a.spacing)
    S0_budget = float(np.max(norm * S0_closed[idx])) * math.expm1(rho_int)
    return WaveCrossCheck(d_theta, d_s12, d_opp, max(d_S0, off), theta_budget,
                          s12_budget, S0_budget, norm, xi)


__all__ = [
    "WaveCoefficient",
    "wave_system",
    "closed_form_eigenstructure",
    "closed_form_theta",
    "closed_form_sigma",
    "closed_form_symmetrizer",
    "closed_form_energy",
    "tarama_energy",
    "system_vector",
    "WaveCrossCheck",
    "cross_check",
]
