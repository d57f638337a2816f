r"""Fourier-mode integration, approximate energy and the loss-of-derivatives fit.

For a frozen frequency the mode obeys

.. math:: \partial_t\hat u = -iA(t,\xi)\hat u + \hat f,

which is linear, so every RK4 step is an affine map
:math:`\hat u \mapsto M_n\hat u + c_n`.  The maps are built for all steps at
once and then applied in sequence.  Between grid samples the coefficient is
a cubic spline of its samples (or held constant, for comparison with
products of matrix exponentials).

The energy is :math:`E = S\hat u\cdot\hat u` with the symmetrizer at
:math:`\varepsilon = 1/|\xi|`.  Along a trajectory,

.. math::

    \partial_tE \le C\big(|\hat f|E^{1/2}
      + (1 + |A - A_\varepsilon| + |\xi|^{-1}|\partial_tS^1|)E\big),

and :math:`e = E^{1/2}` then obeys
:math:`e(t)\le e^{\Phi(t)}e(0) + \tfrac C2\int_0^t e^{\Phi(t)-\Phi(s)}|\hat f(s)|\,ds`
with :math:`\Phi(t) = \tfrac C2\int_0^t (1 + |A-A_\varepsilon|
+ |\xi|^{-1}|\partial_tS^1|)`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .errors import BelowR0Error, DomainError, FitError, ResolutionError
from .hyperbolic import assemble_symbol
from .spectral import derivative
from .symmetrizer import build_symmetrizer

C_CFL = 0.125


@dataclass(frozen=True)
class ModeState:
    """Trajectory ``u_hat`` of shape ``(n_t, m)`` on times ``t``."""

    t: np.ndarray
    u_hat: np.ndarray
    xi: float
    forcing: np.ndarray = None
    substeps: int = 1

    def __post_init__(self):
        if self.u_hat.shape[0] != self.t.shape[0]:
            raise DomainError("trajectory length does not match the time grid")
        if not np.all(np.isfinite(self.u_hat)):
            raise DomainError("trajectory has non-finite entries")

    @property
    def norm(self):
        return np.linalg.norm(self.u_hat, axis=1)


def _interpolator(t, A, kind):
    if kind == "spline":
        return CubicSpline(t, A, axis=0)
    if kind == "previous":
        def f(s):
            i = np.clip(np.searchsorted(t, s, side="right") - 1, 0, len(t) - 2)
            return A[i]
        return f
    raise DomainError(f"unknown interpolation {kind!r}")


def _step_maps(M0, Mh, M1, h, f0=None, fh=None, f1=None):
    """Affine RK4 maps for ``y' = M y + f`` over a batch of steps."""
    m = M0.shape[-1]
    eye = np.eye(m)
    K1 = M0
    K2 = Mh @ (eye + 0.5 * h * K1)
    K3 = Mh @ (eye + 0.5 * h * K2)
    K4 = M1 @ (eye + h * K3)
    Phi = eye + (h / 6.0) * (K1 + 2 * K2 + 2 * K3 + K4)
    if f0 is None:
        return Phi, None
    mv = lambda M, v: np.einsum("sij,sj->si", M, v)
    c1 = f0
    c2 = mv(Mh, 0.5 * h * c1) + fh
    c3 = mv(Mh, 0.5 * h * c2) + fh
    c4 = mv(M1, h * c3) + f1
    return Phi, (h / 6.0) * (c1 + 2 * c2 + 2 * c3 + c4)


def step_size(lam_max, T, tol=None, c_cfl=C_CFL):
    """Largest admissible step ``c/(1+|lambda|)``, reduced further when ``tol`` is set."""
    if not 0 < c_cfl <= C_CFL:
        raise DomainError(f"c_cfl must lie in (0, {C_CFL}]")
    h = c_cfl / (1.0 + lam_max)
    if tol is not None and lam_max > 0:
        theta = (120.0 * tol / (lam_max * T)) ** 0.25
        h = min(h, theta / lam_max)
    return h


def integrate_mode(symbol, u0, T=None, forcing=None, tol=None, c_cfl=C_CFL,
                   interpolation="spline", max_substeps=64, xi=None):
    """Fourth-order integration of one Fourier mode over ``[t0, t0 + T]``.

    Parameters
    ----------
    symbol : MatrixFunction
        ``A(t, xi)`` on the grid; samples inside the window are used.
    u0 : array_like
        Initial vector.
    T : float, optional
        Length of the run; defaults to the window length.
    forcing : callable, optional
        ``f(t)`` returning shape ``(len(t), m)``.
    tol : float, optional
        Target accuracy; shrinks the step below the CFL value.
    interpolation : {'spline', 'previous'}
        Coefficient between samples.
    xi : float, optional
        Frequency recorded on the returned state.

    Returns
    -------
    ModeState
        Values at the grid samples of ``[t0, t0 + T]``.
    """
    u0 = np.asarray(u0, dtype=complex)
    idx = symbol.window_indices()
    hs = symbol.spacing
    if T is None:
        T = symbol.window_length
    n_out = int(round(T / hs))
    if n_out < 1 or n_out > idx.size - 1:
        raise DomainError("T must cover at least one sample and stay inside the window")
    t = symbol.window[0] + np.arange(n_out + 1) * hs
    Av = np.asarray(symbol.values[idx[: n_out + 1]], dtype=float)
    lam_max = float(np.max(np.abs(np.linalg.eigvals(Av))))
    h = step_size(lam_max, T, tol, c_cfl)
    n_sub = math.ceil(hs / h * (1 - 1e-12))
    if n_sub > max_substeps:
        raise ResolutionError(f"{n_sub} substeps per sample needed, limit {max_substeps}")
    h = hs / n_sub
    S = n_out * n_sub
    if interpolation == "previous":
        cell = -1j * np.repeat(Av[:-1], n_sub, axis=0)
        M0 = Mh = M1 = cell
    else:
        interp = _interpolator(t, Av, interpolation)
        th = t[0] + np.arange(2 * S + 1) * (0.5 * h)
        M = -1j * interp(th)
        M0, Mh, M1 = M[0:-1:2], M[1::2], M[2::2]
    if forcing is not None:
        th = t[0] + np.arange(2 * S + 1) * (0.5 * h)
        F = np.asarray(forcing(th), dtype=complex).reshape(th.size, -1)
        Phi, c = _step_maps(M0, Mh, M1, h, F[0:-1:2], F[1::2], F[2::2])
    else:
        Phi, c = _step_maps(M0, Mh, M1, h)
    m = u0.size
    Phi = Phi.reshape(n_out, n_sub, m, m)
    Pn = Phi[:, 0]
    cn = None if c is None else c.reshape(n_out, n_sub, m)[:, 0]
    for j in range(1, n_sub):
        Pn = Phi[:, j] @ Pn
        if cn is not None:
            cn = np.einsum("sij,sj->si", Phi[:, j], cn) + c.reshape(n_out, n_sub, m)[:, j]
    out = np.empty((n_out + 1, m), dtype=complex)
    out[0] = u0
    y = u0
    if cn is None:
        for n in range(n_out):
            y = Pn[n] @ y
            out[n + 1] = y
    else:
        for n in range(n_out):
            y = Pn[n] @ y + cn[n]
            out[n + 1] = y
    fvals = None if forcing is None else np.asarray(forcing(t), dtype=complex).reshape(t.size, -1)
    return ModeState(t, out, float("nan") if xi is None else float(xi), fvals, n_sub)


@dataclass(frozen=True)
class EnergyTrace:
    """``E = S u.u``, ``e = sqrt(E)`` and the observed range of ``E/|u|^2``."""

    t: np.ndarray
    E: np.ndarray
    e: np.ndarray
    equivalence_band: tuple


def _trajectory_indices(symm, state):
    idx = symm.S0.window_indices()
    n = state.t.size
    if n > idx.size:
        raise DomainError("trajectory longer than the symmetrizer window")
    return idx[:n]


def energy_trace(symm, state):
    """Evaluate the approximate energy along a trajectory."""
    if symm.K1 <= 0:
        raise BelowR0Error("symmetrizer is not positive at this frequency")
    S = symm.S.values[_trajectory_indices(symm, state)]
    u = state.u_hat
    E = np.real(np.einsum("ti,tij,tj->t", np.conj(u), S, u))
    n2 = np.sum(np.abs(u) ** 2, axis=1)
    nz = n2 > 0
    band = (float(np.min(E[nz] / n2[nz])), float(np.max(E[nz] / n2[nz]))) if np.any(nz) else (0.0, 0.0)
    return EnergyTrace(state.t, E, np.sqrt(np.maximum(E, 0.0)), band)


@dataclass(frozen=True)
class GronwallReport:
    """Pointwise ratio ``dE/dt / (|f| E^{1/2} + w E)`` and the weight ``w``.

    ``C`` is the largest ratio along the trajectory.
    """

    C: float
    ratio: np.ndarray
    weight: np.ndarray
    dE: np.ndarray


def gronwall_ratio(symm, state, symbol):
    """Measure the constant in the differential energy inequality.

    ``dE/dt`` is evaluated from the trajectory as
    ``dS/dt u.u + 2 Re(S (-i A u + f).u)`` with the unmollified ``A``.
    """
    idx = _trajectory_indices(symm, state)
    S = symm.S
    dS = derivative(S).values[idx]
    Sv = S.values[idx]
    A = symbol.values[idx]
    u = state.u_hat
    f = np.zeros_like(u) if state.forcing is None else state.forcing
    udot = -1j * np.einsum("tij,tj->ti", A, u) + f
    q = lambda M, v, w: np.einsum("ti,tij,tj->t", np.conj(w), M, v)
    dE = np.real(q(dS, u, u)) + 2.0 * np.real(q(Sv, udot, u))
    E = np.real(q(Sv, u, u))
    diff = np.linalg.norm(A - symm.A_eps.values[idx], ord=2, axis=(1, 2))
    dS1 = np.linalg.norm(derivative(symm.S1).values[idx], ord=2, axis=(1, 2))
    w = 1.0 + diff + dS1 / symm.xi
    den = w * E + np.linalg.norm(f, axis=1) * np.sqrt(np.maximum(E, 0.0))
    ratio = np.where(den > 0, dE / np.where(den > 0, den, 1.0), 0.0)
    return GronwallReport(float(np.max(ratio)), ratio, w, dE)


def integrated_bound(trace, report, C, forcing=None):
    """Ratio ``e(t) / bound(t)`` for the integrated form of the inequality."""
    t = trace.t
    Phi = 0.5 * C * cumulative_trapezoid(report.weight, t, initial=0.0)
    fn = np.zeros_like(t) if forcing is None else np.linalg.norm(forcing, axis=1)
    inner = cumulative_trapezoid(np.exp(-Phi) * fn, t, initial=0.0)
    bound = np.exp(Phi) * (trace.e[0] + 0.5 * C * inner)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(bound > 0, trace.e / bound, 0.0)
    return r, Phi


@dataclass(frozen=True)
class LossFit:
    """Per-time slopes ``beta(t_i)`` and the fit ``beta(t) = beta_tilde t^gamma``."""

    times: np.ndarray
    betas: np.ndarray
    beta_tilde: float
    gamma: float
    residual: float
    ks: tuple
    Phi_measured: tuple = ()


def loss_gamma(p):
    return 1.0 if math.isinf(p) else 1.0 - 1.0 / p


def fit_loss(states, p=math.inf, n_times=5, Phi_measured=()):
    """Fit the growth of ``|u_hat(t, 2^k)|`` in ``k``.

    Parameters
    ----------
    states : mapping
        ``k -> ModeState`` with ``|u_hat(0)| = 1`` and no forcing.
    p : float
        Integrability exponent; ``gamma = 1 - 1/p``.
    """
    ks = tuple(sorted(states))
    usable = [k for k in ks if np.all(np.isfinite(states[k].u_hat))]
    if len(usable) < 3:
        raise FitError("fewer than 3 usable frequencies")
    for k in usable:
        if abs(states[k].norm[0] - 1.0) > 1e-12:
            raise DomainError("initial data must have unit norm")
    t = states[usable[0]].t
    T = t[-1] - t[0]
    times = t[0] + T * np.arange(1, n_times + 1) / n_times
    betas = []
    for tt in times:
        i = int(np.argmin(np.abs(t - tt)))
        y = np.log2([states[k].norm[i] for k in usable])
        betas.append(np.polyfit(np.array(usable, dtype=float), y, 1)[0])
    betas = np.array(betas)
    gamma = loss_gamma(p)
    s = (times - t[0]) ** gamma
    bt = float(np.sum(betas * s) / np.sum(s * s))
    resid = float(np.sqrt(np.mean((betas - bt * s) ** 2)))
    return LossFit(times, betas, bt, gamma, resid, tuple(usable), tuple(Phi_measured))


def forward_vector(symbol):
    """Unit eigenvector of the largest eigenvalue of ``A(t0, xi)``, sign fixed."""
    A0 = symbol.values[symbol.window_indices()[0]]
    w, v = np.linalg.eig(A0)
    u = np.real_if_close(v[:, int(np.argmax(w.real))])
    u = u / np.linalg.norm(u)
    lead = np.nonzero(np.abs(u) > 1e-12)[0][0]
    return (u * np.sign(u[lead].real or 1.0)).astype(complex)


@dataclass(frozen=True)
class Rung:
    k: int
    xi: float
    symm: object
    state: ModeState
    trace: EnergyTrace
    gronwall: GronwallReport


def run_ladder(coeffs, ks, T=None, u0="forward", p=math.inf, tol=None, mu=None,
               direction=None):
    """Integrate the modes ``xi = 2^k`` and fit the loss exponent.

    ``direction`` is the unit vector of ``xi`` (first axis by default).

    Returns
    -------
    rungs : list of Rung
    fit : LossFit
    """
    direction = np.eye(coeffs.n)[0] if direction is None else np.asarray(direction, float)
    rungs = []
    for k in ks:
        xi = 2.0**k
        symbol = assemble_symbol(coeffs, xi * direction)
        symm = build_symmetrizer(symbol, xi, mu=mu)
        v0 = forward_vector(symbol) if isinstance(u0, str) else np.asarray(u0, complex)
        v0 = v0 / np.linalg.norm(v0)
        state = integrate_mode(symbol, v0, T, tol=tol, xi=xi)
        trace = energy_trace(symm, state)
        rungs.append(Rung(k, xi, symm, state, trace, gronwall_ratio(symm, state, symbol)))
    C = max(r.gronwall.C for r in rungs)
    phis = tuple(float(integrated_bound(r.trace, r.gronwall, C)[1][-1]) for r in rungs)
    fit = fit_loss({r.k: r.state for r in rungs}, p, Phi_measured=phis)
    return rungs, fit


__all__ = [
    "ModeState",
    "step_size",
    "integrate_mode",
    "EnergyTrace",
    "energy_trace",
    "GronwallReport",
    "gronwall_ratio",
    "integrated_bound",
    "LossFit",
    "loss_gamma",
    "fit_loss",
    "forward_vector",
    "Rung",
    "run_ladder",
]
