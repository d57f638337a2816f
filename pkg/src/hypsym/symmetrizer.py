r"""Two-level symmetrizer :math:`S = S^0 + |\xi|^{-1}S^1` at a frozen frequency.

Writing :math:`S^i = Q^*\Sigma^i Q` in the mollified eigenbasis and
:math:`\Theta = \partial_t Q\,P`, the matrices :math:`\Sigma^0` (real,
block diagonal) and :math:`\Sigma^1` (imaginary Hermitian, zero diagonal
blocks) are chosen so that

.. math::

    G = \partial_t\Sigma^0 + \Sigma^0\Theta + \Theta^*\Sigma^0
        + i|\xi|^{-1}[\Lambda, \Sigma^1]

only keeps low-frequency pieces.  Then
:math:`\partial_t S^0 + 2\,\mathrm{Re}(-i|\xi|^{-1}S^1A_\varepsilon) = Q^*GQ`.

On each diagonal block, :math:`\Sigma^0` solves
:math:`\partial_t X = -(X\Theta_h + \Theta_h^T X)`, :math:`X(0) = I`, through
the approximate primitive :math:`J_\mu`; in the strictly hyperbolic case this
is :math:`\sigma_j = e^{\omega_j}` with :math:`\omega_j' \approx -2\theta_{jj}`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BelowR0Error, ConvergenceError, MultiplicityError
from .hyperbolic import assemble_symbol, eigendecompose, mollify_eigenstructure
from .littlewood_paley import BesovSpec, DyadicFilterBank, anchored_primitive, besov_norm
from .spectral import MatrixFunction, SampledFunction, derivative
from .zygmund import POLY_BUMP

MU_START = 5


def _win(f):
    return f.window_indices()


@dataclass(frozen=True)
class ThetaMatrix:
    """``Theta = dQ/dt P`` and its agreement with the left/right eigenvector formula.

    ``formula_defect`` is the largest deviation of an off-block entry from
    ``l_j dA/dt r_k / (lambda_j - lambda_k)``, relative to the largest such
    entry (0 when there are none).
    """

    theta: MatrixFunction
    formula_defect: float = 0.0


def compute_theta(es_eps, A_eps=None):
    """Spectral ``dQ/dt`` times ``P`` for a mollified eigenstructure."""
    dQ = derivative(es_eps.Q)
    theta = es_eps.P.like(dQ.values @ es_eps.P.values)
    if A_eps is None:
        return ThetaMatrix(theta)
    D = _lr_derivative(es_eps, A_eps)
    lam = es_eps.lambdas.values
    lab = es_eps.block_of()
    off = lab[:, None] != lab[None, :]
    if not np.any(off):
        return ThetaMatrix(theta, 0.0)
    idx = _win(theta)
    diff = lam[:, :, None] - lam[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        formula = np.where(off, D / np.where(off, diff, 1.0), 0.0)
    scale = np.max(np.abs(formula[idx][:, off]))
    defect = np.max(np.abs(theta.values[idx][:, off] - formula[idx][:, off]))
    return ThetaMatrix(theta, float(defect / max(scale, 1e-300)))


def _lr_derivative(es_eps, A_eps):
    """Matrix with entries ``l_j dA_eps/dt r_k``."""
    dA = derivative(A_eps)
    return es_eps.Q.values @ dA.values @ es_eps.P.values


def contraction_spec(p):
    """Besov index used to measure Picard contraction, ``s = (1 + 1/p)/2``."""
    return BesovSpec((1.0 + (0.0 if math.isinf(p) else 1.0 / p)) / 2.0, 0.0, p, math.inf)


def sigma0_strict(theta, mu):
    """Diagonal ``Sigma0 = diag(exp(omega_j))`` with ``omega_j(0) = 0``.

    Returns
    -------
    Sigma0 : MatrixFunction
    omega : SampledFunction
        Values ``(N, m)``.
    rho : SampledFunction
        ``d omega/dt + 2 theta_jj``, supported below ``2**mu`` in frequency.
    """
    th = theta.theta
    diag = np.diagonal(th.values, axis1=1, axis2=2).copy()
    g = SampledFunction(-2.0 * diag, th.period, th.window)
    omega, _ = anchored_primitive(g, mu)
    rho = derivative(omega) - g
    m = diag.shape[1]
    S = np.zeros(th.values.shape)
    S[:, np.arange(m), np.arange(m)] = np.exp(omega.values)
    return th.like(S), omega, rho


@dataclass(frozen=True)
class PicardReport:
    """Convergence record of one diagonal block."""

    block: tuple
    iterations: int
    differences: tuple
    converged: bool

    @property
    def contraction(self):
        d = np.asarray(self.differences)
        if d.size < 3:
            return 0.0
        return float(np.max(d[2:] / np.maximum(d[1:-1], 1e-300)))


def _block_rhs(X, th):
    return -(X @ th + np.swapaxes(th, 1, 2) @ X)


def _surrogate_norm(values, period, window, spec, bank):
    size = values.shape[1]
    return max(
        besov_norm(SampledFunction(values[:, i, j], period, window), spec, bank)
        for i in range(size) for j in range(size)
    )


def sigma0_blocks(theta, blocks, mu, p=math.inf, tol=1e-10, max_iter=200):
    """Block-diagonal ``Sigma0`` by Picard iteration inside each cluster.

    Strict (size 1) blocks use the exponential form.  Returns
    ``(Sigma0, rho, reports)`` where ``rho`` collects the block residuals
    ``dX/dt + X Theta_h + Theta_h^T X``.
    """
    th = theta.theta
    N, m, _ = th.values.shape
    spec = contraction_spec(p)
    bank = DyadicFilterBank(N, th.period)
    S = np.zeros((N, m, m))
    R = np.zeros((N, m, m))
    reports = []
    strict = [s for s, size in blocks if size == 1]
    if strict:
        S0, omega, rho = sigma0_strict(theta, mu)
        for s in strict:
            S[:, s, s] = S0.values[:, s, s]
            R[:, s, s] = rho.values[:, s] * S0.values[:, s, s]
    for s, size in blocks:
        if size == 1:
            continue
        sl = slice(s, s + size)
        tb = th.values[:, sl, sl]
        eye = np.broadcast_to(np.eye(size), (N, size, size))
        X = eye.copy()
        diffs = []
        converged = False
        for it in range(1, max_iter + 1):
            rhs = SampledFunction(_block_rhs(X, tb), th.period, th.window)
            Xn = anchored_primitive(rhs, mu)[0].values + eye
            d = _surrogate_norm(Xn - X, th.period, th.window, spec, bank)
            diffs.append(d)
            X = Xn
            if d < tol:
                converged = True
                break
            if it > 5 and d > diffs[-2]:
                break
        X = 0.5 * (X + np.swapaxes(X, 1, 2))
        S[:, sl, sl] = X
        dX = derivative(SampledFunction(X, th.period, th.window)).values
        R[:, sl, sl] = dX - _block_rhs(X, tb)
        reports.append(PicardReport((s, size), it, tuple(diffs), converged))
    return th.like(S), th.like(R), tuple(reports)


def sigma1(Sigma0, es_eps, A_eps, xi, gap_factor=1e-3):
    """Off-block ``Sigma1`` cancelling the off-block part of ``G``.

    ``sigma_jk = i|xi| ((Sigma0 D) - (D^T Sigma0))_jk / (lambda_j - lambda_k)^2``
    with ``D_jk = l_j dA/dt r_k``; zero on diagonal blocks.
    """
    lam = es_eps.lambdas.values
    lab = es_eps.block_of()
    off = lab[:, None] != lab[None, :]
    m = lam.shape[1]
    out = np.zeros((lam.shape[0], m, m), dtype=complex)
    if not np.any(off):
        return Sigma0.like(out)
    idx = _win(Sigma0)
    spread = np.max(lam[idx, 0] - lam[idx, -1])
    diff = lam[:, :, None] - lam[:, None, :]
    gap = np.min(np.abs(diff[idx][:, off]))
    if gap < gap_factor * spread:
        raise MultiplicityError(f"eigenvalue gap {gap:.3g} below {gap_factor:g} x spread")
    D = _lr_derivative(es_eps, A_eps)
    S0 = Sigma0.values
    num = S0 @ D - np.swapaxes(D, 1, 2) @ S0
    safe = np.where(off, diff, 1.0)
    out = np.where(off, 1j * abs(xi) * num / safe**2, 0.0)
    return Sigma0.like(out)


def g_matrix(Sigma0, Sigma1, theta, es_eps, xi):
    """``G = dSigma0/dt + Sigma0 Theta + Theta^* Sigma0 + i|xi|^-1 [Lambda, Sigma1]``."""
    th = theta.theta.values
    S0 = Sigma0.values
    S1 = Sigma1.values
    L = es_eps.Lambda.values
    G = derivative(Sigma0).values + S0 @ th + np.swapaxes(th, 1, 2) @ S0
    G = G + (1j / abs(xi)) * (L @ S1 - S1 @ L)
    return Sigma0.like(G.real)


def g_residual(Sigma0, Sigma1, theta, es_eps, xi):
    """Remainder ``R_eps = Q^* G Q`` (real symmetric)."""
    G = g_matrix(Sigma0, Sigma1, theta, es_eps, xi)
    Q = es_eps.Q.values
    return G.like(np.swapaxes(Q, 1, 2) @ G.values @ Q)


@dataclass(frozen=True)
class Symmetrizer:
    """Symmetrizer at one frequency with its construction data and checks.

    ``defects`` holds the self-adjointness defects of ``S0``, ``S1`` and
    ``S0 A_eps`` (the last relative to ``|xi|``).
    """

    S0: MatrixFunction
    S1: MatrixFunction
    Sigma0: MatrixFunction
    Sigma1: MatrixFunction
    R: MatrixFunction
    theta: ThetaMatrix
    structure: object
    A_eps: MatrixFunction
    eps: float
    xi: float
    mu: int
    K1: float
    K2: float
    defects: dict
    omega: SampledFunction = None
    rho: object = None
    picard: tuple = ()
    R0: float = None

    @property
    def S(self):
        return self.S0.like(self.S0.values + self.S1.values / self.xi)

    @property
    def sup_R(self):
        return float(np.max(np.abs(self.R.values[_win(self.R)])))


def _sa_defect(M):
    return float(np.max(np.abs(M - np.conj(np.swapaxes(M, 1, 2)))))


def assemble_and_validate(Sigma0, Sigma1, theta, es_eps, A_eps, xi, eps, mu,
                          omega=None, rho=None, picard=()):
    """Form ``S0``, ``S1``, ``R_eps`` and the validation numbers.

    Raises :class:`BelowR0Error` when ``S`` is not positive definite.
    """
    Q = es_eps.Q.values
    Qh = np.swapaxes(Q, 1, 2)
    S0 = Qh @ Sigma0.values @ Q
    S1 = Qh @ Sigma1.values @ Q
    S = S0 + S1 / abs(xi)
    idx = _win(Sigma0)
    ev = np.linalg.eigvalsh(0.5 * (S + np.conj(np.swapaxes(S, 1, 2)))[idx])
    K1, K2 = float(np.min(ev)), float(np.max(ev))
    SA = S0 @ A_eps.values
    defects = {
        "S0": _sa_defect(S0[idx]),
        "S1": _sa_defect(S1[idx]),
        "S0A": _sa_defect(SA[idx]) / abs(xi),
    }
    if K1 <= 0:
        raise BelowR0Error(f"S is not positive at |xi| = {abs(xi):g} (K1 = {K1:.3g})")
    R = g_residual(Sigma0, Sigma1, theta, es_eps, xi)
    return Symmetrizer(
        Sigma0.like(S0), Sigma0.like(S1), Sigma0, Sigma1, R, theta, es_eps, A_eps,
        eps, abs(xi), mu, K1, K2, defects, omega, rho, picard,
    )


def _sigma0_ok(S0, reports):
    idx = _win(S0)
    ev = np.linalg.eigvalsh(S0.values[idx])
    return np.min(ev) >= 0.5 and all(r.converged for r in reports)


def build_symmetrizer(symbol, xi, eps=None, mu=None, p=math.inf, kernel=POLY_BUMP):
    """Full construction from the symbol ``A(t, xi)`` at ``|xi|``.

    ``eps`` defaults to ``1/|xi|``.  When ``mu`` is not given it starts at
    5 and doubles until Picard iterations converge and ``Sigma0 >= Id/2``.
    """
    xi = float(np.linalg.norm(np.atleast_1d(xi)))
    if eps is None:
        eps = 1.0 / xi
    es = eigendecompose(symbol, xi)
    es_eps, A_eps = mollify_eigenstructure(es, eps, kernel)
    theta = compute_theta(es_eps, A_eps)
    bank = DyadicFilterBank(symbol.n, symbol.period)
    mu_max = bank.j_max + 2
    mus = [mu] if mu is not None else _mu_schedule(mu_max)
    for k, mu_k in enumerate(mus):
        if es_eps.strict:
            S0, omega, rho = sigma0_strict(theta, mu_k)
            reports = ()
        else:
            S0, rho, reports = sigma0_blocks(theta, es_eps.blocks, mu_k, p)
            omega = None
        if mu is not None or _sigma0_ok(S0, reports):
            break
    else:
        raise ConvergenceError(f"Sigma0 checks fail up to mu = {mus[-1]}")
    S1 = sigma1(S0, es_eps, A_eps, xi)
    return assemble_and_validate(S0, S1, theta, es_eps, A_eps, xi, eps, mu_k,
                                 omega, rho, reports)


def _mu_schedule(mu_max):
    mus = []
    m = MU_START
    while m < mu_max:
        mus.append(m)
        m *= 2
    mus.append(mu_max)
    return mus


def symmetrizer_for(coeffs, xi, **kw):
    """Assemble the symbol of ``coeffs`` at ``xi`` and build its symmetrizer."""
    return build_symmetrizer(assemble_symbol(coeffs, xi), xi, **kw)


def identity_defect(symm, n_vectors=4, seed=0):
    """Max over t and random vectors of the defect in
    ``dS0/dt v.v + 2 Re(-i|xi|^-1 S1 A_eps v.v) - R v.v``, relative to ``|v|^2``.
    """
    rng = np.random.default_rng(seed)
    dS0 = derivative(symm.S0).values
    SA = symm.S1.values @ symm.A_eps.values
    R = symm.R.values
    idx = _win(symm.S0)
    worst = 0.0
    for _ in range(n_vectors):
        v = rng.standard_normal(symm.S0.m) + 1j * rng.standard_normal(symm.S0.m)
        q = lambda M: np.einsum("j,tjk,k->t", np.conj(v), M[idx], v)
        lhs = q(dS0).real + 2.0 * np.real(-1j / symm.xi * q(SA))
        worst = max(worst, float(np.max(np.abs(lhs - q(R).real))) / np.vdot(v, v).real)
    return worst


def scan_R0(build, ks):
    """Smallest ``2**k`` above which every rung has ``K1 > 0``.

    ``build(k)`` must return a :class:`Symmetrizer` or raise
    :class:`BelowR0Error`.  Rungs are visited from the top down.
    """
    R0 = None
    K1s = {}
    for k in sorted(ks, reverse=True):
        try:
            K1s[k] = build(k).K1
        except BelowR0Error:
            K1s[k] = None
            break
        R0 = 2.0**k
    return R0, K1s


__all__ = [
    "ThetaMatrix",
    "compute_theta",
    "contraction_spec",
    "sigma0_strict",
    "PicardReport",
    "sigma0_blocks",
    "sigma1",
    "g_matrix",
    "g_residual",
    "Symmetrizer",
    "assemble_and_validate",
    "build_symmetrizer",
    "symmetrizer_for",
    "identity_defect",
    "scan_R0",
]
