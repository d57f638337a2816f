r"""Symbols of first-order systems and their time-continuous eigenstructure.

For coefficients :math:`A_1(t),\dots,A_n(t)` and a frozen frequency
:math:`\xi`, the symbol is :math:`A(t,\xi)=\sum_j \xi_j A_j(t)`.  The
eigenstructure stores decreasing real eigenvalues, right eigenvectors as
columns of ``P`` and left eigenvectors as rows of ``Q = P^{-1}``.

Eigenvectors are made continuous in time by pushing a fixed reference basis
through the spectral projector of each eigenvalue cluster and orthonormalizing
the result inside the cluster.  The reference basis is read off the projectors
at ``t = 0``, so ``P(t)`` is a smooth function of ``A(t)`` alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DomainError,
    EpsilonTooLargeError,
    IllConditionedError,
    MultiplicityError,
    NotHyperbolicError,
)
from .spectral import MatrixFunction, SampledFunction
from .zygmund import POLY_BUMP, RegularityClass, mollify

COND_LIMIT = 1e8


@dataclass(frozen=True)
class CoefficientMatrices:
    """Real coefficient matrices ``A_1..A_n`` sampled on a common grid."""

    A: tuple
    regularity: RegularityClass = RegularityClass()

    def __post_init__(self):
        mats = tuple(self.A)
        if not mats:
            raise DomainError("need at least one coefficient matrix")
        ref = mats[0]
        for a in mats:
            if not isinstance(a, MatrixFunction):
                raise DomainError("coefficients must be MatrixFunction instances")
            if a.n != ref.n or a.m != ref.m or not math.isclose(a.period, ref.period):
                raise DomainError("coefficients must share grid and size")
            if not a.is_real:
                raise DomainError("coefficients must be real")
        object.__setattr__(self, "A", mats)

    @property
    def n(self):
        return len(self.A)

    @property
    def m(self):
        return self.A[0].m

    @property
    def K0(self):
        """``max_j sup_t |A_j(t)|`` (spectral norm)."""
        return max(float(np.max(np.linalg.norm(a.values, ord=2, axis=(1, 2)))) for a in self.A)


def _xi_vector(xi, n):
    v = np.atleast_1d(np.asarray(xi, dtype=float))
    if v.shape != (n,):
        raise DomainError(f"xi must have {n} components")
    if not np.any(v):
        raise DomainError("xi must be nonzero")
    return v


def assemble_symbol(coeffs, xi):
    """``A(t, xi) = sum_j xi_j A_j(t)``."""
    v = _xi_vector(xi, coeffs.n)
    vals = np.zeros_like(coeffs.A[0].values)
    for c, a in zip(v, coeffs.A):
        vals = vals + c * a.values
    return coeffs.A[0].like(vals)


@dataclass(frozen=True)
class EigenStructure:
    """Ordered eigenvalues and eigenvectors of a symbol along the time grid.

    Attributes
    ----------
    lambdas : SampledFunction
        Values of shape ``(N, m)``, decreasing along the last axis.
    P, Q : MatrixFunction
        Right eigenvectors (columns) and their inverse (rows are left
        eigenvectors).
    blocks : tuple of (start, size)
        Clusters of equal eigenvalues.
    xi : float
        ``|xi|`` at which the symbol was frozen.
    max_angle_step : float
        Largest angle (radians) between a column of ``P`` at consecutive
        samples.
    """

    lambdas: SampledFunction
    P: MatrixFunction
    Q: MatrixFunction
    blocks: tuple
    xi: float
    max_angle_step: float = 0.0

    @property
    def m(self):
        return self.P.m

    @property
    def strict(self):
        return all(size == 1 for _, size in self.blocks)

    @property
    def Lambda(self):
        lam = self.lambdas.values
        d = np.zeros(lam.shape + (lam.shape[-1],))
        idx = np.arange(lam.shape[-1])
        d[:, idx, idx] = lam
        return self.P.like(d)

    def reconstruct(self):
        """``P Lambda Q``."""
        return self.P.like(self.P.values @ self.Lambda.values @ self.Q.values)

    def block_of(self):
        """Block label of every eigenvalue index."""
        lab = np.empty(self.m, dtype=int)
        for h, (s, size) in enumerate(self.blocks):
            lab[s:s + size] = h
        return lab


def _cluster(lam_sorted, rel_gap):
    spread = lam_sorted[:, 0] - lam_sorted[:, -1]
    gaps = lam_sorted[:, :-1] - lam_sorted[:, 1:]
    split = gaps >= rel_gap * spread[:, None]
    split &= spread[:, None] > 0
    if not np.all(split == split[0]):
        raise MultiplicityError("eigenvalue multiplicity pattern changes in time")
    starts = [0] + [i + 1 for i in np.nonzero(split[0])[0]]
    ends = starts[1:] + [lam_sorted.shape[1]]
    return tuple((int(s), int(e - s)) for s, e in zip(starts, ends))


def _lowdin(v):
    """Closest matrix with orthonormal columns (batched)."""
    g = np.swapaxes(v, -1, -2) @ v
    w, u = np.linalg.eigh(g)
    if np.any(w <= 1e-14 * np.max(w)):
        raise IllConditionedError("degenerate eigenvector block")
    inv_sqrt = (u / np.sqrt(w)[..., None, :]) @ np.swapaxes(u, -1, -2)
    return v @ inv_sqrt


def _reference_basis(proj0, size):
    _, _, piv = scipy.linalg.qr(proj0, pivoting=True)
    v = proj0[:, np.sort(piv[:size])]
    v = _lowdin(v)
    if size == 1:
        col = v[:, 0]
        lead = np.nonzero(np.abs(col) > 1e-12 * np.max(np.abs(col)))[0][0]
        if col[lead] < 0:
            v = -v
    return v


def eigendecompose(symbol, xi=1.0, rel_gap=1e-6, cond_limit=COND_LIMIT):
    """Continuous eigenstructure of ``symbol`` (a real ``MatrixFunction``).

    Raises
    ------
    NotHyperbolicError
        Complex eigenvalue beyond ``1e-8 (1+|xi|) |A|``, or a Jordan block.
    MultiplicityError
        The clustering of eigenvalues changes in time.
    IllConditionedError
        ``cond(P)`` above ``cond_limit``.
    """
    A = symbol.values
    if np.iscomplexobj(A):
        raise DomainError("symbol must be real")
    N, m, _ = A.shape
    xi_abs = float(np.linalg.norm(np.atleast_1d(xi)))
    norms = np.linalg.norm(A, ord=2, axis=(1, 2))
    vals, vecs = np.linalg.eig(A)
    if np.any(np.abs(vals.imag) > 1e-8 * (1 + xi_abs) * np.maximum(norms, 1e-300)[:, None]):
        raise NotHyperbolicError("symbol has non-real eigenvalues")
    lam = vals.real
    order = np.argsort(-lam, axis=1, kind="stable")
    lam = np.take_along_axis(lam, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)
    blocks = _cluster(lam, rel_gap)
    for s, size in blocks:
        if size > 1:
            lam[:, s:s + size] = lam[:, s:s + size].mean(axis=1, keepdims=True)
    scale = np.maximum(norms, 1e-300)
    eye = np.eye(m)
    for s, size in blocks:
        if size == 1:
            continue
        sv = np.linalg.svd(A - lam[:, s][:, None, None] * eye, compute_uv=False)
        if np.any(sv[:, m - size] > 1e-7 * scale):
            raise NotHyperbolicError("eigenvalue is not semi-simple (Jordan block)")
    cond_v = np.linalg.cond(vecs)
    if not np.all(np.isfinite(cond_v)) or np.any(cond_v > 1e12):
        raise NotHyperbolicError("eigenvectors do not span (Jordan block)")
    vinv = np.linalg.inv(vecs)
    P = np.empty((N, m, m))
    for s, size in blocks:
        proj = (vecs[:, :, s:s + size] @ vinv[:, s:s + size, :]).real
        ref = _reference_basis(proj[0], size)
        P[:, :, s:s + size] = _lowdin(proj @ ref)
    cond_p = np.linalg.cond(P)
    if np.any(cond_p > cond_limit):
        raise IllConditionedError(f"cond(P) reaches {np.max(cond_p):.3g}")
    Q = np.linalg.inv(P)
    cosang = np.abs(np.sum(P * np.roll(P, -1, axis=0), axis=1)).clip(0, 1)
    angle = float(np.max(np.arccos(cosang[:-1]))) if N > 1 else 0.0
    lambdas = SampledFunction(lam, symbol.period, symbol.window)
    return EigenStructure(lambdas, symbol.like(P), symbol.like(Q), blocks, xi_abs, angle)


def mollify_eigenstructure(es, eps, kernel=POLY_BUMP, cond_limit=COND_LIMIT):
    """Mollify eigenvalues and right eigenvectors; rebuild ``Q`` and ``A_eps``.

    Returns
    -------
    es_eps : EigenStructure
    A_eps : MatrixFunction
        ``P_eps Lambda_eps Q_eps``.
    """
    lam = mollify(es.lambdas, eps, kernel)
    P = mollify(es.P, eps, kernel)
    cond_p = np.linalg.cond(P.values)
    if not np.all(np.isfinite(cond_p)) or np.any(cond_p > cond_limit):
        raise EpsilonTooLargeError("mollified eigenvector matrix is not invertible")
    if np.any(np.diff(lam.values, axis=1) > 0):
        raise EpsilonTooLargeError("mollification changed the eigenvalue ordering")
    Q = P.like(np.linalg.inv(P.values))
    es_eps = EigenStructure(lam, P, Q, es.blocks, es.xi, es.max_angle_step)
    return es_eps, es_eps.reconstruct()


def eigen_defects(symbol, es):
    """Max of ``|A P - P Lambda|``, ``|Q P - I|`` and ``|P Lambda Q - A|`` over the grid."""
    A, P, Q = symbol.values, es.P.values, es.Q.values
    lam = es.lambdas.values
    right = np.max(np.abs(A @ P - P * lam[:, None, :]))
    bio = np.max(np.abs(Q @ P - np.eye(es.m)))
    rec = np.max(np.abs(es.reconstruct().values - A))
    return right, bio, rec


__all__ = [
    "CoefficientMatrices",
    "assemble_symbol",
    "EigenStructure",
    "eigendecompose",
    "mollify_eigenstructure",
    "eigen_defects",
]
