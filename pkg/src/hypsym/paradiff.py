r"""Bony's decomposition of products and a composition test.

.. math::

    uv = T_u v + T_v u + R(u, v),\qquad
    T_u v = \sum_{j\ge 2} S_{j-2}u\,\Delta_j v,\qquad
    R(u, v) = \sum_{|j-k|\le 1}\Delta_j u\,\Delta_k v .

Products are formed pointwise on the grid, so the identity holds to
rounding error whatever the aliasing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .littlewood_paley import BesovSpec, all_blocks, all_low_cuts, besov_norm, resolve_bank
from .spectral import derivative, lp_norm


def _check_grid(u, v):
    if u.n != v.n or not math.isclose(u.period, v.period):
        raise DomainError("u and v must share a grid")


def paraproduct(u, v, bank=None):
    """Paraproduct ``T_u v = sum_{j>=2} S_{j-2}u Delta_j v``."""
    _check_grid(u, v)
    bank = resolve_bank(u, bank)
    low = all_low_cuts(u, bank, shift=-2)
    dv = all_blocks(v, bank)
    return u.like(np.sum(low[2:] * dv[2:], axis=0))


def remainder(u, v, bank=None):
    """Remainder ``R(u, v) = sum_{|j-k|<=1} Delta_j u Delta_k v``."""
    _check_grid(u, v)
    bank = resolve_bank(u, bank)
    du = all_blocks(u, bank)
    dv = all_blocks(v, bank)
    near = dv.copy()
    near[1:] += dv[:-1]
    near[:-1] += dv[1:]
    return u.like(np.sum(du * near, axis=0))


def bony_defect(u, v, bank=None):
    """``||T_u v + T_v u + R(u,v) - uv||_inf / (||u||_inf ||v||_inf)``."""
    total = paraproduct(u, v, bank) + paraproduct(v, u, bank) + remainder(u, v, bank)
    scale = max(np.max(np.abs(u.values)) * np.max(np.abs(v.values)), 1e-300)
    return float(np.max(np.abs(total.values - u.values * v.values)) / scale)


def paraproduct_constant(u, v, spec, bank=None):
    """Measured ``||T_u v||_{B^s} / (||u||_inf ||dv||_{B^{s-1}})``."""
    lower = BesovSpec(spec.s - 1.0, spec.alpha, spec.p, spec.r)
    num = besov_norm(paraproduct(u, v, bank), spec, bank)
    den = lp_norm(u, math.inf) * besov_norm(derivative(v), lower, bank)
    return num / den if den > 0 else 0.0


def remainder_constant(u, v, spec_u, spec_v, bank=None):
    """Measured ``||R(u,v)||_{B^{s+t}} / (||u||_{B^s} ||v||_{B^t})`` with ``s + t > 0``."""
    if spec_u.s + spec_v.s <= 0:
        raise DomainError("the remainder bound needs s + t > 0")
    target = BesovSpec(spec_u.s + spec_v.s, spec_u.alpha + spec_v.alpha, spec_u.p, spec_u.r)
    num = besov_norm(remainder(u, v, bank), target, bank)
    den = besov_norm(u, spec_u, bank) * besov_norm(v, spec_v, bank)
    return num / den if den > 0 else 0.0


@dataclass(frozen=True)
class CompositionReport:
    """Ratio ``||d(F o u)|| / ||du||`` in ``B^{(s-1) + alpha log}_{p,r}``."""

    ratio: float
    numerator: float
    denominator: float
    sup_u: float


def composition_check(F, u, spec, bank=None):
    """Measure how left composition by a smooth ``F`` acts on ``du``.

    ``spec`` must have ``s > 0``, or ``s = 0`` with ``alpha > 1`` and ``r = inf``.
    """
    if not (spec.s > 0 or (spec.s == 0 and spec.alpha > 1 and math.isinf(spec.r))):
        raise DomainError("composition needs s > 0, or s = 0 with alpha > 1 and r = inf")
    if not np.all(np.isfinite(u.values)):
        raise DomainError("u must be bounded")
    lower = BesovSpec(spec.s - 1.0, spec.alpha, spec.p, spec.r)
    Fu = u.like(np.asarray(F(u.values), dtype=float))
    num = besov_norm(derivative(Fu), lower, bank)
    den = besov_norm(derivative(u), lower, bank)
    ratio = num / den if den > 0 else 0.0
    return CompositionReport(ratio, num, den, float(np.max(np.abs(u.values))))


__all__ = [
    "paraproduct",
    "remainder",
    "bony_defect",
    "paraproduct_constant",
    "remainder_constant",
    "CompositionReport",
    "composition_check",
]
