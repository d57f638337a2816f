import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import cumulative_trapezoid

from hypsym.errors import BelowR0Error, MultiplicityError
from hypsym.hyperbolic import assemble_symbol, eigendecompose, mollify_eigenstructure
from hypsym.spectral import MatrixFunction, derivative
from hypsym.symmetrizer import (
    assemble_and_validate,
    build_symmetrizer,
    compute_theta,
    g_matrix,
    scan_R0,
    sigma0_blocks,
    sigma0_strict,
    sigma1,
    symmetrizer_for,
)
from hypsym.wave import (
    WaveCoefficient,
    closed_form_eigenstructure,
    closed_form_sigma,
    closed_form_theta,
    wave_system,
)

N_CONST = 2**10


def constant(M, n=N_CONST):
    M = np.asarray(M, dtype=float)
    return MatrixFunction(np.broadcast_to(M, (n,) + M.shape).copy(), 1.0)


def mollified(symbol, xi, eps=None):
    es = eigendecompose(symbol, xi)
    es_e, A_e = mollify_eigenstructure(es, eps if eps is not None else 1 / xi)
    return es_e, A_e


def test_constant_coefficients_trivial():
    A = np.array([[2.0, 1.0], [1.0, -1.0]])
    xi = 64.0
    s = build_symmetrizer(constant(xi * A), xi)
    assert np.max(np.abs(s.theta.theta.values)) < 1e-12
    assert np.allclose(s.Sigma0.values, np.eye(2), atol=1e-12)
    assert np.max(np.abs(s.Sigma1.values)) < 1e-12
    assert s.sup_R < 1e-10
    assert s.K1 == pytest.approx(1.0, abs=1e-10) and s.K2 == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(s.S.values, s.S0.values)
    assert max(s.defects.values()) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2**31 - 1), st.integers(2, 7))
def test_constant_symmetric_any_frequency(m, seed, k):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((m, m))
    A = B + B.T
    lam = np.linalg.eigvalsh(A)
    if np.min(np.diff(lam)) < 0.05 * (lam[-1] - lam[0]):
        return
    xi = 2.0**k
    s = build_symmetrizer(constant(xi * A), xi)
    assert s.K1 == pytest.approx(1.0, abs=1e-10) and s.K2 == pytest.approx(1.0, abs=1e-10)
    assert s.defects["S0A"] < 1e-10
    assert s.sup_R < 1e-9


def test_wave_theta_formula(a_zyg):
    sym = assemble_symbol(wave_system(WaveCoefficient.from_a(a_zyg)), 2.0**8)
    es_e, A_e = mollified(sym, 2.0**8)
    th = compute_theta(es_e, A_e)
    assert th.formula_defect <= 1e-6


def test_sigma0_strict_quadrature_oracle(a_smooth):
    xi = 2.0**10
    sym = assemble_symbol(wave_system(WaveCoefficient.from_a(a_smooth)), xi)
    es_e, A_e = mollified(sym, xi)
    th = compute_theta(es_e, A_e)
    # mu = 0 integrates every nonzero frequency of a 2 pi periodic signal
    S0, omega, rho = sigma0_strict(th, 0)
    g = -2.0 * np.diagonal(th.theta.values, axis1=1, axis2=2)
    t = np.arange(sym.n + 1) * (2 * math.pi / sym.n)
    ext = np.vstack([g, g[:1]])
    quad = cumulative_trapezoid(ext - ext[:-1].mean(axis=0), t, axis=0, initial=0.0)[:-1]
    assert np.max(np.abs(omega.values - quad)) < 1e-8
    assert np.max(np.abs(rho.values + g.mean(axis=0))) < 1e-10
    # closed form: sigma = a / (1 + a^2) normalized at t = 0
    a = es_e.lambdas.values[:, 0] / xi
    sig = a / (1 + a * a)
    assert np.max(np.abs(S0.values[:, 0, 0] - sig / sig[0])) < 1e-5


def test_sigma0_blocks_zero_theta():
    A = np.diag([1.0, 1.0, 3.0]) * 16.0
    es_e, A_e = mollified(constant(A), 16.0)
    th = compute_theta(es_e, A_e)
    S0, R, reports = sigma0_blocks(th, es_e.blocks, 5)
    assert np.allclose(S0.values, np.eye(3), atol=1e-14)
    assert reports[0].block == (1, 2) and reports[0].converged


def test_sigma0_blocks_triple(triple):
    xi = 2.0**8
    es_e, A_e = mollified(assemble_symbol(triple, xi), xi)
    th = compute_theta(es_e, A_e)
    mu = 5
    S0, R, reports = sigma0_blocks(th, es_e.blocks, mu)
    # eigenvalues a (1, 1, 2) in decreasing order put the double block last
    X = S0.values[:, 1:, 1:]
    assert np.allclose(X, np.swapaxes(X, 1, 2), atol=1e-12)
    assert np.min(np.linalg.eigvalsh(X)) > 0.5
    (rep,) = reports
    assert rep.converged and rep.contraction < 0.5
    # block residual lives below 2**mu
    spec = np.abs(R.spectrum)[:, 1:, 1:]
    high = np.abs(R.frequencies) >= 2.0**mu
    assert np.max(spec[high]) <= 1e-9 * np.max(spec)


def test_sigma1_homogeneous_in_xi(a_zyg):
    coeffs = wave_system(WaveCoefficient.from_a(a_zyg))
    eps, mu = 2.0**-9, 5
    s1 = build_symmetrizer(assemble_symbol(coeffs, 2.0**9), 2.0**9, eps=eps, mu=mu)
    s2 = build_symmetrizer(assemble_symbol(coeffs, 2.0**11), 2.0**11, eps=eps, mu=mu)
    assert np.max(np.abs(s1.Sigma1.values - s2.Sigma1.values)) <= 1e-9 * np.max(np.abs(s1.Sigma1.values))
    assert np.max(np.abs(s1.Sigma0.values - s2.Sigma0.values)) < 1e-12


def test_sigma1_gap_guard():
    es_e, A_e = mollified(constant(np.diag([0.0, 1.0, 1.0 + 2e-4]) * 16), 16.0)
    assert es_e.strict
    S0 = MatrixFunction(np.broadcast_to(np.eye(3), (N_CONST, 3, 3)).copy(), 1.0)
    with pytest.raises(MultiplicityError):
        sigma1(S0, es_e, A_e, 16.0)


def test_negative_sigma0_below_R0():
    xi = 16.0
    es_e, A_e = mollified(constant(np.diag([1.0, -1.0]) * xi), xi)
    th = compute_theta(es_e, A_e)
    neg = MatrixFunction(np.broadcast_to(-np.eye(2), (N_CONST, 2, 2)).copy(), 1.0)
    S1 = neg.like(np.zeros((N_CONST, 2, 2), dtype=complex))
    with pytest.raises(BelowR0Error):
        assemble_and_validate(neg, S1, th, es_e, A_e, xi, 1 / xi, 5)


def test_scan_R0_stops_at_first_failure():
    def build(k):
        if k < 4:
            raise BelowR0Error("low")

        class S:
            K1 = 0.5
        return S()

    R0, K1s = scan_R0(build, range(2, 8))
    assert R0 == 16.0
    assert K1s[3] is None and 2 not in K1s


def test_closed_form_S0_and_G(a_smooth):
    xi = 2.0**10
    # mu = 0 leaves no low-frequency remainder for a frequency-one coefficient
    s = symmetrizer_for(wave_system(WaveCoefficient.from_a(a_smooth)), xi, mu=0)
    a = s.structure.lambdas.values[:, 0] / xi
    # generic construction reproduces diag(a, 1/a)/2 up to the normalization sigma(0)
    c = s.Sigma0.values[0, 0, 0] * (1 + a[0] ** 2) / a[0]
    S0 = s.S0.values
    assert np.max(np.abs(S0[:, 0, 0] - c * a / 2)) < 1e-5
    assert np.max(np.abs(S0[:, 1, 1] - c / (2 * a))) < 1e-5
    assert np.max(np.abs(S0[:, 0, 1])) < 1e-10
    # the closed forms make G vanish
    a_fn = s.structure.lambdas.like(a)
    Sig0, Sig1 = closed_form_sigma(a_fn)
    G = g_matrix(Sig0, Sig1, closed_form_theta(a_fn), closed_form_eigenstructure(a_fn, xi), xi)
    assert np.max(np.abs(G.values)) < 1e-8


def test_wave_K1_lower_bound(a_zyg):
    s = symmetrizer_for(wave_system(WaveCoefficient.from_a(a_zyg)), 2.0**10)
    a = a_zyg.values
    assert s.K1 >= 0.25 * min(a.min(), 1 / a.max())


def test_residual_sweep_bounded(wave_zyg):
    sup_R = []
    for k in range(3, 11):
        sup_R.append(symmetrizer_for(wave_zyg, 2.0**k).sup_R)
    sup_R = np.array(sup_R)
    assert np.all(np.isfinite(sup_R))
    assert sup_R.max() / sup_R.min() <= 1.1
    inc = np.abs(np.diff(sup_R))
    assert np.all(inc[1:] <= inc[:-1] + 1e-12)


def test_ladder_identity(wave_ladder, triple_ladder):
    for k, row in wave_ladder.items():
        assert row["identity"] <= 1e-8, k
    for k, row in triple_ladder.items():
        if k <= 12:
            assert row["identity"] <= 1e-8, k


def test_ladder_structure(triple_ladder):
    for row in triple_ladder.values():
        assert row["K1"] > 0
        assert all(p.converged for p in row["picard"])


def test_S1_imaginary_hermitian(a_zyg):
    s = symmetrizer_for(wave_system(WaveCoefficient.from_a(a_zyg)), 2.0**9)
    S1 = s.Sigma1.values
    assert np.max(np.abs(S1.real)) == 0.0
    assert np.max(np.abs(S1 - np.conj(np.swapaxes(S1, 1, 2)))) < 1e-12
    assert np.all(S1[:, [0, 1], [0, 1]] == 0)
    dS0 = derivative(s.S0)
    assert np.all(np.isfinite(dS0.values))
