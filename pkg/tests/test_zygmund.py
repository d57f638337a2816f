import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypsym.errors import DomainError, ResolutionError
from hypsym.littlewood_paley import BesovSpec, besov_norm
from hypsym.spectral import SampledFunction, lp_norm, sample_interval, sample_periodic
from hypsym.zygmund import (
    POLY_BUMP,
    RegularityClass,
    blows_up,
    dyadic_taus,
    first_difference_modulus,
    generate_rough,
    lipschitz_quotients,
    mollifier_multiplier,
    mollifier_rates,
    mollify,
    rough_callable,
    second_difference_profile,
    second_difference_seminorm,
    write_corpus_csv,
)

Z = RegularityClass()
LZ = RegularityClass("log_zygmund")


def test_regularity_class_validation():
    assert Z.ell == 0 and LZ.ell == 1
    with pytest.raises(DomainError):
        RegularityClass("holder")
    with pytest.raises(DomainError):
        RegularityClass("zygmund", ell=1)
    with pytest.raises(DomainError):
        RegularityClass("zygmund", p=0.5)


def test_taus_need_room():
    f = sample_interval(lambda t: t, 1.0, 2**10)
    taus = dyadic_taus(f)
    assert taus[0] == 0.25 and np.all(taus >= 2 * f.spacing)
    with pytest.raises(DomainError):
        dyadic_taus(sample_interval(lambda t: t, 1.0, 2**10), k_max=1)


def test_quadratic_seminorm():
    # second difference of t^2 is 2 tau^2, so the ratio is 2 tau, largest at tau = 1/4
    f = sample_interval(lambda t: t * t, 1.0, 2**12)
    assert second_difference_seminorm(f, Z) == pytest.approx(0.5, rel=1e-10)


def test_kink_seminorm():
    f = sample_interval(lambda t: np.abs(t - 0.5), 1.0, 2**12)
    assert second_difference_seminorm(f, Z) == pytest.approx(2.0, rel=1e-10)


def test_linear_first_difference():
    f = sample_interval(lambda t: t, 1.0, 2**12)
    assert first_difference_modulus(f, Z) <= 1.0


def test_step_is_not_a_member():
    f = generate_rough("step", 1.0, offset=0.0, base_frequency=4, n=2**14, length=1.0)
    prof = second_difference_profile(f, Z)
    assert not prof.member
    assert prof.growth == pytest.approx(1.0, abs=0.05)


def test_weierstrass_membership_and_besov_band():
    w = generate_rough("weierstrass", 1.0, depth=12, offset=3.0, n=2**14, length=1.0)
    prof = second_difference_profile(w, Z)
    assert prof.member and math.isfinite(prof.value)
    W = sample_periodic(lambda t: sum(2.0**-j * np.cos(2.0**j * t) for j in range(13)), 2 * math.pi, 2**14)
    ratio = second_difference_seminorm(W, Z) / besov_norm(W, BesovSpec(1.0))
    assert 1 / 8 <= ratio <= 8
    assert first_difference_modulus(W, Z) / second_difference_seminorm(W, Z) <= 8


def test_weierstrass_lipschitz_quotient_grows_logarithmically():
    w = generate_rough("weierstrass", 1.0, depth=12, offset=3.0, n=2**14, length=1.0)
    _, q = lipschitz_quotients(w)
    head = q[:10]
    assert np.all(np.diff(head) > 0)
    # roughly one constant increment per halving of tau
    inc = np.diff(head)
    assert np.max(inc) / np.min(inc) < 4


def test_log_weierstrass_needs_the_log_weight():
    f = generate_rough("log_weierstrass", 1.0, depth=12, offset=3.0, n=2**14, length=1.0)
    plain = second_difference_profile(f, Z).ratios[1:8]
    logw = second_difference_profile(f, LZ).ratios[1:8]
    assert np.all(np.diff(plain) > 0)
    assert plain[-1] / plain[0] > 2
    assert np.max(logw) / np.min(logw) < 1.3


def test_mollifier_weights_unit_mass():
    offs, w = POLY_BUMP.weights(2**-6, 2**-12)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(w, w[::-1])
    assert offs[-1] == 64
    s = POLY_BUMP.sample(2**14)
    assert lp_norm(s, 1) == pytest.approx(1.0, rel=1e-7)


def test_mollify_constant_exact():
    f = sample_interval(lambda t: np.full_like(t, 2.5), 1.0, 2**12)
    assert np.max(np.abs(mollify(f, 2**-5).values - 2.5)) < 1e-14


def test_mollify_resolution_and_domain():
    f = sample_interval(lambda t: t, 1.0, 2**10)
    with pytest.raises(ResolutionError):
        mollify(f, 2**-10)
    with pytest.raises(DomainError):
        mollify(f, 1.5)


def test_mollify_cosine_against_kernel_transform():
    f = sample_periodic(np.cos, 2 * math.pi, 2**14)
    eps = 2**-4
    fe = mollify(f, eps)
    err = np.max(np.abs(fe.values - f.values))
    assert err <= eps**2
    # the continuous kernel scales cos by its transform at eps
    assert np.max(np.abs(fe.values - POLY_BUMP.transform(eps) * f.values)) < 1e-6


def test_multiplier_matches_kernel_transform_at_low_frequency():
    n, h, eps = 2**14, 2 * math.pi / 2**14, 2**-3
    m = mollifier_multiplier(eps, n, h)
    for k in (1, 4, 16):
        assert m[k] == pytest.approx(POLY_BUMP.transform(k * eps), abs=1e-6)


def test_generator_positivity_and_seeds():
    with pytest.raises(DomainError):
        generate_rough("weierstrass", 1.0, depth=12, offset=1.5, positive=True)
    with pytest.raises(DomainError):
        generate_rough("fractal")
    with pytest.raises(DomainError):
        rough_callable("weierstrass", phases="sorted")
    a = generate_rough("weierstrass", phases="random", seed=7, n=2**10)
    b = generate_rough("weierstrass", phases="random", seed=7, n=2**10)
    c = generate_rough("weierstrass", phases="random", seed=8, n=2**10)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    one = generate_rough("constant", offset=1.0, n=64)
    assert np.all(one.values == 1.0)


def test_generator_bound_is_sup():
    func, bound = rough_callable("log_weierstrass", 0.5, 10)
    # zero phases put every cosine at its peak at t = 0
    assert func(np.array([0.0]))[0] == pytest.approx(bound)


def test_mollifier_rates_on_weierstrass():
    w = generate_rough("weierstrass", 1.0, depth=12, offset=3.0, n=2**14, length=1.0)
    semi = second_difference_seminorm(w, Z)
    rates = mollifier_rates(w, Z, range(3, 11))
    for seq in rates.rows():
        assert np.max(seq) <= 32 * semi
        assert not blows_up(seq)
    assert np.max(rates.r1) <= 16 * semi


def test_blows_up_rule():
    assert blows_up([1, 1, 1, 3])
    assert not blows_up([1, 2, 2, 2])
    assert blows_up(2.0 ** np.arange(8))


def test_corpus_csv(tmp_path):
    f = sample_interval(lambda t: t, 1.0, 16)
    write_corpus_csv(f, tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "t,f" and len(lines) == 1 + 9


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_seminorm_ignores_constants_and_scales(a, c):
    t = np.arange(1024) / 1024.0 * 2 * math.pi
    base = np.cos(3 * t)
    f = SampledFunction(base, 2 * math.pi)
    g = SampledFunction(c * base + a, 2 * math.pi)
    assert second_difference_seminorm(g, Z) == pytest.approx(abs(c) * second_difference_seminorm(f, Z),
                                                             rel=1e-9, abs=1e-12)
