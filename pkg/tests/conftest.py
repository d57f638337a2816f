import math

import numpy as np
import pytest

from hypsym.config import triple_system
from hypsym.spectral import sample_interval, sample_periodic
from hypsym.wave import WaveCoefficient, wave_system
from hypsym.zygmund import generate_rough

N_FINE = 2**16

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def rough(kind, amplitude=0.1, offset=1.0, phases="zero", seed=0, n=N_FINE, depth=14):
    return generate_rough(kind, amplitude=amplitude, depth=depth, offset=offset,
                          base_frequency=2, phases=phases, seed=seed, n=n, length=1.0)


@pytest.fixture(scope="session")
def a_zyg():
    return rough("weierstrass")


@pytest.fixture(scope="session")
def a_log():
    return rough("log_weierstrass")


@pytest.fixture(scope="session")
def wave_zyg(a_zyg):
    return wave_system(WaveCoefficient.from_a(a_zyg))


@pytest.fixture(scope="session")
def triple():
    return triple_system(rough("weierstrass", phases="random", seed=2), seed=0)


@pytest.fixture(scope="session")
def a_smooth():
    return sample_periodic(lambda t: 2.0 + np.sin(t), 2 * math.pi, N_FINE)


@pytest.fixture(scope="session")
def a_smooth_interval():
    return sample_interval(lambda t: 1.5 + 0.3 * np.cos(math.pi * t), 1.0, 2**14)


LADDER = tuple(range(6, 14))


def symmetrizer_ladder(coeffs, ks=LADDER):
    """Summary numbers of the symmetrizer at ``xi = 2**k`` for each rung."""
    import time

    from hypsym.symmetrizer import identity_defect, symmetrizer_for

    rows = {}
    for k in ks:
        t0 = time.perf_counter()
        s = symmetrizer_for(coeffs, 2.0**k * np.eye(coeffs.n)[0])
        rows[k] = dict(
            mu=s.mu, K1=s.K1, K2=s.K2, sup_R=s.sup_R, defects=dict(s.defects),
            identity=identity_defect(s), picard=s.picard,
            seconds=time.perf_counter() - t0,
        )
    return rows


@pytest.fixture(scope="session")
def wave_ladder(wave_zyg):
    return symmetrizer_ladder(wave_zyg)


@pytest.fixture(scope="session")
def triple_ladder(triple):
    return symmetrizer_ladder(triple)
