"""Microlocal symmetrizers for hyperbolic systems with Zygmund-type coefficients in time.

Numerical toolkit: dyadic decompositions and logarithmic Besov norms,
Zygmund moduli and mollification, paraproducts, time-continuous
eigenstructures, the two-level symmetrizer, Fourier-mode energy
experiments and the wave-equation closed forms.
"""
from .energy import (
    EnergyTrace,
    LossFit,
    ModeState,
    energy_trace,
    fit_loss,
    gronwall_ratio,
    integrate_mode,
    run_ladder,
)
from .errors import *  # noqa: F401,F403
from .hyperbolic import CoefficientMatrices, EigenStructure, assemble_symbol, eigendecompose
from .littlewood_paley import (
    BesovSpec,
    DyadicFilterBank,
    approximate_primitive,
    besov_norm,
    block,
    low_cut,
)
from .paradiff import bony_defect, paraproduct, remainder
from .spectral import MatrixFunction, SampledFunction, derivative, sample_interval, sample_periodic
from .symmetrizer import Symmetrizer, ThetaMatrix, build_symmetrizer, symmetrizer_for
from .wave import WaveCoefficient, closed_form_symmetrizer, cross_check, wave_system
from .zygmund import RegularityClass, generate_rough, mollify, second_difference_seminorm

__version__ = "0.1.0"
