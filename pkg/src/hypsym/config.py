"""Experiment configuration from a ``key = value`` text file.

Example::

    # wave equation with a Zygmund coefficient
    system = wave
    kind = weierstrass
    amplitude = 0.1
    depth = 14
    offset = 1.0
    base_frequency = 2
    regularity = zygmund
    p = inf
    ladder = 6..13
    n = 65536
    T = 1.0

``system`` is ``wave``, ``triple`` (a 3x3 system with a double eigenvalue)
or ``custom``; a custom system gives ``matrix`` as rows separated by ``;``
with entries that are numbers or ``c*a``, ``c*a^2``, ``c/a`` in the
coefficient ``a``.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError, DomainError
from .hyperbolic import CoefficientMatrices
from .spectral import MatrixFunction
from .wave import WaveCoefficient, wave_system
from .zygmund import ROUGH_KINDS, RegularityClass, generate_rough

SYSTEMS = ("wave", "triple", "custom")


def _ladder(text):
    text = text.strip()
    m = re.fullmatch(r"(-?\d+)\s*\.\.\s*(-?\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if hi < lo:
            raise ConfigError(f"empty range {text!r}")
        return tuple(range(lo, hi + 1))
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"bad integer list {text!r}") from None


def _float(text):
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise ConfigError(f"bad number {text!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment parameters.

    ``seed`` drives random phases and random test vectors; identical
    configurations and seeds give identical outputs.
    """

    system: str = "wave"
    kind: str = "weierstrass"
    amplitude: float = 0.1
    depth: int = 14
    offset: float = 1.0
    base_frequency: float = 2.0
    phases: str = "zero"
    regularity: str = "zygmund"
    p: float = math.inf
    ladder: tuple = tuple(range(6, 14))
    eps_ladder: tuple = tuple(range(3, 11))
    mu_range: tuple = tuple(range(5, 11))
    n: int = 2**16
    T: float = 1.0
    mu: int = None
    tol: float = None
    matrix: str = ""
    out: str = "results"
    seed: int = 0

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ConfigError(f"system must be one of {SYSTEMS}")
        if self.kind not in ROUGH_KINDS:
            raise ConfigError(f"kind must be one of {ROUGH_KINDS}")
        if self.phases not in ("zero", "random"):
            raise ConfigError("phases must be 'zero' or 'random'")
        try:
            RegularityClass(self.regularity, self.p)
        except DomainError as e:
            raise ConfigError(str(e)) from None
        if self.n < 8 or self.n & (self.n - 1):
            raise ConfigError("n must be a power of two >= 8")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if self.system == "custom" and not self.matrix:
            raise ConfigError("custom system needs a matrix")
        h = 2.0 * self.T / self.n
        top = max(self.ladder) if self.ladder else 0
        if not self.ladder or 2.0**-top < 4 * h * (1 - 1e-12):
            raise ConfigError(f"ladder must be non-empty with 2^-k >= 4 grid spacings ({4 * h:g})")
        if self.eps_ladder and 2.0 ** -max(self.eps_ladder) < 4 * h * (1 - 1e-12):
            raise ConfigError("eps_ladder exceeds the grid resolution")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def regularity_class(self):
        return RegularityClass(self.regularity, self.p)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(kw)
        return ExperimentConfig(**vals)


_CONVERT = {
    "amplitude": _float, "offset": _float, "base_frequency": _float, "p": _float,
    "T": _float, "tol": _float,
    "depth": int, "n": int, "mu": int, "seed": int,
    "ladder": _ladder, "eps_ladder": _ladder, "mu_range": _ladder,
}


def parse_config(text):
    """Parse the ``key = value`` format into an :class:`ExperimentConfig`."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as e:
        raise ConfigError(f"unreadable config: {e}") from None
    known = {f.name for f in fields(ExperimentConfig)}
    kw = {}
    for key, raw in cp["run"].items():
        if key not in known:
            raise ConfigError(f"unknown key {key!r}")
        conv = _CONVERT.get(key, str)
        try:
            kw[key] = conv(raw.strip())
        except ValueError:
            raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return ExperimentConfig(**kw)


def load_config(path):
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None


def coefficient(cfg, seed_offset=0):
    """The scalar coefficient ``a`` on ``[0, T]``."""
    return generate_rough(
        cfg.kind, cfg.amplitude, cfg.depth, cfg.offset, cfg.base_frequency,
        cfg.phases, cfg.seed + seed_offset, n=cfg.n, length=cfg.T,
        positive=cfg.system in ("wave", "triple"),
    )


def _entry(text, a):
    text = text.strip().replace(" ", "")
    if text in ("a", "-a", "a^2", "-a^2"):
        text = text.replace("a", "1*a")
    if text.endswith("/a"):
        c, term = text[:-2], "/a"
    elif text.endswith("*a^2"):
        c, term = text[:-4], "a^2"
    elif text.endswith("*a"):
        c, term = text[:-2], "a"
    else:
        c, term = text, None
    try:
        c = {"": 1.0, "+": 1.0, "-": -1.0}[c] if c in ("", "+", "-") else float(c)
    except ValueError:
        raise ConfigError(f"bad matrix entry {text!r}") from None
    if term is None:
        return np.full_like(a, c)
    return c * {"a": a, "a^2": a * a, "/a": 1.0 / a}[term]


def parse_matrix(spec, a):
    """Matrix samples ``(N, m, m)`` from the row format of ``matrix``."""
    rows = [r for r in spec.split(";") if r.strip()]
    cells = [[_entry(x, a) for x in r.split(",")] for r in rows]
    m = len(cells)
    if any(len(r) != m for r in cells):
        raise ConfigError("matrix must be square")
    return np.stack([np.stack(r, axis=-1) for r in cells], axis=-2)


def triple_system(a, seed=0):
    """``a(t) P(t) diag(1, 1, 2) P(t)^-1`` with a rough rotation of ``P``."""
    rng = np.random.default_rng(seed)
    P0 = np.eye(3) + 0.3 * rng.standard_normal((3, 3))
    E = np.zeros((3, 3))
    E[0, 2] = E[1, 0] = 1.0
    w = (a.values - np.mean(a.values)) * 0.5
    Pt = P0[None] + w[:, None, None] * E[None]
    A = a.values[:, None, None] * (Pt @ np.diag([1.0, 1.0, 2.0]) @ np.linalg.inv(Pt))
    return CoefficientMatrices((MatrixFunction(A, a.period, a.window),))


def build_system(cfg):
    """Coefficient ``a`` and the system it defines."""
    a = coefficient(cfg)
    if cfg.system == "wave":
        return a, wave_system(WaveCoefficient.from_a(a), cfg.regularity_class)
    if cfg.system == "triple":
        return a, triple_system(a, cfg.seed)
    A = parse_matrix(cfg.matrix, a.values)
    return a, CoefficientMatrices((MatrixFunction(A, a.period, a.window),), cfg.regularity_class)


__all__ = [
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "coefficient",
    "parse_matrix",
    "triple_system",
    "build_system",
]
