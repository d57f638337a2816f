"""Batch runner: ``hypsym <subcommand> --config PATH [--out DIR] [--seed N]``.

Every subcommand writes one or more CSV files (first line
``# hypsym/<table> schema v1``) and a ``plot_<subcommand>.py`` script for
matplotlib.  Exit status: 0 when every in-run check passes, 1 when a check
fails (the failing checks are printed), 2 for a usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from .config import build_system, coefficient, load_config
from .energy import integrated_bound, run_ladder
from .errors import ConfigError, DomainError, HypsymError
from .hyperbolic import assemble_symbol
from .littlewood_paley import (
    BesovSpec,
    DyadicFilterBank,
    all_blocks,
    besov_decomposition,
    primitive_gain,
)
from .paradiff import bony_defect, composition_check, paraproduct_constant, remainder_constant
from .spectral import lp_norm
from .symmetrizer import identity_defect, symmetrizer_for
from .wave import cross_check
from .zygmund import (
    blows_up,
    first_difference_profile,
    generate_rough,
    mollifier_rates,
    second_difference_profile,
)

SCHEMA_VERSION = 1
SUBCOMMANDS = ("decompose", "zygmund", "paradiff", "symmetrize", "energy", "wave")


def fmt(x):
    """Deterministic text for a CSV cell."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if x is None:
        return ""
    return str(x)


class Run:
    """Collects tables and checks of one subcommand."""

    def __init__(self, name):
        self.name = name
        self.tables = {}
        self.checks = []

    def table(self, name, header, rows):
        self.tables[name] = (tuple(header), [tuple(r) for r in rows])

    def check(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))

    @property
    def ok(self):
        return all(c[1] for c in self.checks)


def write_outputs(run, out):
    os.makedirs(out, exist_ok=True)
    paths = []
    for name, (header, rows) in run.tables.items():
        path = os.path.join(out, f"{run.name}_{name}.csv")
        with open(path, "w", newline="") as fh:
            fh.write(f"# hypsym/{run.name}_{name} schema v{SCHEMA_VERSION}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([fmt(x) for x in r])
        paths.append(path)
    with open(os.path.join(out, f"{run.name}_checks.csv"), "w", newline="") as fh:
        fh.write(f"# hypsym/{run.name}_checks schema v{SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "passed", "detail"])
        for c in run.checks:
            w.writerow([c[0], fmt(c[1]), c[2]])
    with open(os.path.join(out, f"plot_{run.name}.py"), "w") as fh:
        fh.write(plot_script(run))
    return paths


def plot_script(run):
    lines = [
        "# Generated plot script; run with python and matplotlib installed.",
        "import csv",
        "import os",
        "import matplotlib.pyplot as plt",
        "",
        "HERE = os.path.dirname(os.path.abspath(__file__))",
        "",
        "",
        "def load(name):",
        "    with open(os.path.join(HERE, name)) as fh:",
        "        rows = [r for r in csv.reader(fh) if r and not r[0].startswith('#')]",
        "    head, body = rows[0], rows[1:]",
        "    return {h: [float(r[i]) if r[i] else float('nan') for r in body] for i, h in enumerate(head)}",
        "",
        "",
    ]
    for name, (header, _) in run.tables.items():
        x, ys = header[0], header[1:]
        lines += [
            f"d = load({run.name + '_' + name + '.csv'!r})",
            "fig, ax = plt.subplots()",
            f"for y in {list(ys)!r}:",
            f"    ax.plot(d[{x!r}], d[y], marker='.', label=y)",
            f"ax.set_xlabel({x!r})",
            "ax.set_yscale('symlog', linthresh=1e-12)",
            "ax.legend()",
            f"fig.savefig(os.path.join(HERE, {run.name + '_' + name + '.png'!r}))",
            "",
        ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# subcommands


def run_decompose(cfg):
    run = Run("decompose")
    a = coefficient(cfg)
    bank = DyadicFilterBank.for_function(a)
    blocks = all_blocks(a, bank)
    err = float(np.max(np.abs(blocks.sum(axis=0) - a.values)))
    cls = cfg.regularity_class
    spec = BesovSpec(1.0, -float(cls.ell), cls.p)
    dec = besov_decomposition(a, spec, bank)
    rows = [(j, lp_norm(a.like(blocks[j]), math.inf), lp_norm(a.like(blocks[j]), cls.p), dec.terms[j])
            for j in range(bank.j_max + 1)]
    run.table("blocks", ["j", "linf", "lp", "besov_term"], rows)
    run.table("summary", ["quantity", "value"], [("reconstruction_error", err), ("besov_norm", dec.value)])
    run.check("reconstruction <= 1e-12", err <= 1e-12, fmt(err))
    return run


def run_zygmund(cfg):
    run = Run("zygmund")
    a = coefficient(cfg)
    cls = cfg.regularity_class
    d2 = second_difference_profile(a, cls)
    d1 = first_difference_profile(a, cls)
    run.table("sweep", ["tau", "second_difference", "first_difference"],
              zip(d2.taus, d2.ratios, d1.ratios))
    rates = mollifier_rates(a, cls, cfg.eps_ladder)
    run.table("mollifier", ["k", "eps", "r0", "r1", "r2"],
              zip(rates.ks, rates.eps, rates.r0, rates.r1, rates.r2))
    run.table("summary", ["quantity", "value"], [
        ("seminorm", d2.value), ("growth", d2.growth), ("first_difference", d1.value),
    ])
    run.check("membership (bounded second-difference sweep)", d2.member, fmt(d2.growth))
    bound = 32.0 * d2.value
    for name, seq in zip(("r0", "r1", "r2"), rates.rows()):
        run.check(f"{name} <= 32 seminorm", np.max(seq) <= bound, fmt(float(np.max(seq))))
        run.check(f"{name} no blow-up", not blows_up(seq))
    return run


def run_paradiff(cfg):
    run = Run("paradiff")
    u = coefficient(cfg)
    v = generate_rough(cfg.kind, cfg.amplitude, cfg.depth, 0.0, cfg.base_frequency,
                       "random", cfg.seed + 1, n=cfg.n, length=cfg.T)
    cls = cfg.regularity_class
    spec = BesovSpec(1.0, -float(cls.ell), cls.p)
    defect = bony_defect(u, v)
    pc = paraproduct_constant(u, v, spec)
    rc = remainder_constant(u, v, spec, spec)
    comp = composition_check(lambda x: x * x, u, spec)
    run.table("summary", ["quantity", "value"], [
        ("bony_defect", defect), ("paraproduct_constant", pc),
        ("remainder_constant", rc), ("composition_ratio", comp.ratio),
    ])
    run.check("Bony identity <= 1e-11", defect <= 1e-11, fmt(defect))
    run.check("constants finite", all(map(math.isfinite, (pc, rc, comp.ratio))))
    return run


def run_symmetrize(cfg):
    run = Run("symmetrize")
    _, coeffs = build_system(cfg)
    rows = []
    sup_r = []
    for k in cfg.ladder:
        try:
            s = symmetrizer_for(coeffs, 2.0**k * np.eye(coeffs.n)[0], mu=cfg.mu)
        except HypsymError as e:
            run.check(f"construction at k={k}", False, type(e).__name__)
            continue
        idd = identity_defect(s, seed=cfg.seed)
        rows.append((k, s.xi, s.mu, s.K1, s.K2, s.sup_R, s.defects["S0"], s.defects["S1"],
                     s.defects["S0A"], idd))
        sup_r.append(s.sup_R)
        run.check(f"k={k} self-adjoint <= 1e-10", max(s.defects["S0"], s.defects["S1"]) <= 1e-10)
        run.check(f"k={k} K1 > 0", s.K1 > 0, fmt(s.K1))
        run.check(f"k={k} S0 A_eps self-adjoint <= 1e-8", s.defects["S0A"] <= 1e-8)
    run.table("ladder", ["k", "xi", "mu", "K1", "K2", "sup_R", "sa_S0", "sa_S1", "sa_S0A_over_xi",
                         "identity_defect"], rows)
    if sup_r:
        ratio = max(sup_r) / max(min(sup_r), 1e-300)
        run.check("sup R bounded across ladder (max/min <= 10)", ratio <= 10, fmt(ratio))
    R0 = 2.0 ** min(r[0] for r in rows) if rows else None
    run.table("summary", ["quantity", "value"], [("R0_upper", R0)])
    return run


def run_energy(cfg):
    run = Run("energy")
    _, coeffs = build_system(cfg)
    rungs, fit = run_ladder(coeffs, cfg.ladder, T=cfg.T, p=cfg.p, tol=cfg.tol, mu=cfg.mu)
    C = max(r.gronwall.C for r in rungs)
    rows = []
    for r, phi in zip(rungs, fit.Phi_measured):
        lo, hi = r.trace.equivalence_band
        ib = float(np.max(integrated_bound(r.trace, r.gronwall, C)[0]))
        rows.append((r.k, r.xi, float(np.max(r.state.norm)), float(r.state.norm[-1]), lo, hi,
                     r.symm.K1, r.symm.K2, r.gronwall.C, phi, ib))
        run.check(f"k={r.k} K1 <= E/|u|^2 <= K2", r.symm.K1 * (1 - 1e-9) <= lo and hi <= r.symm.K2 * (1 + 1e-9))
    run.table("ladder", ["k", "xi", "max_norm", "final_norm", "band_lo", "band_hi", "K1", "K2",
                         "gronwall_C", "Phi_T", "integrated_ratio"], rows)
    run.table("loss", ["t", "beta"], zip(fit.times, fit.betas))
    top = rungs[-1]
    run.table("trace", ["t", "E", "norm2"],
              zip(top.trace.t[::64], top.trace.E[::64], top.state.norm[::64] ** 2))
    run.table("summary", ["quantity", "value"], [
        ("beta_tilde", fit.beta_tilde), ("gamma", fit.gamma), ("residual", fit.residual),
        ("gronwall_C", C),
    ])
    run.check("Gronwall constant <= 64", C <= 64, fmt(C))
    bmax = float(np.max(np.abs(fit.betas)))
    if cfg.kind == "constant":
        run.check("constant coefficients: |beta| <= 0.02", bmax <= 0.02, fmt(bmax))
    elif cfg.regularity == "zygmund":
        run.check("Zygmund: beta <= 0.05", float(np.max(fit.betas)) <= 0.05, fmt(float(np.max(fit.betas))))
    return run


def run_wave(cfg):
    run = Run("wave")
    a = coefficient(cfg)
    rows = []
    for k in cfg.ladder:
        r = cross_check(a, 2.0**k, mu=cfg.mu)
        rows.append((k, r.theta, r.theta_budget, r.sigma12, r.sigma12_budget, r.sigma12_opposite,
                     r.S0, r.S0_budget, r.normalization))
        tol = 1e-5
        run.check(f"k={k} theta within budget", r.theta <= r.theta_budget * (1 + 1e-6) + tol)
        run.check(f"k={k} sigma12 within budget", r.sigma12 <= r.sigma12_budget * (1 + 1e-6) + tol)
        run.check(f"k={k} S0 within budget", r.S0 <= r.S0_budget + tol)
    run.table("cross_check", ["k", "theta", "theta_budget", "sigma12", "sigma12_budget",
                              "sigma12_opposite_sign", "S0", "S0_budget", "normalization"], rows)
    return run


RUNNERS = {
    "decompose": run_decompose,
    "zygmund": run_zygmund,
    "paradiff": run_paradiff,
    "symmetrize": run_symmetrize,
    "energy": run_energy,
    "wave": run_wave,
}


def parser():
    p = argparse.ArgumentParser(prog="hypsym", description="Symmetrizer and energy experiments.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="key = value configuration file")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, help="seed (overrides the config)")
    return p


def main(argv=None):
    try:
        args = parser().parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        cfg = load_config(args.config).with_overrides(out=args.out, seed=args.seed)
        run = RUNNERS[args.subcommand](cfg)
    except (ConfigError, DomainError) as e:
        print(f"hypsym: configuration error: {e}", file=sys.stderr)
        return 2
    except HypsymError as e:
        print(f"hypsym: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    write_outputs(run, cfg.out)
    for name, ok, detail in run.checks:
        if not ok:
            print(f"FAILED {name} {detail}".rstrip(), file=sys.stderr)
    return 0 if run.ok else 1


__all__ = ["main", "parser", "fmt", "Run", "write_outputs", "RUNNERS", "SUBCOMMANDS"]
