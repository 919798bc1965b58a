"""Invariant checks behind ``planarcqed selftest``.

Each check returns (name, passed, detail).  The suite is a fast subset of the
test-suite properties, sized to finish in well under a minute.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import LeakyRegimeError
from .setup import CavitySpec, PhysicalSetup

SEED = 7


def _slab_unitarity(rng):
    from .slab import slab_response

    worst = 0.0
    for _ in range(1000):
        kz = 10 ** rng.uniform(4, 8)
        k = kz * (1 + 10 ** rng.uniform(-3, 1))
        eta = 10 ** rng.uniform(-12, -3)
        worst = max(worst, *slab_response(eta, kz, k).unitarity_defects())
    return "slab unitarity (1000 samples)", worst <= 1e-12, f"max defect {worst:.2e}"


def _normalization(setup, rng):
    from .modes import normalization_integral

    spec = setup.cavity
    k_scale = setup.omega_c / setup.constants.c
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 30))
        k = rng.uniform(0, 5) * k_scale
        worst = max(worst, abs(normalization_integral(spec, n, k) - 1.0))
    return "amplitude normalization (20 pairs)", worst <= 1e-6, f"max |I-1| {worst:.2e}"


def _identity(setup, rng):
    from .modes import identity_residual

    spec = setup.cavity
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 30))
        k = rng.uniform(0, 5) * setup.omega_c / setup.constants.c
        w = setup.omega_c * rng.uniform(0.5, 30)
        worst = max(worst, float(identity_residual(spec, n, w, k)))
    return "amplitude identity (100 samples)", worst <= 1e-12, f"max rel {worst:.2e}"


def _oracles(setup, fault):
    from .formfactor import (cavity_ff_hg, cavity_ff_optimal_closed, cavity_ff_quadrature,
                             total_ff_closed, total_ff_quadrature)
    from .profiles import HermiteGaussProfile, OptimalProfile

    n = setup.n_wavelengths
    wc = setup.omega_c
    scale = 1.01 if fault else 1.0
    out = []
    worst = 0.0
    for u in (0.7, 1.2, n + 0.4):
        c = scale * total_ff_closed(setup, u * wc, n)
        q = total_ff_quadrature(setup, u * wc, n)
        worst = max(worst, abs(c - q) / abs(q))
    out.append(("F_T closed vs quadrature", worst <= 1e-3, f"max rel {worst:.2e}"))

    opt = OptimalProfile(setup, setup.omega_a, n)
    worst = 0.0
    for du in (0.0, 2e-7, -5e-7):
        w = (n + du) * wc
        c = scale * cavity_ff_optimal_closed(setup, w, opt.f, n)
        q = cavity_ff_quadrature(setup, w, opt, n)
        worst = max(worst, abs(c - q) / abs(q))
    out.append(("F_C optimal closed vs quadrature", worst <= 1e-3, f"max rel {worst:.2e}"))

    hg = HermiteGaussProfile(500e-6, setup)
    worst = 0.0
    for u in (n - 0.01, n + 3e-6, n + 1e-4):
        c = scale * cavity_ff_hg(setup, u * wc, hg.w, n)
        q = cavity_ff_quadrature(setup, u * wc, hg, n)
        worst = max(worst, abs(c - q) / abs(q))
    out.append(("F_C Hermite-Gauss closed vs quadrature", worst <= 1e-3, f"max rel {worst:.2e}"))
    return out, opt, hg


def _domination(setup, opt, hg):
    from .formfactor import build_curve, total_ff_closed

    n = setup.n_wavelengths
    worst = -np.inf
    for prof in (opt, hg):
        curve = build_curve(setup, "cavity", n, prof, audit=False)
        ft = total_ff_closed(setup, curve.omega, n)
        worst = max(worst, float(np.max(curve.values / ft - 1.0)))
    return "domination F_C <= F_T (1 + 1e-6)", worst <= 1e-6, f"max F_C/F_T - 1 = {worst:.2e}"


def _saturation(setup, opt):
    from .formfactor import cavity_ff_optimal_closed, cavity_ff_quadrature, total_ff_closed

    ft = total_ff_closed(setup, opt.f, opt.n_branches)
    r1 = cavity_ff_optimal_closed(setup, opt.f, opt.f, opt.n_branches) / ft
    r2 = cavity_ff_quadrature(setup, opt.f, opt) / ft
    dev = max(abs(r1 - 1), abs(r2 - 1))
    return "saturation F_C(f) = F_T(f)", dev <= 1e-3, f"closed {r1:.9f}, quadrature {r2:.9f}"


def _leaky_rejection(setup):
    try:
        CavitySpec(setup.n_wavelengths, 0.5, setup.omega_a)
    except LeakyRegimeError:
        return "tau = 0.5 rejected", True, "LeakyRegimeError raised"
    return "tau = 0.5 rejected", False, "accepted a non-leaky mirror"


def run_checks(setup: PhysicalSetup, inject_fault: bool = False):
    rng = np.random.default_rng(SEED)
    results = [_slab_unitarity(rng), _normalization(setup, rng), _identity(setup, rng)]
    oracle, opt, hg = _oracles(setup, inject_fault)
    results.extend(oracle)
    results.append(_domination(setup, opt, hg))
    results.append(_saturation(setup, opt))
    results.append(_leaky_rejection(setup))
    return results
