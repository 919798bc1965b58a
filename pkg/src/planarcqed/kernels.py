"""Dimensionless closed-form kernels of the form-factors.

Arguments are reduced frequencies ``u = omega / omega_c``, reduced centre
frequency ``v = f / omega_c`` of the optimal profile, or reduced waist
``v = w omega_c / c`` of the Hermite-Gaussian beams.  Only odd branches carry
a coupling to an atom at the resonator centre, so all sums skip even n.
"""

from __future__ import annotations

import math

import numpy as np

from ._quad import gauss_legendre

# Gaussian factor exp(-x^2/2) drops below 1e-16 beyond x^2 = 74
HG_XMAX = math.sqrt(74.0)


def odd_branches(n_max: int):
    return range(1, int(n_max) + 1, 2)


def pole_halfwidth(tau: float) -> float:
    return tau**2 / (4.0 * math.pi)


def ft_reduced(u, n_max: int, tau: float):
    """Staircase sum  sum_n (n^2 + u^2) (1/2 + arctan((4 pi / tau^2)(u - n)) / pi)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    scale = 4.0 * math.pi / tau**2
    for n in odd_branches(n_max):
        out = out + (n * n + u * u) * (0.5 + np.arctan(scale * (u - n)) / math.pi)
    return out


def fc_opt_reduced(u, v, n_max: int, tau: float):
    """Complex amplitude of the optimal cavity form-factor.

    Each odd branch contributes the overlap of two quasi-mode Lorentzians
    centred at ``u`` and ``v`` with the smooth weight (n^2 + v^2) taken at
    ``v``.  The logarithm of the overlap integral is written through a
    principal-branch complex arctanh.
    """
    u = np.asarray(u, dtype=float)
    dd = 2.0 * math.pi * (v - u) + 1j * tau**2
    out = np.zeros(np.broadcast(u, v).shape, dtype=complex)
    for n in odd_branches(n_max):
        x = 4.0 * math.pi * (n - 0.5 * (u + v)) / dd
        out = out + (n * n + v * v) * (2j * math.pi**2 + 4.0 * math.pi * np.arctanh(x)) / dd
    return out


def fc_opt_logform(u, v, n_max: int, tau: float):
    """Same quantity written with two separate principal logarithms (cross-check)."""
    gt = pole_halfwidth(tau)
    u = np.asarray(u, dtype=float)
    out = np.zeros(np.broadcast(u, v).shape, dtype=complex)
    a = v + 1j * gt
    b = u - 1j * gt
    for n in odd_branches(n_max):
        out = out + (n * n + v * v) * (np.log(n - b) - np.log(n - a)) / (a - b)
    return out


def hg_branch(u: float, n: int, v: float, tau: float) -> complex:
    """int_n^inf sqrt(s (s^2 - n^2)) (n + s) exp(-v^2 (s^2 - n^2) / 2) / (u - s - i gt) ds.

    Written in x = v sqrt(s^2 - n^2) and truncated at x^2 = 74.  When the pole
    s = u lies inside the range its residue part h(u) s'(x) / D(x) is removed
    and added back through the complex logarithm, so that the remaining
    integrand is smooth at the resolution of the composite Gauss-Legendre mesh.
    """
    gt = pole_halfwidth(tau)
    vv = float(v)

    def s_of(x):
        return np.sqrt(n * n + (x / vv) ** 2)

    def g(x):
        s = s_of(x)
        return (x * x / vv**3) * (n + s) / np.sqrt(s) * np.exp(-0.5 * x * x)

    def denom(x):
        return u - s_of(x) - 1j * gt

    edges = [np.linspace(0.0, HG_XMAX, 17)]
    x0 = vv * math.sqrt(2.0 * n * gt)
    edges.append(x0 * 3.0 ** np.arange(-4, 12))
    h = 0.0
    corr = 0.0
    if u > n:
        xp = vv * math.sqrt(u * u - n * n)
        if xp < HG_XMAX + 1.0:
            sp = xp / (vv * vv * u)
            h = g(xp) / sp if xp > 0 else 0.0
            off = (gt / sp) * 3.0 ** np.arange(-3, 25) if xp > 0 else np.array([])
            edges.append(np.concatenate(([xp], xp + off, xp - off)))
            corr = h * (np.log(denom(0.0)) - np.log(denom(HG_XMAX)))
    e = np.unique(np.clip(np.concatenate(edges), 0.0, HG_XMAX))

    def regular(x):
        s = s_of(x)
        return (g(x) - h * x / (vv * vv * s)) / denom(x)

    return complex(gauss_legendre(regular, e) + corr)


def fc_hg_bullet(u: float, v: float, n_max: int, tau: float) -> complex:
    """sum over odd n of sin(3 pi n / 2) times the branch integral."""
    total = 0.0j
    for n in odd_branches(n_max):
        sign = -1.0 if (n // 2) % 2 == 0 else 1.0  # sin(3 pi n / 2)
        total += sign * hg_branch(u, n, v, tau)
    return total
