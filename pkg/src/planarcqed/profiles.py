"""Lateral single-photon pulse profiles in reciprocal space.

Both profiles share the angular structure of the dipole coupling: the
``par`` component goes as cos(theta) and the ``perp`` component as
sin(theta), with theta the azimuth of the in-plane wave vector measured from
the dipole.  Profiles are normalised as

    sum_alpha  int d^2k |phi_alpha(k)|^2 = 1 .

The SI value of a profile is in metres; reduced values (wave vectors in units
of omega_c / c) are dimensionless and relate through phi_SI = (c/omega_c) phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_hermite, factorial

from . import kernels
from ._quad import angular_trapezoid, breakpoints, checked_quad
from .errors import ConfigError, UndefinedProfileError
from .modes import amplitude_reduced, coupling_reduced
from .setup import PhysicalSetup
from .slab import POLARIZATIONS, _check_alpha

# beyond this many pole half-widths below the first branch F_T is pure
# Lorentzian tail and the optimal profile is treated as undefined
BELOW_CUTOFF_WIDTHS = 100.0


def _angular(alpha, theta):
    return np.cos(theta) if alpha == "par" else np.sin(theta)


class LateralProfile:
    """Common interface: reduced radial factor times the angular factor."""

    kind = "abstract"

    def radial_reduced(self, alpha: str, kh):
        raise NotImplementedError

    def evaluate_reduced(self, alpha: str, kh, theta):
        _check_alpha(alpha)
        return self.radial_reduced(alpha, kh) * _angular(alpha, theta)

    def descriptor(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class HermiteGaussProfile(LateralProfile):
    """TEM10 (par) / TEM01 (perp) pair with waist ``w`` [m].

    ``setup`` fixes the reduced units; it is only needed for the reduced
    evaluators used by the form-factor integrals.
    """

    w: float
    setup: PhysicalSetup | None = None
    kind = "hermite-gauss"

    def __post_init__(self):
        if not self.w > 0:
            raise ConfigError(f"beam waist must be positive, got {self.w!r}")

    @property
    def v(self) -> float:
        if self.setup is None:
            raise ConfigError("a PhysicalSetup is required for reduced evaluation")
        return self.setup.waist_to_v(self.w)

    def radial_reduced(self, alpha, kh):
        _check_alpha(alpha)
        v = self.v
        kh = np.asarray(kh, dtype=float)
        return (v * v * kh / (1j * math.sqrt(math.pi))) * np.exp(-0.5 * (v * kh) ** 2)

    def evaluate(self, alpha, k, theta):
        return hermite_gauss_profile(self.w, alpha, k, theta)

    def descriptor(self):
        return {"profile": self.kind, "waist_m": self.w}


@dataclass(frozen=True)
class OptimalProfile(LateralProfile):
    """Profile matched to the conjugate coupling-amplitude product at ``f``.

    The coupling factors are taken on the energy shell omega = f (resonant
    approximation).  With the exact off-shell couplings the norm integral
    diverges at large k, so the on-shell form is the one that can be
    normalised.  The quasi-mode amplitudes keep their exact k dependence.
    """

    setup: PhysicalSetup
    f: float
    n_branches: int | None = None
    v: float = field(init=False)
    norm_const: float = field(init=False)
    _weights: dict = field(init=False, repr=False, compare=False)
    kind = "optimal"

    def __post_init__(self):
        if not self.f > 0:
            raise ConfigError(f"profile centre frequency must be positive, got {self.f!r}")
        n = self.setup.n_wavelengths if self.n_branches is None else self.n_branches
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise ConfigError(f"branch count must be an integer >= 1, got {n!r}")
        object.__setattr__(self, "n_branches", int(n))
        v = self.setup.to_u(self.f)
        object.__setattr__(self, "v", v)
        gt = self.setup.gamma_tilde
        ft = float(kernels.ft_reduced(v, self.n_branches, self.setup.tau))
        if v < 1.0 - BELOW_CUTOFF_WIDTHS * gt or not ft > 0:
            raise UndefinedProfileError(
                f"f = {v:.6g} omega_c lies below the cut-off: no branch couples, "
                "F_T(f) vanishes and the optimal profile is undefined"
            )
        # reduced F_T is F_T closed / pi^2 (the K prefactor carries the pi^2)
        object.__setattr__(self, "norm_const", math.sqrt(ft / math.pi**2))
        # read-only after construction, so safe to share across threads
        weights = {}
        for n in kernels.odd_branches(self.n_branches):
            for a in POLARIZATIONS:
                th = 0.0 if a == "par" else 0.5 * math.pi
                weights[a, n] = complex(np.conj(coupling_reduced(a, n, v, th)))
        object.__setattr__(self, "_weights", weights)

    def branch_weight(self, alpha, n):
        """conj(lambda_reduced) on shell at v, without the angular factor."""
        w = self._weights.get((alpha, n))
        if w is None:
            w = complex(np.conj(coupling_reduced(alpha, n, self.v, 0.0 if alpha == "par" else 0.5 * math.pi)))
        return w

    def branch_radial(self, alpha, n, kh):
        """Contribution of branch ``n`` to the reduced radial factor."""
        kh = np.asarray(kh, dtype=float)
        s = np.sqrt(n * n + kh * kh)
        return self.branch_weight(alpha, n) * np.conj(amplitude_reduced(self.v, s, self.setup.tau)) / self.norm_const

    def radial_reduced(self, alpha, kh):
        _check_alpha(alpha)
        kh = np.asarray(kh, dtype=float)
        out = np.zeros(kh.shape, dtype=complex)
        for n in kernels.odd_branches(self.n_branches):
            out = out + self.branch_radial(alpha, n, kh)
        return out

    def evaluate(self, alpha, k, theta):
        kh = self.setup.k_to_reduced(np.asarray(k, dtype=float))
        scale = self.setup.constants.c / self.setup.omega_c
        return scale * self.evaluate_reduced(alpha, kh, theta)

    def pole_clusters(self):
        """(k, width) pairs locating the branch resonances of the profile."""
        gt = self.setup.gamma_tilde
        out = []
        for n in kernels.odd_branches(self.n_branches):
            out.extend(_pole_cluster(self.v, n, gt))
        return out

    def descriptor(self):
        return {"profile": self.kind, "f_rad_s": self.f, "N": self.n_branches}


def _pole_cluster(u, n, gt):
    """Where |A_n(u, s_n(k))|^2 peaks in reduced k, and its width there."""
    near = math.sqrt(2.0 * n * max(gt, n - u))
    if u > n:
        kp = math.sqrt(u * u - n * n)
        return [(kp, gt * u / kp if kp > near else near)]
    return [(0.0, near)]


def optimal_profile(setup: PhysicalSetup, f: float, N: int, alpha: str, k, theta):
    """Optimal profile value in SI units (metres)."""
    return OptimalProfile(setup, f, N).evaluate(alpha, k, theta)


def hermite_gauss_profile(w: float, alpha: str, k, theta):
    """(w^2 k / (i sqrt(pi))) exp(-w^2 k^2 / 2) times cos or sin of theta [m]."""
    _check_alpha(alpha)
    if not w > 0:
        raise ConfigError(f"beam waist must be positive, got {w!r}")
    k = np.asarray(k, dtype=float)
    return (w * w * k / (1j * math.sqrt(math.pi))) * np.exp(-0.5 * (w * k) ** 2) * _angular(alpha, theta)


def hg_1d(n: int, z, w: float):
    """Normalised 1D Hermite-Gauss function F_n(z) with waist w."""
    z = np.asarray(z, dtype=float)
    pref = (2.0 / math.pi) ** 0.25 * math.sqrt(1.0 / (2.0 ** (n + 0.5) * factorial(n, exact=True) * w))
    return pref * eval_hermite(n, z / w) * np.exp(-0.5 * (z / w) ** 2)


def real_space_hg(x, y, w: float, alpha: str):
    """TEM10 for ``par``, TEM01 for ``perp``, each with weight 1/sqrt(2)."""
    _check_alpha(alpha)
    if not w > 0:
        raise ConfigError(f"beam waist must be positive, got {w!r}")
    if alpha == "par":
        return hg_1d(1, x, w) * hg_1d(0, y, w) / math.sqrt(2.0)
    return hg_1d(0, x, w) * hg_1d(1, y, w) / math.sqrt(2.0)


def profile_norm(profile: LateralProfile, k_max=None, n_theta: int = 16, rtol: float = 1e-9) -> float:
    """sum_alpha int d^2k |phi|^2 by numeric quadrature in reduced units.

    The angle is integrated with a periodic trapezoid rule (exact for the
    cos^2 / sin^2 structure), the radius adaptively with breakpoints at the
    profile resonances.  For the optimal profile ``k_max`` defaults to the
    wave number where branch N reaches frequency N + 10.
    """
    theta, wts = angular_trapezoid(n_theta)
    ang = {a: float(np.sum(wts * _angular(a, theta) ** 2)) for a in POLARIZATIONS}
    if isinstance(profile, HermiteGaussProfile):
        v = profile.v
        k_max = kernels.HG_XMAX / v * 1.2 if k_max is None else k_max
        clusters = [(math.sqrt(1.5) / v, 0.5 / v)]
    elif isinstance(profile, OptimalProfile):
        nb = profile.n_branches
        k_max = math.sqrt((nb + 10.0) ** 2 - 1.0) if k_max is None else k_max
        clusters = profile.pole_clusters()
    else:
        raise ConfigError(f"unsupported profile type {type(profile).__name__}")
    pts = breakpoints(0.0, k_max, clusters)
    total = 0.0
    for a in POLARIZATIONS:
        f = lambda kh, a=a: float(np.abs(profile.radial_reduced(a, kh)) ** 2 * kh)
        val, _ = checked_quad(f, pts, rtol=1e-8, what="profile norm", epsrel=rtol, complex_func=False)
        total += ang[a] * val
    return total


def real_space_norm(w: float, n_grid: int = 801, extent: float = 8.0) -> float:
    """Real-space norm on a square grid of +/- extent * w (trapezoid rule)."""
    z = np.linspace(-extent * w, extent * w, n_grid)
    xx, yy = np.meshgrid(z, z, indexing="ij")
    dens = real_space_hg(xx, yy, w, "par") ** 2 + real_space_hg(xx, yy, w, "perp") ** 2
    return float(np.trapezoid(np.trapezoid(dens, z, axis=1), z))


def polar_grid_table(profile: LateralProfile, k_max: float, n_k: int = 64, n_theta: int = 36):
    """Rows (k_reduced, theta, |phi_par|, |phi_perp|) on a polar grid (reduced units)."""
    kh = np.linspace(0.0, k_max, n_k)
    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    kk, tt = np.meshgrid(kh, theta, indexing="ij")
    par = np.abs(profile.evaluate_reduced("par", kk, tt))
    perp = np.abs(profile.evaluate_reduced("perp", kk, tt))
    return np.column_stack([kk.ravel(), tt.ravel(), par.ravel(), perp.ravel()])


__all__ = [
    "LateralProfile",
    "HermiteGaussProfile",
    "OptimalProfile",
    "optimal_profile",
    "hermite_gauss_profile",
    "hg_1d",
    "real_space_hg",
    "profile_norm",
    "real_space_norm",
    "polar_grid_table",
]
