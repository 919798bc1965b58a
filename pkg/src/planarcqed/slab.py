"""Thin dielectric-slab mirror, leaky-mirror constants and resonator response.

Polarisations are labelled ``"perp"`` (field along h_perp = h_par x z) and
``"par"`` (field in the plane spanned by z and the in-plane wave vector).
Vector-valued mode functions are returned in the fixed basis
``(z_hat, h_par, h_perp)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, LeakyRegimeError
from .setup import TAU_MAX, CavitySpec

POLARIZATIONS = ("par", "perp")
MIRROR_SIGN = {"perp": -1.0, "par": 1.0}
N_MAX_MARGIN = 64


def _check_alpha(alpha):
    if alpha not in MIRROR_SIGN:
        raise ConfigError(f"polarization must be 'par' or 'perp', got {alpha!r}")


@dataclass(frozen=True)
class SlabResponse:
    t_perp: complex
    t_par: complex
    r_perp: complex
    r_par: complex

    def transmissivity(self, alpha):
        return self.t_perp if alpha == "perp" else self.t_par

    def reflectivity(self, alpha):
        return self.r_perp if alpha == "perp" else self.r_par

    def unitarity_defects(self):
        """Largest deviations of |R|^2+|T|^2-1 and of R*T+T*R from zero."""
        norm = max(abs(abs(r) ** 2 + abs(t) ** 2 - 1.0) for r, t in self._pairs())
        cross = max(abs(np.conj(r) * t + np.conj(t) * r) for r, t in self._pairs())
        return norm, cross

    def _pairs(self):
        return ((self.r_perp, self.t_perp), (self.r_par, self.t_par))


def slab_response(eta: float, kz: float, k_modulus: float) -> SlabResponse:
    """Amplitudes of an infinitesimally thin slab eps(z) = eps0 (1 + eta delta(z)).

    ``eta`` has units of length; ``kz`` and ``k_modulus`` are in 1/m.
    ``eta = math.inf`` returns the perfect-mirror limit.
    """
    if not kz > 0:
        raise ConfigError("kz must be positive (grazing incidence is degenerate)")
    if k_modulus < kz:
        raise ConfigError("|k| must be at least kz")
    if not eta >= 0:
        raise ConfigError("eta must be non-negative")
    if math.isinf(eta):
        return SlabResponse(0j, 0j, -1 + 0j, 1 + 0j)
    x_perp = k_modulus**2 * eta
    x_par = kz * eta
    t_perp = 2 * kz / (2 * kz - 1j * x_perp)
    r_perp = 1j * x_perp / (2 * kz - 1j * x_perp)
    t_par = 2 / (2 - 1j * x_par)
    r_par = 1j * x_par / (1j * x_par - 2)
    return SlabResponse(complex(t_perp), complex(t_par), complex(r_perp), complex(r_par))


@dataclass(frozen=True)
class LeakyConstants:
    """Constant amplitudes of a mirror that deviates from a perfect one at O(tau)."""

    tau: float

    @property
    def r_par(self) -> float:
        return math.sqrt(1.0 - self.tau**2)

    @property
    def r_perp(self) -> float:
        return -math.sqrt(1.0 - self.tau**2)

    @property
    def t(self) -> complex:
        return 1j * self.tau

    def reflectivity(self, alpha):
        return self.r_perp if alpha == "perp" else self.r_par


def leaky_constants(tau: float) -> LeakyConstants:
    if not (0.0 < tau <= TAU_MAX):
        raise LeakyRegimeError(
            f"tau={tau!r} violates tau << 1 (accepted range 0 < tau <= {TAU_MAX})"
        )
    return LeakyConstants(tau)


def spectral_response_exact(spec: CavitySpec, kz, alpha: str = "perp"):
    """L_alpha = T / (1 - exp(2 i l kz) m_alpha R) with the leaky-mirror constants."""
    _check_alpha(alpha)
    mirror = leaky_constants(spec.tau)
    kz = np.asarray(kz, dtype=float)
    phase = np.exp(2j * spec.length * kz)
    out = mirror.t / (1.0 - phase * MIRROR_SIGN[alpha] * mirror.reflectivity(alpha))
    return complex(out) if out.ndim == 0 else out


def spectral_response_L(spec: CavitySpec, omega: float, k: float = 0.0, n_max=None) -> complex:
    """Pole expansion of the resonator response for tau << 1.

    Sums branches n = 0 .. n_max; the default truncation is
    ``ceil(omega / omega_c) + 64``.
    """
    if not omega > 0 or k < 0:
        raise ConfigError("need omega > 0 and k >= 0")
    u = omega / spec.omega_c
    if n_max is None:
        n_max = math.ceil(u) + N_MAX_MARGIN
    if n_max < math.ceil(u):
        raise ConfigError(f"n_max={n_max} does not bracket omega/omega_c={u:.6g}")
    n = np.arange(n_max + 1)
    kz_n = n * math.pi / spec.length
    omega_nk = spec.c * np.sqrt(kz_n**2 + k**2)
    terms = -spec.tau / (omega - omega_nk + 1j * spec.half_width)
    return complex(spec.c / (2 * spec.length) * np.sum(terms))


def reduced_mode_C(alpha: str, kz, k, z, length: float):
    """Intra-cavity reduced mode function as components (z, h_par, h_perp).

    Works for any ``kz``; the discrete cavity modes use ``kz = n pi / length``.
    Broadcasts over array arguments and returns shape ``(..., 3)``.
    """
    _check_alpha(alpha)
    kz, k, z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (kz, k, z)))
    arg = kz * (z + length)
    out = np.zeros(kz.shape + (3,), dtype=complex)
    if alpha == "perp":
        out[..., 2] = -2j * np.sin(arg)
    else:
        kmod = np.hypot(kz, k)
        out[..., 0] = 2 * np.cos(arg) * k / kmod
        out[..., 1] = -2j * np.sin(arg) * kz / kmod
    return out


def reduced_mode_O(alpha: str, kz, k, z, length: float):
    """Perfect-reflectivity limit of the outside mode function (z > 0)."""
    return reduced_mode_C(alpha, kz, k, np.asarray(z) - length, length)


def mode_function_C(spec: CavitySpec, alpha: str, n: int, k: float, theta: float, z: float):
    """Reduced cavity mode of branch ``n`` at height ``z`` inside the resonator.

    ``theta`` only orients the basis (z, h_par, h_perp); use
    :func:`basis_to_cartesian` for lab-frame components.
    """
    if int(n) != n or n < 1:
        raise ConfigError("branch index must be a positive integer")
    if not (-spec.length < z < 0):
        raise ConfigError(f"z={z!r} lies outside the cavity (-l, 0)")
    return reduced_mode_C(alpha, n * math.pi / spec.length, k, z, spec.length)


def basis_to_cartesian(components, theta):
    """Map (z, h_par, h_perp) components to (x, y, z); theta is measured from x."""
    comp = np.asarray(components)
    c, s = np.cos(theta), np.sin(theta)
    # h_par = (cos, sin, 0); h_perp = h_par x z = (sin, -cos, 0)
    x = comp[..., 1] * c + comp[..., 2] * s
    y = comp[..., 1] * s - comp[..., 2] * c
    return np.stack([x, y, comp[..., 0]], axis=-1)
