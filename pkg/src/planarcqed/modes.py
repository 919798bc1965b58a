"""Quasi-mode amplitudes, atom-field coupling and their normalisation.

SI entry points (``amplitude_A``, ``coupling_lambda``, ``normalization_integral``)
sit next to reduced-unit kernels (``*_reduced``) used by the form-factor
integrals.  In reduced units c = omega_c = 1 and the resonator length is pi;
the conversions are::

    A_SI      = A_reduced / sqrt(c * omega_c)
    lambda_SI = D * omega_c / sqrt(epsilon0 * c * hbar) * lambda_reduced
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .errors import ConfigError, NumericalError
from .setup import CavitySpec, PhysicalSetup, quasimode_frequency
from .slab import _check_alpha


def parity_factor(n):
    """sin(n pi / 2) evaluated exactly: 0 for even n, (-1)^((n-1)/2) for odd n."""
    n = np.asarray(n)
    out = np.where(n % 2 == 1, 1.0 - 2.0 * ((n // 2) % 2), 0.0)
    return float(out) if out.ndim == 0 else out


def _check_branch(n):
    if int(n) != n or n < 1:
        raise ConfigError(f"branch index must be a positive integer, got {n!r}")


# -- amplitudes ---------------------------------------------------------------

def amplitude_A(spec: CavitySpec, n: int, omega, k=0.0):
    """Projection A_n(omega, k) of the global photon onto quasi-mode branch n."""
    _check_branch(n)
    omega_nk = quasimode_frequency(spec, n, k)
    pref = -spec.tau / (2.0 * math.sqrt(math.pi * spec.length))
    return pref / (np.asarray(omega) - omega_nk - 1j * spec.half_width)


def amplitude_reduced(u, s, tau: float):
    """A_n in reduced units for probe frequency ``u`` and mode frequency ``s``."""
    return (-tau / (2.0 * math.pi)) / (u - s - 1j * tau**2 / (4.0 * math.pi))


def identity_residual(spec: CavitySpec, n: int, omega, k=0.0):
    """Relative defect of  i tau c sqrt(pi/l) |A|^2 = A* - A.

    The factor c makes both sides carry the same SI units; in reduced units it
    is one.
    """
    a = amplitude_A(spec, n, omega, k)
    lhs = 1j * spec.tau * spec.c * math.sqrt(math.pi / spec.length) * np.abs(a) ** 2
    rhs = np.conj(a) - a
    return np.abs(lhs - rhs) / np.abs(rhs)


def normalization_integral(spec: CavitySpec, n: int, k=0.0, rtol: float = 1e-10) -> float:
    """Integral of c |A_n(omega, k)|^2 over omega > 0.

    Adaptive quadrature on (0, omega_nk + 2e4 Gamma] plus the analytic
    Lorentzian tail beyond it.  Expected value: 1 up to O(Gamma / omega_nk).
    """
    _check_branch(n)
    omega_nk = quasimode_frequency(spec, n, k)
    gam = spec.half_width
    # x = (omega - omega_nk) / Gamma; c |A|^2 d omega = dx / (pi (1 + x^2))
    x_lo = -omega_nk / gam
    x_hi = 2e4
    f = lambda x: 1.0 / (math.pi * (1.0 + x * x))
    # decade-spaced breakpoints keep each piece well scaled out to x_lo ~ -1e9
    decades = 50.0 * 10.0 ** np.arange(0, 12)
    pts = np.concatenate(([x_lo], -decades[::-1], decades[decades < x_hi], [x_hi]))
    pts = np.unique(pts[(pts >= x_lo) & (pts <= x_hi)])
    total, err = integrate.quad_vec(f, pts[0], pts[-1], points=pts[1:-1], epsabs=0.0, epsrel=rtol,
                                    limit=2000)
    if err > 1e-9:
        raise NumericalError("normalization quadrature did not converge", err)
    tail = 0.5 - math.atan(x_hi) / math.pi
    # sanity: the SI integrand has the same value at the pole
    peak = spec.c * abs(amplitude_A(spec, n, omega_nk, k)) ** 2
    if not math.isclose(peak * gam, 1.0 / math.pi, rel_tol=1e-9):
        raise NumericalError("amplitude prefactor inconsistent with pole width")
    return total + tail


def normalization_closed(spec: CavitySpec, n: int, k=0.0) -> float:
    """Exact half-line Lorentzian area 1/2 + arctan(omega_nk / Gamma) / pi."""
    omega_nk = quasimode_frequency(spec, n, k)
    return 0.5 + math.atan(omega_nk / spec.half_width) / math.pi


# -- coupling -------------------------------------------------------------------

def coupling_reduced(alpha: str, n, s, theta):
    """Atom-quasi-mode coupling in reduced units.

    ``s`` is the mode frequency omega_nk / omega_c that enters sqrt(omega) and
    the kz/|k| projection; pass the probe frequency instead of the true mode
    frequency to evaluate on the energy shell.
    """
    _check_alpha(alpha)
    s = np.asarray(s, dtype=float)
    base = 2j * parity_factor(n) * np.sqrt(s / (4.0 * math.pi**3))
    if alpha == "perp":
        return base * np.sin(theta)
    return base * (n / s) * np.cos(theta)


def coupling_lambda(setup: PhysicalSetup, alpha: str, n: int, k, theta, on_shell=None):
    """lambda_{alpha,n}(k, theta) for an in-plane dipole along x at z = -l/2.

    Parameters
    ----------
    k : float or array
        In-plane wavenumber [1/m].
    theta : float or array
        Azimuth of the in-plane wave vector measured from the dipole.
    on_shell : float, optional
        Frequency [rad/s] replacing omega_nk in the smooth factors.

    Returns
    -------
    complex or ndarray, in rad/s * m (a density over d^2 k).
    """
    _check_alpha(alpha)
    _check_branch(n)
    omega = quasimode_frequency(setup.cavity, n, k) if on_shell is None else on_shell
    s = np.asarray(omega, dtype=float) / setup.omega_c
    cst = setup.constants
    scale = setup.atom.dipole_moment(cst) * setup.omega_c / math.sqrt(cst.epsilon0 * cst.c * cst.hbar)
    return scale * coupling_reduced(alpha, n, s, theta)


def coupling_from_mode(setup: PhysicalSetup, alpha: str, n: int, k, theta):
    """Same coupling assembled from the mode-function vector (slower, for checks)."""
    from .slab import basis_to_cartesian, reduced_mode_C

    spec = setup.cavity
    cst = setup.constants
    kz = n * math.pi / spec.length
    u_vec = basis_to_cartesian(reduced_mode_C(alpha, kz, k, -spec.length / 2, spec.length), theta)
    omega = quasimode_frequency(spec, n, k)
    d = setup.atom.dipole_moment(cst)
    return -d * np.sqrt(omega / (cst.epsilon0 * (2 * math.pi) ** 2 * spec.length * cst.hbar)) * u_vec[..., 0]
