"""Physical constants, atom and cavity specifications, unit bridge.

All spectral work elsewhere in the package is carried out in reduced units
where the speed of light and the cut-off frequency are one, so that the
resonator length becomes pi.  Frequencies are then ``u = omega / omega_c`` and
beam waists ``v = w * omega_c / c``.  This module is the only place where SI
quantities are converted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, LeakyRegimeError

TAU_MAX = 0.01


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA-2018 exact/recommended values in SI units."""

    c: float = 299_792_458.0
    hbar: float = 1.054571817e-34
    epsilon0: float = 8.8541878128e-12
    elementary_charge: float = 1.602176634e-19
    bohr_radius: float = 5.29177210903e-11

    def __post_init__(self):
        for name in ("c", "hbar", "epsilon0", "elementary_charge", "bohr_radius"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"physical constant {name} must be positive")


CODATA2018 = PhysicalConstants()


@dataclass(frozen=True)
class AtomSpec:
    """Two-level atom with an in-plane transition dipole.

    Parameters
    ----------
    wavelength : float
        Transition wavelength in m.
    dipole_factor : float
        Dipole matrix element in units of e * a0.
    dipole_orientation : str
        Only ``"in-plane"`` is supported.
    """

    wavelength: float = 852e-9
    dipole_factor: float = 4.48
    dipole_orientation: str = "in-plane"

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ConfigError("atom wavelength must be positive")
        if not self.dipole_factor >= 0:
            raise ConfigError("dipole factor must be non-negative")
        if self.dipole_orientation != "in-plane":
            raise ConfigError(
                "only a dipole lying in the mirror plane is supported, "
                f"got {self.dipole_orientation!r}"
            )

    def omega(self, constants: PhysicalConstants = CODATA2018) -> float:
        """Transition angular frequency 2 pi c / lambda_a [rad/s]."""
        return 2.0 * math.pi * constants.c / self.wavelength

    def dipole_moment(self, constants: PhysicalConstants = CODATA2018) -> float:
        """Dipole matrix element D in C m."""
        return self.dipole_factor * constants.elementary_charge * constants.bohr_radius


@dataclass(frozen=True)
class CavitySpec:
    """One-sided leaky planar resonator holding ``n_wavelengths`` atomic wavelengths.

    The resonator length is chosen so that the atomic transition sits at the
    bottom of branch ``N``: ``omega_a = N * omega_c``.
    """

    n_wavelengths: int
    tau: float
    omega_a: float
    c: float = CODATA2018.c

    def __post_init__(self):
        if isinstance(self.n_wavelengths, bool) or int(self.n_wavelengths) != self.n_wavelengths:
            raise ConfigError("n_wavelengths must be an integer")
        if self.n_wavelengths < 1:
            raise ConfigError(f"n_wavelengths must be >= 1, got {self.n_wavelengths}")
        if not (0.0 < self.tau <= TAU_MAX):
            raise LeakyRegimeError(
                f"tau={self.tau!r} violates the leaky-mirror assumption tau << 1 "
                f"(accepted range 0 < tau <= {TAU_MAX})"
            )
        if not self.omega_a > 0:
            raise ConfigError("omega_a must be positive")
        if self.n_wavelengths % 2 == 0:
            warnings.warn(
                f"even N={self.n_wavelengths}: the atom at z=-l/2 sits on a node of "
                "branch N, so no resonant peak forms at omega_a",
                stacklevel=3,
            )

    @property
    def omega_c(self) -> float:
        """Lower cut-off frequency omega_a / N [rad/s]."""
        return self.omega_a / self.n_wavelengths

    @property
    def length(self) -> float:
        """Mirror separation l = pi c / omega_c [m]."""
        return math.pi * self.c / self.omega_c

    @property
    def half_width(self) -> float:
        """Quasi-mode pole half-width c tau^2 / (4 l) [rad/s]."""
        return self.c * self.tau**2 / (4.0 * self.length)

    @property
    def reduced_half_width(self) -> float:
        """Pole half-width in units of omega_c, tau^2 / (4 pi)."""
        return self.tau**2 / (4.0 * math.pi)


@dataclass(frozen=True)
class PhysicalSetup:
    """Atom + cavity + constants, with the reduced-unit bridge."""

    atom: AtomSpec = field(default_factory=AtomSpec)
    n_wavelengths: int = 1
    tau: float = 1e-3
    constants: PhysicalConstants = CODATA2018

    def __post_init__(self):
        # builds and validates the cavity eagerly
        object.__setattr__(
            self,
            "cavity",
            CavitySpec(
                n_wavelengths=self.n_wavelengths,
                tau=self.tau,
                omega_a=self.atom.omega(self.constants),
                c=self.constants.c,
            ),
        )

    @property
    def omega_a(self) -> float:
        return self.cavity.omega_a

    @property
    def omega_c(self) -> float:
        return self.cavity.omega_c

    @property
    def length(self) -> float:
        return self.cavity.length

    @property
    def gamma_tilde(self) -> float:
        """Reduced pole half-width tau^2/(4 pi)."""
        return self.cavity.reduced_half_width

    def with_n(self, n_wavelengths: int) -> "PhysicalSetup":
        return PhysicalSetup(self.atom, n_wavelengths, self.tau, self.constants)

    def to_u(self, omega):
        return omega / self.omega_c

    def to_omega(self, u):
        return u * self.omega_c

    def waist_to_v(self, w: float) -> float:
        """Dimensionless waist w omega_c / c."""
        return w * self.omega_c / self.constants.c

    def k_to_reduced(self, k):
        return k * self.constants.c / self.omega_c

    @property
    def coupling_scale(self) -> float:
        """D^2 omega_c^3 / (epsilon0 hbar c^3) [rad/s]; equals pi^2 K."""
        cst = self.constants
        d = self.atom.dipole_moment(cst)
        return d**2 * self.omega_c**3 / (cst.epsilon0 * cst.hbar * cst.c**3)


def default_setup(n_wavelengths: int = 1, tau: float = 1e-3) -> PhysicalSetup:
    """Cesium D2 line in a resonator holding ``n_wavelengths`` wavelengths."""
    return PhysicalSetup(AtomSpec(), n_wavelengths, tau)


def prefactor_K(setup: PhysicalSetup) -> float:
    """Form-factor rate scale D^2 omega_c^3 / (epsilon0 pi^2 hbar c^3) in rad/s."""
    return setup.coupling_scale / math.pi**2


def quasimode_frequency(spec: CavitySpec, n: int, k):
    """Frequency c sqrt((n pi / l)^2 + k^2) of quasi-mode branch ``n`` [rad/s]."""
    import numpy as np

    if int(n) != n or n < 1:
        raise ConfigError(f"branch index must be a positive integer, got {n!r}")
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ConfigError("in-plane wavenumber must be non-negative")
    kz = n * math.pi / spec.length
    out = spec.c * np.sqrt(kz**2 + k**2)
    return float(out) if out.ndim == 0 else out


# -- key/value configuration -------------------------------------------------

SETUP_KEYS = {
    "atom.wavelength_nm": float,
    "atom.dipole_factor": float,
    "cavity.n_wavelengths": int,
    "cavity.tau": float,
}


def parse_config_text(text: str, allowed: dict | None = None) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment.

    Unknown keys and malformed lines raise :class:`ConfigError`.
    """
    allowed = SETUP_KEYS if allowed is None else allowed
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = allowed[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return values


def load_config(path, allowed: dict | None = None) -> dict:
    return parse_config_text(Path(path).read_text(encoding="utf-8"), allowed)


def setup_from_values(values: dict) -> PhysicalSetup:
    atom = AtomSpec(
        wavelength=values.get("atom.wavelength_nm", 852.0) * 1e-9,
        dipole_factor=values.get("atom.dipole_factor", 4.48),
    )
    return PhysicalSetup(
        atom,
        n_wavelengths=values.get("cavity.n_wavelengths", 1),
        tau=values.get("cavity.tau", 1e-3),
    )
