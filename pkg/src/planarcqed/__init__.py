"""Cavity-QED parameters of an atom in a one-sided leaky planar resonator.

The package computes the total, cavity and non-cavity form-factors of a
two-level atom placed midway in a planar Fabry-Perot resonator and driven by a
laterally shaped single-photon pulse, and extracts the effective triplet
(g, kappa, gamma) from them.
"""

from .setup import (
    AtomSpec,
    CavitySpec,
    PhysicalConstants,
    PhysicalSetup,
    CODATA2018,
    default_setup,
    prefactor_K,
    quasimode_frequency,
)

__version__ = "0.1.0"

__all__ = [
    "AtomSpec",
    "CavitySpec",
    "PhysicalConstants",
    "PhysicalSetup",
    "CODATA2018",
    "default_setup",
    "prefactor_K",
    "quasimode_frequency",
]
