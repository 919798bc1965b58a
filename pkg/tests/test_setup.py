import math

import numpy as np
import pytest
import scipy.constants as sc
from hypothesis import given, settings, strategies as st

from planarcqed import default_setup
from planarcqed.errors import ConfigError, LeakyRegimeError
from planarcqed.setup import (
    AtomSpec,
    CavitySpec,
    PhysicalSetup,
    parse_config_text,
    prefactor_K,
    quasimode_frequency,
    setup_from_values,
)


def _k_oracle(wavelength, factor, n):
    # independent SI arithmetic with scipy's constant tables
    d = factor * sc.e * sc.physical_constants["Bohr radius"][0]
    wc = 2 * math.pi * sc.c / wavelength / n
    return d**2 * wc**3 / (sc.epsilon_0 * math.pi**2 * sc.hbar * sc.c**3)


def test_prefactor_cesium_value(setup1):
    k = prefactor_K(setup1)
    assert k == pytest.approx(_k_oracle(852e-9, 4.48, 1), rel=1e-8)
    assert 6.2e7 < k < 6.4e7


def test_prefactor_zero_dipole():
    s = PhysicalSetup(AtomSpec(dipole_factor=0.0), 1)
    assert prefactor_K(s) == 0.0


def test_prefactor_scales_with_cutoff_cubed():
    with pytest.warns(UserWarning):
        s2 = default_setup(2)
    assert prefactor_K(s2) / prefactor_K(default_setup(1)) == pytest.approx(1 / 8, rel=1e-14)


def test_coupling_scale_is_pi_squared_K(setup3):
    assert setup3.coupling_scale == pytest.approx(math.pi**2 * prefactor_K(setup3), rel=1e-14)


def test_length_times_cutoff(setup3):
    assert setup3.length * setup3.omega_c == pytest.approx(math.pi * setup3.constants.c, rel=1e-15)
    assert setup3.omega_a == pytest.approx(3 * setup3.omega_c, rel=1e-15)


@pytest.mark.parametrize("tau", [0.0, -1e-3, 0.02, 0.5])
def test_tau_outside_leaky_regime_rejected(tau):
    with pytest.raises(LeakyRegimeError, match="tau"):
        default_setup(1, tau=tau)


@pytest.mark.parametrize("n", [0, -3, 1.5])
def test_bad_n_rejected(n):
    with pytest.raises(ConfigError):
        default_setup(n)


def test_even_n_warns():
    with pytest.warns(UserWarning, match="node"):
        default_setup(2)


def test_non_inplane_dipole_rejected():
    with pytest.raises(ConfigError, match="plane"):
        AtomSpec(dipole_orientation="z")


@pytest.mark.parametrize("n,k_red,expected", [(1, 0.0, 1.0), (3, 0.0, 3.0), (1, math.sqrt(3.0), 2.0)])
def test_quasimode_examples(setup1, n, k_red, expected):
    spec = setup1.cavity
    k = k_red * spec.omega_c / spec.c
    assert quasimode_frequency(spec, n, k) == pytest.approx(expected * spec.omega_c, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 40), k1=st.floats(0, 1e8), dk=st.floats(0, 1e8))
def test_quasimode_monotone_and_bounded(n, k1, dk):
    spec = default_setup(1).cavity
    w1 = quasimode_frequency(spec, n, k1)
    assert w1 >= n * spec.omega_c * (1 - 1e-15)
    assert quasimode_frequency(spec, n, k1 + dk) >= w1
    assert quasimode_frequency(spec, n + 1, k1) > w1


def test_quasimode_rejects_negative_k(setup1):
    with pytest.raises(ConfigError):
        quasimode_frequency(setup1.cavity, 1, -1.0)


def test_cavity_spec_direct():
    spec = CavitySpec(5, 1e-3, 1e15)
    assert spec.reduced_half_width == pytest.approx(1e-6 / (4 * math.pi))
    assert spec.half_width == pytest.approx(spec.c * 1e-6 / (4 * spec.length))


def test_config_roundtrip():
    text = "# comment\natom.wavelength_nm = 780\ncavity.n_wavelengths = 3  # inline\ncavity.tau = 2e-3\n"
    vals = parse_config_text(text)
    s = setup_from_values(vals)
    assert s.n_wavelengths == 3 and s.tau == 2e-3
    assert s.atom.wavelength == pytest.approx(780e-9)


@pytest.mark.parametrize("text", ["bogus.key = 1", "cavity.tau 1e-3", "cavity.n_wavelengths = three"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_constants_are_codata_literals(setup1):
    cst = setup1.constants
    assert cst.c == 299_792_458.0
    assert cst.hbar == 1.054571817e-34
    assert np.isclose(cst.epsilon0, sc.epsilon_0, rtol=1e-8)
