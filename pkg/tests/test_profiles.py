import math

import numpy as np
import pytest

from planarcqed import default_setup
from planarcqed.errors import ConfigError, UndefinedProfileError
from planarcqed.profiles import (
    HermiteGaussProfile,
    OptimalProfile,
    hermite_gauss_profile,
    optimal_profile,
    polar_grid_table,
    profile_norm,
    real_space_hg,
    real_space_norm,
)


@pytest.mark.parametrize("N", [1, 3, 5])
def test_optimal_norm(N):
    s = default_setup(N)
    assert abs(profile_norm(OptimalProfile(s, s.omega_a, N)) - 1) < 1e-6


def test_optimal_norm_detuned_centre(setup3):
    p = OptimalProfile(setup3, 2.2 * setup3.omega_c, 3)
    assert abs(profile_norm(p) - 1) < 1e-6


@pytest.mark.parametrize("w", [50e-6, 100e-6, 500e-6, 800e-6])
def test_hg_norm(setup1, w):
    assert profile_norm(HermiteGaussProfile(w, setup1)) == pytest.approx(1.0, abs=1e-8)


def test_hg_norm_independent_of_setup(setup5):
    assert profile_norm(HermiteGaussProfile(300e-6, setup5)) == pytest.approx(1.0, abs=1e-8)


def test_hg_axis_node():
    for alpha in ("par", "perp"):
        assert hermite_gauss_profile(1e-4, alpha, 0.0, 0.7) == 0


def test_hg_radial_peak():
    w = 2e-4
    k = np.linspace(1e2, 2e4, 200001)
    wt = k * np.abs(hermite_gauss_profile(w, "par", k, 0.0)) ** 2
    assert k[np.argmax(wt)] == pytest.approx(math.sqrt(1.5) / w, rel=1e-4)


def test_angular_structure(setup3):
    opt = OptimalProfile(setup3, setup3.omega_a, 3)
    hg = HermiteGaussProfile(100e-6, setup3)
    for p in (opt, hg):
        for th in (0.0, 0.4, 1.3):
            kh = 2.1
            par0 = p.evaluate_reduced("par", kh, 0.0)
            perp0 = p.evaluate_reduced("perp", kh, math.pi / 2)
            assert p.evaluate_reduced("par", kh, th) == pytest.approx(par0 * math.cos(th), rel=1e-14)
            assert p.evaluate_reduced("perp", kh, th) == pytest.approx(perp0 * math.sin(th), rel=1e-14)


def test_optimal_even_branch_adds_nothing(setup3):
    p = OptimalProfile(setup3, setup3.omega_a, 3)
    assert p.branch_radial("perp", 2, np.array([0.5, 3.0])) == pytest.approx([0, 0])


def test_optimal_si_scaling(setup1):
    p = OptimalProfile(setup1, setup1.omega_a, 1)
    k = 0.3 * setup1.omega_c / setup1.constants.c
    si = optimal_profile(setup1, setup1.omega_a, 1, "perp", k, 1.0)
    red = p.evaluate_reduced("perp", 0.3, 1.0)
    assert si == pytest.approx(red * setup1.constants.c / setup1.omega_c, rel=1e-13)


def test_optimal_undefined_below_cutoff(setup1):
    with pytest.raises(UndefinedProfileError):
        OptimalProfile(setup1, 0.5 * setup1.omega_c, 1)


def test_optimal_bad_args(setup1):
    with pytest.raises(ConfigError):
        OptimalProfile(setup1, -1.0, 1)
    with pytest.raises(ConfigError):
        OptimalProfile(setup1, setup1.omega_a, 0)


def test_real_space_norm():
    for w in (1e-4, 5e-4):
        assert real_space_norm(w) == pytest.approx(1.0, abs=1e-8)


def test_real_space_par_node():
    y = np.linspace(-3e-4, 3e-4, 11)
    assert np.all(real_space_hg(0.0, y, 1e-4, "par") == 0)
    assert np.all(real_space_hg(y, 0.0, 1e-4, "perp") == 0)


def test_fourier_consistency():
    # phi(k) = (1 / 2 pi) int phi(r) exp(-i k.r) d^2 r, theta measured from x
    w = 1.0
    z = np.linspace(-9, 9, 361)
    xx, yy = np.meshgrid(z, z, indexing="ij")
    for alpha in ("par", "perp"):
        field = real_space_hg(xx, yy, w, alpha)
        for k, th in ((0.5, 0.3), (1.2, 2.0), (2.0, -0.8)):
            phase = np.exp(-1j * k * (math.cos(th) * xx + math.sin(th) * yy))
            num = np.trapezoid(np.trapezoid(field * phase, z, axis=1), z) / (2 * math.pi)
            assert abs(num - hermite_gauss_profile(w, alpha, k, th)) < 1e-9


def test_polar_table_shape(setup1):
    tab = polar_grid_table(HermiteGaussProfile(100e-6, setup1), 1.0, 8, 6)
    assert tab.shape == (48, 4)
    assert np.all(tab[:, 2:] >= 0)
    assert np.all(tab[tab[:, 0] == 0, 2:] == 0)


def test_bad_waist():
    with pytest.raises(ConfigError):
        HermiteGaussProfile(0.0)
    with pytest.raises(ConfigError):
        hermite_gauss_profile(-1.0, "par", 1.0, 0.0)
    with pytest.raises(ConfigError):
        HermiteGaussProfile(1e-4).v
