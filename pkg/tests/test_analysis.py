import json
import math

import numpy as np
import pytest

from planarcqed import default_setup
from planarcqed.analysis import (
    MHZ,
    SweepResult,
    SweepRow,
    _row,
    count_local_maxima,
    extract_triplet,
    fit_lorentzian,
    lorentzian,
    peak_window,
    sweep_N,
    sweep_w,
)
from planarcqed.errors import ConfigError, FitError
from planarcqed.formfactor import FormFactorCurve, build_curve, peak_grid
from planarcqed.profiles import HermiteGaussProfile, OptimalProfile


def _synthetic(setup, omega0, g, kappa):
    u = peak_grid(omega0 / setup.omega_c, setup.gamma_tilde)
    vals = lorentzian(u * setup.omega_c, omega0, g * g, kappa)
    return FormFactorCurve(u, vals, "cavity", "closed", {"tau": setup.tau}, setup.omega_c)


def test_synthetic_lorentzian_recovered(setup1):
    wc = setup1.omega_c
    fit = fit_lorentzian(_synthetic(setup1, wc, 1e8, 5e8))
    assert fit.g == pytest.approx(1e8, rel=1e-8)
    assert fit.kappa == pytest.approx(5e8, rel=1e-8)
    assert fit.omega0 == pytest.approx(wc, rel=1e-8)
    assert fit.residual < 1e-10 and not fit.degraded


def test_fit_idempotent(setup1):
    fit = fit_lorentzian(_synthetic(setup1, setup1.omega_c, 3e8, 7e8))
    again = fit_lorentzian(_synthetic(setup1, fit.omega0, fit.g, fit.kappa))
    assert again.g == pytest.approx(fit.g, rel=1e-10)
    assert again.kappa == pytest.approx(fit.kappa, rel=1e-10)


def test_fit_rejects_two_peaks(setup1):
    c = _synthetic(setup1, setup1.omega_c, 1e8, 5e8)
    second = lorentzian(c.omega, setup1.omega_c * (1 + 5e3 * setup1.gamma_tilde), 1e16, 5e8)
    two = FormFactorCurve(c.u, c.values + second, "cavity", "closed", c.params, c.omega_c)
    with pytest.raises(FitError, match="local maxima"):
        fit_lorentzian(two)


def test_count_local_maxima():
    assert count_local_maxima([0, 1, 0, 2, 0]) == 2
    assert count_local_maxima([3, 2, 1]) == 1
    assert count_local_maxima([1, 2, 2, 1]) == 1


def test_peak_window_clipped():
    assert peak_window(1, [0.5, 3.0]) == (0.5, 2.0)
    assert peak_window(5, [4.9, 5.1]) == (4.9, 5.1)


@pytest.fixture(scope="module")
def triplets():
    out = {}
    for key, N, prof in (("opt1", 1, None), ("opt3", 3, None), ("hg100", 1, 100e-6), ("hg500", 1, 500e-6)):
        s = default_setup(N)
        p = OptimalProfile(s, s.omega_a, N) if prof is None else HermiteGaussProfile(prof, s)
        out[key] = extract_triplet(s, p)
    s = default_setup(5)
    for peak in (1, 3, 5):
        out[f"hg5_{peak}"] = extract_triplet(s, HermiteGaussProfile(500e-6, s), peak=peak)
    return out


def test_fit_invariants(triplets):
    for t in triplets.values():
        f = t.fit
        assert f.fwhm > 0 and f.area > 0 and f.residual >= 0
        assert f.window[0] <= f.omega0 <= f.window[1]
        assert t.gamma >= 0 and math.isfinite(t.g) and math.isfinite(t.kappa)


def test_residual_drops_with_waist(triplets):
    assert triplets["hg100"].fit.residual > triplets["hg500"].fit.residual


def test_last_peak_most_lorentzian(triplets):
    r = [triplets[f"hg5_{p}"].fit.residual for p in (1, 3, 5)]
    assert r[2] < r[0] and r[2] < r[1]


_DIRECT_KAPPA = ["opt3", "hg500", "hg5_5"]
_DIRECT_KAPPA_CONFLICT = ["opt1", "hg100", "hg5_1", "hg5_3"]


@pytest.mark.parametrize("key", _DIRECT_KAPPA + [
    pytest.param(k, marks=pytest.mark.xfail(strict=True, reason="fit-vs-FWHM tension recorded in the decisions ledger"))
    for k in _DIRECT_KAPPA_CONFLICT
])
def test_direct_fwhm_matches_fit(triplets, key):
    f = triplets[key].fit
    assert f.residual < 1e-2
    assert abs(f.direct_fwhm - f.fwhm) <= 0.05 * f.fwhm


@pytest.mark.parametrize("key", ["opt3", pytest.param("opt1", marks=pytest.mark.xfail(
    strict=True, reason="area-vs-fit tension recorded in the decisions ledger"))])
def test_area_g_matches_fit_g(triplets, key):
    f = triplets[key].fit
    assert abs(f.direct_g - f.g) <= 0.05 * f.g


def test_triplet_summary_and_dict(triplets):
    t = triplets["opt1"]
    assert t.summary().startswith("(g, kappa, gamma) = 2π·(")
    assert "<=floor" in t.summary()
    d = t.to_dict()
    json.dumps(d)
    assert d["gamma_below_floor"] is True
    assert "<=floor" not in triplets["hg500"].summary()


def test_triplet_default_gamma_frequency(triplets, setup1):
    assert triplets["opt1"].gamma_eval_freq == pytest.approx(setup1.omega_a)
    assert triplets["hg500"].gamma_eval_freq == pytest.approx(0.99 * setup1.omega_c)
    assert triplets["hg5_3"].gamma_eval_freq == pytest.approx(0.99 * 3 * default_setup(5).omega_c)


def test_triplet_argument_errors(setup5):
    with pytest.raises(ConfigError):
        extract_triplet(setup5, HermiteGaussProfile(5e-4, setup5), peak=2)
    with pytest.raises(ConfigError):
        extract_triplet(setup5, HermiteGaussProfile(5e-4, setup5), peak=7)
    with pytest.raises(ConfigError):
        extract_triplet(setup5, OptimalProfile(setup5, setup5.omega_a, 5), peak=5)


def test_sweep_n_small(setup1):
    r = sweep_N(setup1, [1, 3, 5])
    g, k = r.column("g"), r.column("kappa")
    assert np.all(np.diff(g) < 0) and np.all(np.diff(k) < 0)
    assert r.success_fraction == 1.0
    assert r.to_csv().splitlines()[0] == "sweep_value,g_rad_s,kappa_rad_s,gamma_rad_s,residual"
    assert json.loads(r.to_json())["axis"] == "N"


def test_sweep_n_rejects_even(setup1):
    with pytest.raises(ConfigError):
        sweep_N(setup1, [1, 2])
    with pytest.raises(ConfigError):
        sweep_N(setup1, [])


def test_sweep_w_small(setup1):
    r = sweep_w(setup1, [100e-6, 500e-6])
    k = r.column("kappa")
    assert k[0] > k[1]
    assert np.all(r.column("gamma") < 1e-3 * r.column("g"))


def test_sweep_values_must_increase():
    row = SweepRow(1.0, 1.0, 1.0, 0.0, 0.0)
    with pytest.raises(ConfigError):
        SweepResult("N", [row, row])


def test_failed_row_is_nan():
    def boom():
        raise FitError("synthetic failure")

    row = _row(3, boom)
    assert not row.ok and math.isnan(row.g) and "synthetic" in row.error


def test_crossing_value():
    rows = [SweepRow(1, 1.0, 2.0, 0, 0), SweepRow(3, 1.0, 0.5, 0, 0)]
    assert SweepResult("N", rows).crossing_value() == 3
