"""Lorentzian extraction of (g, kappa) and evaluation of gamma.

A cavity form-factor peak is modelled as

    F(omega) = (kappa / 2 pi) g^2 / ((omega - omega0)^2 + kappa^2 / 4)

so that its area is g^2 and its full width at half maximum is kappa.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import kernels
from .errors import ConfigError, FitError, NumericalError
from .formfactor import (
    GAMMA_FLOOR,
    FormFactorCurve,
    build_curve,
    gamma_report,
    noncavity_ff,
    peak_grid,
)
from .profiles import HermiteGaussProfile, OptimalProfile
from .setup import PhysicalSetup

MHZ = 2.0 * math.pi * 1e6
# MINPACK lmder settings; initial step bound factor 100 is the MINPACK default
FIT_TOL = 1e-15
FIT_MAX_NFEV = 20000
GAMMA_DETUNING = 0.99


def lorentzian(omega, omega0, area, fwhm):
    return (fwhm / (2.0 * math.pi)) * area / ((omega - omega0) ** 2 + 0.25 * fwhm**2)


@dataclass
class LorentzianFit:
    """Least-squares Lorentzian plus the direct measurements it started from."""

    omega0: float
    area: float
    fwhm: float
    residual: float
    window: tuple
    direct_omega0: float
    direct_fwhm: float
    direct_area: float
    peak_value: float
    degraded: bool = False

    @property
    def g(self):
        return math.sqrt(self.area)

    @property
    def kappa(self):
        return self.fwhm

    @property
    def direct_g(self):
        return math.sqrt(self.direct_area)


def count_local_maxima(values) -> int:
    y = np.asarray(values, dtype=float)
    if len(y) < 3:
        return int(len(y) > 0)
    inner = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])
    return int(np.count_nonzero(inner)) + int(y[0] > y[1]) + int(y[-1] > y[-2])


def _half_max_crossings(x, y, i_max):
    """Linearly interpolated positions where y falls to half of y[i_max]."""
    half = 0.5 * y[i_max]
    left = np.nonzero(y[:i_max] < half)[0]
    right = np.nonzero(y[i_max:] < half)[0]
    if len(left) == 0 or len(right) == 0:
        raise FitError("peak does not fall to half maximum inside the window")
    i0 = left[-1]
    j1 = i_max + right[0]
    xl = x[i0] + (half - y[i0]) * (x[i0 + 1] - x[i0]) / (y[i0 + 1] - y[i0])
    xr = x[j1 - 1] + (half - y[j1 - 1]) * (x[j1] - x[j1 - 1]) / (y[j1] - y[j1 - 1])
    return xl, xr


def fit_lorentzian(curve: FormFactorCurve, window=None) -> LorentzianFit:
    """Fit one peak of ``curve`` inside ``window`` = (u_lo, u_hi).

    The direct measurement (maximum, interpolated FWHM, trapezoid area on the
    peak-adaptive grid) seeds a Levenberg-Marquardt fit carried out in
    x = (u - u_max) / gamma_tilde and y = F / F_max.  Residuals are weighted
    by the square root of the local grid spacing, so the misfit approximates
    the continuous L2 norm and does not depend on how densely the grid
    samples the peak centre.  The reported residual is that weighted RMS.
    """
    u_all, f_all = curve.u, curve.values
    lo, hi = (u_all[0], u_all[-1]) if window is None else window
    sel = (u_all >= lo) & (u_all <= hi)
    u, y_raw = u_all[sel], f_all[sel]
    if len(u) < 5:
        raise FitError("fewer than five grid points inside the fit window")
    if count_local_maxima(y_raw) != 1:
        raise FitError(f"window ({lo:.8g}, {hi:.8g}) holds {count_local_maxima(y_raw)} local maxima, expected one")
    wc = curve.omega_c
    gt = curve.params.get("tau", 1e-3) ** 2 / (4.0 * math.pi)
    i_max = int(np.argmax(y_raw))
    peak = float(y_raw[i_max])
    if not peak > 0:
        raise FitError("peak value is not positive")
    x = (u - u[i_max]) / gt
    y = y_raw / peak
    xl, xr = _half_max_crossings(x, y, i_max)
    fw0 = xr - xl
    direct_area = float(np.trapezoid(y_raw, u * wc))

    weights = np.sqrt(np.gradient(x))

    def resid(p):
        return weights * (p[1] * (0.5 * p[2]) ** 2 / ((x - p[0]) ** 2 + (0.5 * p[2]) ** 2) - y)

    degraded = False
    try:
        res = least_squares(resid, [0.0, 1.0, fw0], method="lm", xtol=FIT_TOL, ftol=FIT_TOL,
                            gtol=FIT_TOL, max_nfev=FIT_MAX_NFEV)
        p = res.x
        ok = res.status > 0 and np.all(np.isfinite(p)) and p[1] > 0 and abs(p[2]) > 0
    except (ValueError, np.linalg.LinAlgError):
        ok = False
    if ok:
        fwhm = abs(p[2]) * gt * wc
        omega0 = (u[i_max] + p[0] * gt) * wc
        area = p[1] * peak * math.pi * fwhm / 2.0
        residual = float(math.sqrt(np.sum(res.fun**2) / np.sum(weights**2)))
        if not lo * wc <= omega0 <= hi * wc:
            ok = False
    if not ok:
        degraded = True
        fwhm = fw0 * gt * wc
        omega0 = u[i_max] * wc
        area = direct_area
        residual = float("nan")
    return LorentzianFit(
        omega0=float(omega0),
        area=float(area),
        fwhm=float(fwhm),
        residual=residual,
        window=(float(lo * wc), float(hi * wc)),
        direct_omega0=float(u[i_max] * wc),
        direct_fwhm=float(fw0 * gt * wc),
        direct_area=direct_area,
        peak_value=peak,
        degraded=degraded,
    )


def peak_window(n: int, grid):
    """Midpoints to the neighbouring odd branches, clipped to the grid."""
    grid = np.asarray(grid)
    return max(n - 1.0, float(grid[0])), min(n + 1.0, float(grid[-1]))


@dataclass
class CqedTriplet:
    g: float
    kappa: float
    gamma: float
    gamma_raw: float
    gamma_below_floor: bool
    gamma_eval_freq: float
    peak_u: float
    fit: LorentzianFit

    def summary(self) -> str:
        gam = "<=floor" if self.gamma_below_floor else f"{self.gamma / MHZ:.4g}"
        return f"(g, kappa, gamma) = 2π·({self.g / MHZ:.4g}, {self.kappa / MHZ:.4g}, {gam}) MHz"

    def to_dict(self):
        d = asdict(self)
        d["fit"]["window"] = list(self.fit.window)
        d["gamma_floor_rad_s"] = GAMMA_FLOOR
        return d


def target_peak(profile, N: int) -> float:
    """Reduced frequency of the peak a triplet refers to."""
    if isinstance(profile, OptimalProfile):
        return profile.v
    odd = list(kernels.odd_branches(N))
    return float(odd[-1])


def extract_triplet(setup: PhysicalSetup, profile, N=None, gamma_eval_freq=None, peak=None,
                    threads: int = 1) -> CqedTriplet:
    """(g, kappa) from the Lorentzian fit of one peak, gamma from F_T - F_C.

    Parameters
    ----------
    peak : int, optional
        Odd branch whose peak is fitted (Hermite-Gaussian only); defaults to
        the highest odd branch <= N.
    gamma_eval_freq : float, optional
        Frequency [rad/s] where gamma is evaluated.  Defaults to the profile
        centre f for the optimal profile and 0.99 times the peak frequency for
        Hermite-Gaussian beams.
    """
    if isinstance(profile, OptimalProfile):
        n_max = profile.n_branches if N is None else N
        center = profile.v
        if peak is not None:
            raise ConfigError("the optimal profile has a single peak at f")
    elif isinstance(profile, HermiteGaussProfile):
        n_max = setup.n_wavelengths if N is None else N
        center = target_peak(profile, n_max) if peak is None else float(peak)
        if int(center) % 2 == 0 or not 1 <= center <= n_max:
            raise ConfigError(f"peak must be an odd branch <= N, got {peak!r}")
    else:
        raise ConfigError(f"unsupported profile type {type(profile).__name__}")
    grid = peak_grid(center, setup.gamma_tilde)
    curve = build_curve(setup, "cavity", n_max, profile, grid=grid, threads=threads)
    fit = fit_lorentzian(curve, peak_window(int(round(center)), grid) if isinstance(profile, HermiteGaussProfile) else None)
    if gamma_eval_freq is None:
        gamma_eval_freq = profile.f if isinstance(profile, OptimalProfile) else GAMMA_DETUNING * center * setup.omega_c
    raw = float(noncavity_ff(setup, gamma_eval_freq, profile, n_max))
    rep = gamma_report(raw)
    if not (math.isfinite(fit.area) and math.isfinite(fit.fwhm)):
        raise NumericalError("non-finite fit parameters")
    return CqedTriplet(
        g=fit.g,
        kappa=fit.kappa,
        gamma=rep.value,
        gamma_raw=raw,
        gamma_below_floor=rep.below_floor,
        gamma_eval_freq=float(gamma_eval_freq),
        peak_u=center,
        fit=fit,
    )


# -- sweeps ------------------------------------------------------------------------

@dataclass
class SweepRow:
    value: float
    g: float
    kappa: float
    gamma: float
    residual: float
    ok: bool = True
    error: str = ""
    gamma_below_floor: bool = False


@dataclass
class SweepResult:
    axis: str
    rows: list
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = [r.value for r in self.rows]
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("swept values must be strictly increasing")

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    @property
    def success_fraction(self):
        return sum(r.ok for r in self.rows) / len(self.rows) if self.rows else 0.0

    def crossing_value(self):
        """First swept value where kappa drops below g, or None."""
        for r in self.rows:
            if r.ok and r.kappa < r.g:
                return r.value
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sweep_value", "g_rad_s", "kappa_rad_s", "gamma_rad_s", "residual"])
        for r in self.rows:
            w.writerow([f"{r.value:.11e}", f"{r.g:.11e}", f"{r.kappa:.11e}", f"{r.gamma:.11e}", f"{r.residual:.11e}"])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"axis": self.axis, "params": self.params, "crossing": self.crossing_value(),
               "rows": [asdict(r) for r in self.rows]}
        return json.dumps(doc, indent=1, sort_keys=True, allow_nan=True)


def _row(value, fn):
    try:
        t = fn()
    except (FitError, NumericalError, ConfigError) as exc:
        nan = float("nan")
        return SweepRow(value, nan, nan, nan, nan, ok=False, error=str(exc))
    return SweepRow(value, t.g, t.kappa, t.gamma, t.fit.residual, gamma_below_floor=t.gamma_below_floor)


def _map(fn, items, threads):
    if threads is None or threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def sweep_N(setup: PhysicalSetup, N_list, threads: int = 1) -> SweepResult:
    """Optimal-profile triplets with f = omega_a = N omega_c for each odd N."""
    N_list = [int(n) for n in N_list]
    if not N_list:
        raise ConfigError("empty N list")
    for n in N_list:
        if n % 2 == 0 or not 1 <= n <= 100:
            raise ConfigError(f"N must be odd and within [1, 100], got {n}")

    def one(n):
        s = setup.with_n(n)
        return _row(n, lambda: extract_triplet(s, OptimalProfile(s, s.omega_a, n)))

    rows = _map(one, N_list, threads)
    return SweepResult("N", rows, {"profile": "optimal", "tau": setup.tau})


def sweep_w(setup: PhysicalSetup, w_list, N=None, threads: int = 1) -> SweepResult:
    """Hermite-Gaussian triplets versus waist for the peak at the top odd branch."""
    n_max = setup.n_wavelengths if N is None else int(N)
    w_list = [float(w) for w in w_list]
    if not w_list:
        raise ConfigError("empty waist list")
    if any(w <= 0 for w in w_list):
        raise ConfigError("waists must be positive")
    s = setup if n_max == setup.n_wavelengths else setup.with_n(n_max)

    def one(w):
        return _row(w, lambda: extract_triplet(s, HermiteGaussProfile(w, s), n_max,
                                               gamma_eval_freq=GAMMA_DETUNING * s.omega_a))

    rows = _map(one, w_list, threads)
    return SweepResult("waist_m", rows, {"profile": "hermite-gauss", "N": n_max, "tau": setup.tau})
