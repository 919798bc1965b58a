"""Total, cavity and non-cavity form-factors.

Each form-factor has a closed-form evaluator and an independent quadrature
oracle.  Both work in reduced units (c = omega_c = 1) and return SI rates in
rad/s through the coupling scale kappa_D = D^2 omega_c^3 / (epsilon0 hbar c^3)
= pi^2 K::

    F_T(u) = kappa_D sum_alpha int d^2k |sum_n lambda A_n^*(u, k)|^2
    F_C(u) = kappa_D |sum_{n, alpha} int d^2k lambda phi_alpha A_n(u, k)|^2

The closed forms for F_T and for the optimal profile are resonant
approximations: the smooth factors of the integrand (coupling and density of
states s ds) are taken on the energy shell.  The quadrature oracles apply the
same rule with ``on_shell`` and integrate everything else numerically over
the in-plane wave number, so cross-branch products are kept.  The
Hermite-Gaussian form-factor needs no such approximation and is integrated
exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import kernels
from ._quad import angular_trapezoid, breakpoints, checked_quad
from .errors import ConfigError, NumericalError
from .modes import amplitude_reduced, coupling_reduced, parity_factor
from .profiles import HermiteGaussProfile, LateralProfile, OptimalProfile, _angular, _pole_cluster
from .setup import PhysicalSetup, prefactor_K
from .slab import POLARIZATIONS

KINDS = ("total", "cavity", "noncavity")
METHODS = ("closed", "quadrature")
AUDIT_POINTS = 5
AUDIT_RTOL = 1e-2
AUDIT_SEED = 20240917
# quadrature accuracy used by the audit; far below the audit threshold
AUDIT_QUAD_RTOL = 1e-6
PEAK_POINTS = 2001
PEAK_HALF_WIDTHS = 1e4
PEAK_DENSIFY = 9.1
# extra reduced frequency above the top branch where breakpoints stop
UV_MARGIN = 10.0


def _branches(setup: PhysicalSetup, N):
    n = setup.n_wavelengths if N is None else N
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ConfigError(f"branch count N must be an integer >= 1, got {n!r}")
    return int(n)


def _check_omega(omega):
    arr = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ConfigError("frequencies must be finite and positive")
    return arr


def _ret(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


# -- closed forms ---------------------------------------------------------------

def total_ff_closed(setup: PhysicalSetup, omega, N=None):
    """K sum_{odd n <= N} (n^2 + u^2)(1/2 + arctan((4 pi / tau^2)(u - n)) / pi)."""
    n = _branches(setup, N)
    u = setup.to_u(_check_omega(omega))
    return _ret(prefactor_K(setup) * kernels.ft_reduced(u, n, setup.tau))


def cavity_ff_optimal_closed(setup: PhysicalSetup, omega, f: float, N=None):
    """K (tau / 2 pi)^4 |F_C(u, v)|^2 / F_T(v) for the optimal profile centred at f."""
    n = _branches(setup, N)
    if not f >= setup.omega_c * (1.0 - 1e-12):
        raise ConfigError("the optimal profile centre f must lie at or above omega_c")
    u = setup.to_u(_check_omega(omega))
    v = setup.to_u(f)
    tau = setup.tau
    amp = kernels.fc_opt_reduced(u, v, n, tau)
    val = prefactor_K(setup) * (tau / (2.0 * math.pi)) ** 4 * np.abs(amp) ** 2 / kernels.ft_reduced(v, n, tau)
    return _ret(val)


def cavity_ff_hg(setup: PhysicalSetup, omega, w: float, N=None):
    """K (tau^2 v^4 / (4 pi^2)) |F_bullet(u, v)|^2 with v = w omega_c / c.

    The branch integrals use pole subtraction at s = u (see
    :func:`planarcqed.kernels.hg_branch`).
    """
    n = _branches(setup, N)
    if not w > 0:
        raise ConfigError(f"beam waist must be positive, got {w!r}")
    u = np.atleast_1d(setup.to_u(_check_omega(omega)))
    v = setup.waist_to_v(w)
    tau = setup.tau
    amp = np.array([kernels.fc_hg_bullet(x, v, n, tau) for x in u])
    val = prefactor_K(setup) * tau**2 * v**4 / (4.0 * math.pi**2) * np.abs(amp) ** 2
    return _ret(val.reshape(np.shape(omega)))


def cavity_ff_closed(setup: PhysicalSetup, omega, profile: LateralProfile, N=None):
    """Dispatch to the closed form that matches ``profile``."""
    if isinstance(profile, OptimalProfile):
        return cavity_ff_optimal_closed(setup, omega, profile.f, N if N is not None else profile.n_branches)
    if isinstance(profile, HermiteGaussProfile):
        return cavity_ff_hg(setup, omega, profile.w, N)
    raise ConfigError(f"no closed form for profile {type(profile).__name__}")


def _gamma_optimal_extended(setup: PhysicalSetup, u, v, n_max, dps=40):
    """F_T(u) - F_C(u) for the optimal profile in extended precision.

    At u = v the two terms agree to all digits in exact arithmetic, so double
    precision only returns rounding noise ~1e-16 K.
    """
    with mpmath.workdps(dps):
        tau = mpmath.mpf(setup.tau)
        pi = mpmath.pi
        scale = 4 * pi / tau**2
        vv = mpmath.mpf(v)

        def ft(x):
            return sum((k * k + x * x) * (mpmath.mpf(1) / 2 + mpmath.atan(scale * (x - k)) / pi)
                       for k in kernels.odd_branches(n_max))

        ftv = ft(vv)
        out = []
        for x in np.atleast_1d(u):
            x = mpmath.mpf(float(x))
            dd = 2 * pi * (vv - x) + 1j * tau**2
            amp = mpmath.mpc(0)
            for k in kernels.odd_branches(n_max):
                arg = 4 * pi * (k - (x + vv) / 2) / dd
                amp += (k * k + vv * vv) * (2j * pi**2 + 4 * pi * mpmath.atanh(arg)) / dd
            fc = (tau / (2 * pi)) ** 4 * abs(amp) ** 2 / ftv
            out.append(float(ft(x) - fc))
    return np.array(out)


def noncavity_ff(setup: PhysicalSetup, omega, profile: LateralProfile, N=None):
    """gamma(omega) = F_T(omega) - F_C(omega) in rad/s, unclamped.

    Small negative values signal quadrature noise; :func:`gamma_report` flags
    them instead of clipping.
    """
    n = _branches(setup, N if N is not None else getattr(profile, "n_branches", None))
    omega = _check_omega(omega)
    if isinstance(profile, OptimalProfile):
        red = _gamma_optimal_extended(setup, setup.to_u(omega), profile.v, n)
        return _ret(prefactor_K(setup) * red.reshape(np.shape(omega)))
    return _ret(np.asarray(total_ff_closed(setup, omega, n)) - np.asarray(cavity_ff_closed(setup, omega, profile, n)))


@dataclass(frozen=True)
class GammaReport:
    value: float
    raw: float
    below_floor: bool
    negative: bool

    def text(self, unit_scale=1.0, fmt="{:.3g}"):
        if self.below_floor:
            return "<=floor"
        return fmt.format(self.value * unit_scale)


GAMMA_FLOOR = 1e-10


def gamma_report(raw: float, floor: float = GAMMA_FLOOR) -> GammaReport:
    """Report gamma honestly: flag negatives, mark values under the floor."""
    negative = raw < 0
    below = abs(raw) < floor
    return GammaReport(value=max(raw, 0.0), raw=raw, below_floor=below, negative=negative and not below)


# -- quadrature oracles ---------------------------------------------------------

def _angular_weights(n_theta=16):
    theta, wts = angular_trapezoid(n_theta)
    return {a: float(np.sum(wts * _angular(a, theta) ** 2)) for a in POLARIZATIONS}


def _base_coupling(alpha, n, s):
    # coupling without its angular factor
    return coupling_reduced(alpha, n, s, 0.0 if alpha == "par" else 0.5 * math.pi)


def _radial_points(u, n_max, gt, k_max, extra=()):
    clusters = list(extra)
    for n in kernels.odd_branches(n_max):
        clusters.extend(_pole_cluster(u, n, gt))
    return breakpoints(0.0, k_max, clusters)


def _s_points(n, centers, gt, s_top):
    """Breakpoints on [n, s_top] clustered at each pole centre and at the branch bottom."""
    clusters = [(c, gt) for c in centers if n < c < s_top]
    clusters.append((n, gt))
    return breakpoints(float(n), s_top, clusters)


def total_ff_quadrature(setup: PhysicalSetup, omega: float, N=None, cross_terms: bool = False,
                        rtol: float = 1e-9) -> float:
    """Direct quadrature of F_T with coupling and density of states on shell at s = u.

    By default each branch is integrated separately over s = omega_nk / omega_c
    with breakpoints clustered at the pole, and the angular integrals are done
    numerically.  Even branches stay in the sum and drop out through the
    coupling parity.  ``cross_terms=True`` integrates the full squared sum over
    the in-plane wave number instead, keeping products of different branches.
    """
    n_max = _branches(setup, N)
    u = float(setup.to_u(_check_omega(omega)))
    tau, gt = setup.tau, setup.gamma_tilde
    ang = _angular_weights()
    if cross_terms:
        return setup.coupling_scale * _total_cross(u, n_max, tau, gt, ang, rtol)
    total = 0.0
    for n in range(1, n_max + 1):
        if not parity_factor(n):
            continue
        weight = sum(ang[a] * abs(_base_coupling(a, n, u)) ** 2 for a in POLARIZATIONS)
        # s ds -> u ds on shell
        f = lambda s: u * abs(amplitude_reduced(u, s, tau)) ** 2
        pts = _s_points(n, [u], gt, max(n, u) + UV_MARGIN)
        val, _ = checked_quad(f, np.append(pts, np.inf), rtol=1e-8, what="F_T quadrature",
                              epsrel=rtol, complex_func=False)
        total += weight * val
    return setup.coupling_scale * total


def _total_cross(u, n_max, tau, gt, ang, rtol):
    branches = [n for n in range(1, n_max + 1) if parity_factor(n)]
    weights = {a: [_base_coupling(a, n, u) for n in branches] for a in POLARIZATIONS}

    def integrand(kh):
        total = 0.0
        for a in POLARIZATIONS:
            acc = 0.0j
            for n, lam in zip(branches, weights[a]):
                s = math.sqrt(n * n + kh * kh)
                acc += lam * np.conj(amplitude_reduced(u, s, tau)) * math.sqrt(u / s)
            total += ang[a] * abs(acc) ** 2
        return total * kh

    pts = _radial_points(u, n_max, gt, max(n_max, u) + UV_MARGIN)
    val, _ = checked_quad(integrand, np.append(pts, np.inf), rtol=1e-7, what="F_T quadrature",
                          epsrel=rtol, complex_func=False)
    return val


def cavity_ff_quadrature(setup: PhysicalSetup, omega: float, profile: LateralProfile, N=None,
                         cross_terms: bool = False, rtol: float = 1e-9) -> float:
    """Direct quadrature of F_C for either profile family.

    Hermite-Gaussian beams: exact couplings and amplitudes, integrated over the
    in-plane wave number (the Gaussian makes the integral converge).

    Optimal profile: coupling and density of states on shell at the profile
    centre, the resonant approximation behind its closed form.  By default
    branch n of the coupling is paired with branch n of the profile and
    integrated over s; ``cross_terms=True`` integrates the full double sum over
    the in-plane wave number.
    """
    u = float(setup.to_u(_check_omega(omega)))
    tau, gt = setup.tau, setup.gamma_tilde
    ang = _angular_weights()
    if isinstance(profile, HermiteGaussProfile):
        n_max = _branches(setup, N)
        return setup.coupling_scale * abs(_hg_amplitude(profile, u, n_max, tau, gt, ang, rtol)) ** 2
    if not isinstance(profile, OptimalProfile):
        raise ConfigError(f"unsupported profile type {type(profile).__name__}")
    n_max = _branches(setup, N if N is not None else profile.n_branches)
    s0 = profile.v
    branches = list(kernels.odd_branches(n_max))
    if cross_terms:
        amp = _optimal_cross(profile, u, branches, tau, gt, ang, rtol)
        return setup.coupling_scale * abs(amp) ** 2
    amp = 0.0j
    for n in branches:
        lam = {a: _base_coupling(a, n, s0) for a in POLARIZATIONS}

        def f(s, n=n, lam=lam):
            kh = math.sqrt(max(s * s - n * n, 0.0))
            acc = sum(ang[a] * lam[a] * complex(profile.branch_radial(a, n, kh)) for a in POLARIZATIONS)
            return s0 * acc * amplitude_reduced(u, s, tau)

        pts = _s_points(n, [u, s0], gt, max(n, u, s0) + UV_MARGIN)
        val, _ = checked_quad(f, np.append(pts, np.inf), rtol=max(1e-8, 10 * rtol), what="F_C quadrature",
                              epsrel=rtol)
        amp += val
    return setup.coupling_scale * abs(amp) ** 2


def _hg_amplitude(profile, u, n_max, tau, gt, ang, rtol):
    branches = list(kernels.odd_branches(n_max))

    def integrand(kh):
        acc = 0.0j
        for a in POLARIZATIONS:
            radial = complex(profile.radial_reduced(a, kh))
            part = 0.0j
            for n in branches:
                s = math.sqrt(n * n + kh * kh)
                part += _base_coupling(a, n, s) * amplitude_reduced(u, s, tau)
            acc += ang[a] * radial * part
        return acc * kh

    v = profile.v
    pts = _radial_points(u, n_max, gt, 1.2 * kernels.HG_XMAX / v, [(math.sqrt(1.5) / v, 0.5 / v)])
    val, _ = checked_quad(integrand, pts, rtol=1e-7, what="F_C quadrature", epsrel=rtol)
    return val


def _optimal_cross(profile, u, branches, tau, gt, ang, rtol):
    s0 = profile.v
    lam = {a: {n: _base_coupling(a, n, s0) for n in branches} for a in POLARIZATIONS}

    def integrand(kh):
        acc = 0.0j
        for a in POLARIZATIONS:
            radial = complex(profile.radial_reduced(a, kh))
            part = 0.0j
            for n in branches:
                s = math.sqrt(n * n + kh * kh)
                part += lam[a][n] * amplitude_reduced(u, s, tau) * s0 / s
            acc += ang[a] * radial * part
        return acc * kh

    k_top = max(branches[-1], u, s0) + UV_MARGIN
    pts = _radial_points(u, branches[-1], gt, k_top, profile.pole_clusters())
    val, _ = checked_quad(integrand, np.append(pts, np.inf), rtol=1e-7, what="F_C quadrature", epsrel=rtol)
    return val


# -- curves -----------------------------------------------------------------------

def peak_grid(center: float, gamma_tilde: float, n_points: int = PEAK_POINTS,
              half_widths: float = PEAK_HALF_WIDTHS, densify: float = PEAK_DENSIFY):
    """Symmetric grid of ``n_points`` over +/- half_widths * gamma_tilde, dense at the centre."""
    t = np.linspace(-1.0, 1.0, n_points)
    return center + half_widths * gamma_tilde * np.sinh(densify * t) / math.sinh(densify)


def curve_grid(setup: PhysicalSetup, N=None, centers=None, u_lo: float = 0.5, u_hi=None,
               n_coarse: int = 400):
    """Coarse uniform grid in u plus a peak grid at each odd branch and centre."""
    n_max = _branches(setup, N)
    u_hi = n_max + 0.5 if u_hi is None else u_hi
    if not 0 < u_lo < u_hi:
        raise ConfigError("grid bounds must satisfy 0 < u_lo < u_hi")
    gt = setup.gamma_tilde
    parts = [np.linspace(u_lo, u_hi, n_coarse)]
    cs = set(float(n) for n in kernels.odd_branches(n_max))
    cs.update(float(c) for c in (centers or ()))
    for c in sorted(cs):
        if u_lo < c < u_hi:
            g = peak_grid(c, gt)
            parts.append(g[(g > u_lo) & (g < u_hi)])
    return np.unique(np.concatenate(parts))


@dataclass
class FormFactorCurve:
    """Sampled form-factor on an increasing reduced-frequency grid."""

    u: np.ndarray
    values: np.ndarray
    kind: str
    method: str
    params: dict
    omega_c: float
    flags: list = field(default_factory=list)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.kind not in KINDS:
            raise ConfigError(f"unknown curve kind {self.kind!r}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown curve method {self.method!r}")
        if self.u.shape != self.values.shape or self.u.ndim != 1:
            raise ConfigError("grid and values must be 1-D arrays of equal length")
        if np.any(np.diff(self.u) <= 0):
            raise ConfigError("curve grid must be strictly increasing")

    @property
    def omega(self):
        return self.u * self.omega_c

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["u", "omega_rad_per_s", "value_rad_per_s"])
        for u, w, val in zip(self.u, self.omega, self.values):
            writer.writerow([f"{u:.11e}", f"{w:.11e}", f"{val:.11e}"])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "method": self.method,
            "params": self.params,
            "omega_c_rad_per_s": self.omega_c,
            "flags": self.flags,
            "u": [float(x) for x in self.u],
            "value_rad_per_s": [float(x) for x in self.values],
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_csv(cls, text: str, kind="total", method="closed", params=None):
        rows = list(csv.reader(io.StringIO(text)))[1:]
        arr = np.array(rows, dtype=float)
        omega_c = arr[0, 1] / arr[0, 0]
        return cls(arr[:, 0], arr[:, 2], kind, method, params or {}, omega_c)


def _pmap(fn, items, threads):
    if threads is None or threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def audit_optimal(setup, u, values, profile: OptimalProfile, N, n_points=AUDIT_POINTS, seed=AUDIT_SEED,
                  threads=1):
    """Compare closed-form values with quadrature at random grid points.

    Returns (ok, worst relative deviation, indices checked).
    """
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(u), size=min(n_points, len(u)), replace=False))
    quad = _pmap(lambda i: cavity_ff_quadrature(setup, u[i] * setup.omega_c, profile, N, rtol=AUDIT_QUAD_RTOL),
                 idx, threads)
    rel = [abs(values[i] - q) / max(abs(q), 1e-300) for i, q in zip(idx, quad)]
    worst = float(max(rel))
    return worst <= AUDIT_RTOL, worst, [int(i) for i in idx]


def build_curve(setup: PhysicalSetup, kind: str, N=None, profile: LateralProfile | None = None,
                grid=None, method: str = "closed", threads: int = 1, audit: bool = True) -> FormFactorCurve:
    """Evaluate a form-factor on a grid (reduced frequencies).

    Closed-form optimal curves are spot-audited against quadrature at
    :data:`AUDIT_POINTS` pseudo-random points; a failed audit recomputes the
    whole curve by quadrature and records a flag.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown form-factor kind {kind!r}")
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}")
    if kind != "total" and profile is None:
        raise ConfigError(f"kind {kind!r} needs a lateral profile")
    n_max = _branches(setup, N)
    if grid is None:
        centers = [profile.v] if isinstance(profile, OptimalProfile) else []
        grid = curve_grid(setup, n_max, centers)
    u = np.asarray(grid, dtype=float)
    omega = u * setup.omega_c
    params = {"N": n_max, "tau": setup.tau, "n_wavelengths": setup.n_wavelengths}
    if profile is not None:
        params.update(profile.descriptor())
    flags = []

    if method == "quadrature":
        if kind == "total":
            fn = lambda w: total_ff_quadrature(setup, w, n_max)
        elif kind == "cavity":
            fn = lambda w: cavity_ff_quadrature(setup, w, profile, n_max)
        else:
            fn = lambda w: total_ff_quadrature(setup, w, n_max) - cavity_ff_quadrature(setup, w, profile, n_max)
        values = np.array(_pmap(fn, omega, threads))
    elif kind == "total":
        values = np.asarray(total_ff_closed(setup, omega, n_max))
    elif isinstance(profile, HermiteGaussProfile):
        fc = np.array(_pmap(lambda w: cavity_ff_hg(setup, w, profile.w, n_max), omega, threads))
        values = fc if kind == "cavity" else np.asarray(total_ff_closed(setup, omega, n_max)) - fc
    elif isinstance(profile, OptimalProfile):
        fc = np.asarray(cavity_ff_optimal_closed(setup, omega, profile.f, n_max))
        if audit:
            ok, worst, idx = audit_optimal(setup, u, fc, profile, n_max, threads=threads)
            flags.append({"audit": "pass" if ok else "fallback", "worst_rel": worst, "indices": idx})
            if not ok:
                method = "quadrature"
                fc = np.array(_pmap(lambda w: cavity_ff_quadrature(setup, w, profile, n_max), omega, threads))
        if kind == "cavity":
            values = fc
        else:
            chunks = np.array_split(np.arange(len(u)), max(1, len(u) // 256))
            parts = _pmap(lambda ix: noncavity_ff(setup, omega[ix], profile, n_max), chunks, threads)
            values = np.concatenate(parts)
    else:
        raise ConfigError(f"unsupported profile type {type(profile).__name__}")

    if not np.all(np.isfinite(values)):
        raise NumericalError("non-finite form-factor values")
    if kind == "noncavity":
        neg = np.nonzero(values < 0)[0]
        if len(neg):
            flags.append({"negative_points": int(len(neg)), "min_value": float(values[neg].min())})
    return FormFactorCurve(u, values, kind, method, params, setup.omega_c, flags)
