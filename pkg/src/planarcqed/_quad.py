"""Quadrature helpers shared by the profile and form-factor integrals.

Every integrand here carries quasi-mode poles of half-width ~1e-7 in reduced
units, so the breakpoints handed to the adaptive integrator cluster
geometrically around each pole.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate

from .errors import NumericalError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def geometric_points(center, width, lo, hi, ratio=3.0, count=36):
    """center +/- width * ratio**j for j in [-2, count), clipped to [lo, hi]."""
    off = width * ratio ** np.arange(-2, count)
    pts = np.concatenate(([center], center - off, center + off))
    return pts[(pts > lo) & (pts < hi)]


def breakpoints(lo, hi, clusters=(), uniform=8):
    """Sorted unique breakpoints on [lo, hi]; ``clusters`` holds (center, width)."""
    pts = [np.linspace(lo, hi, uniform + 1)]
    for center, width in clusters:
        if width > 0:
            pts.append(geometric_points(center, width, lo, hi))
    return np.unique(np.concatenate(pts))


def piecewise_quad(f, points, epsrel=1e-9, epsabs=0.0, limit=10000, complex_func=True):
    """Globally adaptive Gauss-Kronrod (21 point) over [points[0], points[-1]].

    Interior points are forced breakpoints; the error target applies to the
    whole integral, so tiny sub-intervals are not over-resolved.  An infinite
    upper end is integrated as a separate tail whose absolute tolerance is
    tied to the finite part.  Returns (value, abs_error_estimate).
    """
    points = np.asarray(points, dtype=float)
    tail_from = None
    if np.isinf(points[-1]):
        tail_from = points[-2]
        points = points[:-1]
    val, err = integrate.quad_vec(f, points[0], points[-1], epsabs=epsabs, epsrel=epsrel,
                                  points=points[1:-1], limit=limit, quadrature="gk21")
    if tail_from is not None:
        tol = max(epsabs, epsrel * abs(val))
        tv, te = integrate.quad_vec(f, tail_from, np.inf, epsabs=tol, epsrel=0.0, limit=limit)
        val = val + tv
        err = err + te
    return (complex(val) if complex_func else float(np.real(val))), float(err)


def checked_quad(f, points, rtol=1e-8, what="integral", **kw):
    """piecewise_quad that raises NumericalError when the error estimate is poor."""
    val, err = piecewise_quad(f, points, **kw)
    if not np.isfinite(val) or err > max(rtol * abs(val), 1e-300):
        raise NumericalError(f"{what} did not converge (estimate {err:.3g})", err)
    return val, err


def gauss_legendre(f, edges):
    """Composite 16-point Gauss-Legendre rule over the panels given by ``edges``."""
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return np.sum(f(x) * w)


def angular_trapezoid(m=16):
    """Nodes and weights for periodic integrals over [0, 2 pi); exact for low-order trig."""
    theta = 2.0 * np.pi * np.arange(m) / m
    return theta, np.full(m, 2.0 * np.pi / m)
