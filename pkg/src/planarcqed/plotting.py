"""Static SVG figures rendered from already-written CSV files.

Rendering never recomputes physics: every plot reads the CSV that the CLI
just wrote, so the figure and the table cannot disagree.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

MHZ = 2.0 * np.pi * 1e6

# fixed salt and no timestamp keep the SVG bytes reproducible
plt.rcParams["svg.hashsalt"] = "planarcqed"
plt.rcParams["svg.fonttype"] = "path"


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float) if body else np.zeros((0, len(header)))
    return header, data


def _annotate(ax, params: dict | None):
    if not params:
        return
    text = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in sorted(params.items()))
    ax.text(0.01, 0.01, text, transform=ax.transAxes, fontsize=7, va="bottom", ha="left", color="0.3")


def _save(fig, svg_path):
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_curve_svg(csv_path, svg_path, title: str = "", params: dict | None = None):
    """Form-factor curve on a log ordinate versus u = omega / omega_c."""
    _, data = _read_csv(csv_path)
    u, val = data[:, 0], data[:, 2]
    keep = val > 0
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(u[keep], val[keep] / MHZ, lw=1.0, color="C0")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\omega/\omega_c$")
    ax.set_ylabel(r"form-factor / $2\pi$ MHz")
    ax.set_title(title)
    _annotate(ax, params)
    _save(fig, svg_path)
    return Path(svg_path)


def render_sweep_svg(csv_path, svg_path, axis: str = "N", title: str = "", params: dict | None = None):
    """g, kappa and gamma traces of a sweep in units of 2 pi MHz."""
    _, data = _read_csv(csv_path)
    x = data[:, 0] * (1e6 if axis == "waist_m" else 1.0)
    fig, ax = plt.subplots(figsize=(6, 4))
    for col, label, style in ((1, "g", "o-"), (2, r"$\kappa$", "s-"), (3, r"$\gamma$", "^-")):
        y = data[:, col] / MHZ
        ok = np.isfinite(y) & (y > 0)
        ax.plot(x[ok], y[ok], style, ms=3, lw=1.0, label=label)
    ax.set_yscale("log")
    ax.set_xlabel(r"waist $w$ [$\mu$m]" if axis == "waist_m" else "N")
    ax.set_ylabel(r"rate / $2\pi$ MHz")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _annotate(ax, params)
    _save(fig, svg_path)
    return Path(svg_path)


def render_profile_svg(csv_path, svg_path, title: str = ""):
    """Radial cut (theta = 0 for par, pi/2 for perp) of the profile modulus."""
    _, data = _read_csv(csv_path)
    k, th = data[:, 0], data[:, 1]
    fig, ax = plt.subplots(figsize=(6, 4))
    for col, target, label in ((2, 0.0, r"$|\phi_\parallel|$, $\theta=0$"), (3, np.pi / 2, r"$|\phi_\perp|$, $\theta=\pi/2$")):
        sel = np.isclose(th, target)
        ax.plot(k[sel], data[sel, col], lw=1.0, label=label)
    ax.set_xlabel(r"$k c/\omega_c$")
    ax.set_ylabel("modulus (reduced units)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, svg_path)
    return Path(svg_path)
