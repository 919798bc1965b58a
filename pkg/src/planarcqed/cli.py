"""Command-line front end: ``planarcqed <command> [options]``.

Commands write CSV/JSON (and optionally SVG) files into ``--out``; SVGs are
rendered from the CSV files just written.  Exit codes: 0 success, 1 selftest
failure, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError
from .setup import SETUP_KEYS, load_config, setup_from_values

EXIT_OK, EXIT_SELFTEST, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
FORMATS = ("csv", "json", "svg")
RUN_KEYS = {"run.out": str, "run.format": str, "run.threads": int}
CONFIG_KEYS = {**SETUP_KEYS, **RUN_KEYS}
MHZ = 2.0 * math.pi * 1e6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="flat key = value file (UTF-8)")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--format", help="comma list of csv,json,svg (default: csv,json)")
    p.add_argument("--threads", type=int, help="worker threads (default: 1)")
    p.add_argument("--tau", type=float, help="leaky-mirror parameter (overrides config)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="planarcqed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ff = sub.add_parser("formfactor", parents=[common], help="sample a form-factor curve")
    ff.add_argument("--kind", required=True, choices=["total", "cavity-optimal", "cavity-hg", "noncavity"])
    ff.add_argument("--n", type=int, help="resonator length in atomic wavelengths (N)")
    ff.add_argument("--waist-um", type=float, help="Hermite-Gaussian waist [um]")
    ff.add_argument("--f-over-omega-c", type=float, help="optimal-profile centre in units of omega_c (default N)")
    ff.add_argument("--profile", choices=["optimal", "hg"], help="profile for --kind noncavity")
    ff.add_argument("--method", choices=["closed", "quadrature"], default="closed")
    ff.add_argument("--u-min", type=float, default=0.5)
    ff.add_argument("--u-max", type=float)
    ff.add_argument("--coarse-points", type=int, default=400)

    tr = sub.add_parser("triplet", parents=[common], help="extract (g, kappa, gamma)")
    tr.add_argument("--profile", required=True, choices=["optimal", "hg"])
    tr.add_argument("--n", type=int)
    tr.add_argument("--waist-um", type=float)
    tr.add_argument("--peak", type=int, help="odd branch whose peak is fitted (hg)")
    tr.add_argument("--gamma-at", type=float, help="gamma evaluation frequency in units of omega_c")

    sw = sub.add_parser("sweep", parents=[common], help="triplets versus N or waist")
    sw.add_argument("--axis", required=True, choices=["n", "waist"])
    sw.add_argument("--odd", help="odd N range 'a..b' (axis n)")
    sw.add_argument("--n", type=int, help="N for the waist sweep")
    sw.add_argument("--from-um", type=float)
    sw.add_argument("--to-um", type=float)
    sw.add_argument("--points", type=int, default=16)

    pr = sub.add_parser("profile", parents=[common], help="dump |phi| on a polar grid")
    pr.add_argument("--profile", required=True, choices=["optimal", "hg"])
    pr.add_argument("--n", type=int)
    pr.add_argument("--waist-um", type=float)
    pr.add_argument("--f-over-omega-c", type=float)
    pr.add_argument("--k-max", type=float, help="largest reduced wave number k c / omega_c")
    pr.add_argument("--nk", type=int, default=64)
    pr.add_argument("--ntheta", type=int, default=36)

    st = sub.add_parser("selftest", parents=[common], help="run the invariant checks")
    st.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


# -- helpers -------------------------------------------------------------------------

class RunContext:
    """Resolved configuration: setup, output directory, formats, threads."""

    def __init__(self, args):
        values = load_config(args.config, CONFIG_KEYS) if args.config else {}
        if getattr(args, "n", None) is not None:
            values["cavity.n_wavelengths"] = args.n
        if args.tau is not None:
            values["cavity.tau"] = args.tau
        self.values = values
        self.out = Path(args.out or values.get("run.out", "out"))
        fmt = args.format or values.get("run.format", "csv,json")
        self.formats = [f.strip() for f in fmt.split(",") if f.strip()]
        bad = [f for f in self.formats if f not in FORMATS]
        if bad or not self.formats:
            raise ConfigError(f"unknown output format(s) {bad}; choose from {FORMATS}")
        self.threads = args.threads if args.threads is not None else values.get("run.threads", 1)
        if self.threads < 1:
            raise ConfigError("--threads must be >= 1")

    def setup(self):
        return setup_from_values(self.values)

    def write(self, name: str, text: str) -> Path:
        if Path(name).name != name:
            raise ConfigError(f"refusing to write outside the output directory: {name!r}")
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(text, encoding="utf-8", newline="")
        return path


def _waist(args):
    if args.waist_um is None:
        raise ConfigError("--waist-um is required for Hermite-Gaussian profiles")
    if not args.waist_um > 0:
        raise ConfigError("--waist-um must be positive")
    return args.waist_um * 1e-6


def _profile(kind, setup, args):
    from .profiles import HermiteGaussProfile, OptimalProfile

    if kind == "hg":
        return HermiteGaussProfile(_waist(args), setup)
    fu = getattr(args, "f_over_omega_c", None)
    f = setup.omega_a if fu is None else fu * setup.omega_c
    return OptimalProfile(setup, f, setup.n_wavelengths)


def _emit_curve(ctx, curve, stem, title):
    from .plotting import render_curve_svg

    written = []
    csv_path = None
    if "csv" in ctx.formats or "svg" in ctx.formats:
        csv_path = ctx.write(stem + ".csv", curve.to_csv())
        written.append(csv_path)
    if "json" in ctx.formats:
        written.append(ctx.write(stem + ".json", curve.to_json()))
    if "svg" in ctx.formats:
        svg = ctx.out / (stem + ".svg")
        render_curve_svg(csv_path, svg, title, curve.params)
        written.append(svg)
    return written


# -- commands ------------------------------------------------------------------------

def cmd_formfactor(args, ctx) -> int:
    from .formfactor import build_curve, curve_grid

    setup = ctx.setup()
    n = setup.n_wavelengths
    kind = args.kind
    if kind == "total":
        profile, ff_kind = None, "total"
    elif kind == "cavity-optimal":
        profile, ff_kind = _profile("optimal", setup, args), "cavity"
    elif kind == "cavity-hg":
        profile, ff_kind = _profile("hg", setup, args), "cavity"
    else:
        if args.profile is None:
            raise ConfigError("--kind noncavity needs --profile optimal|hg")
        profile, ff_kind = _profile(args.profile, setup, args), "noncavity"
    centers = [profile.v] if profile is not None and profile.kind == "optimal" else []
    grid = curve_grid(setup, n, centers, u_lo=args.u_min, u_hi=args.u_max, n_coarse=args.coarse_points)
    curve = build_curve(setup, ff_kind, n, profile, grid=grid, method=args.method, threads=ctx.threads)
    stem = f"formfactor_{kind}_N{n}"
    if profile is not None and profile.kind == "hermite-gauss":
        stem += f"_w{args.waist_um:g}um"
    for p in _emit_curve(ctx, curve, stem, f"{kind} form-factor, N={n}"):
        print(p)
    return EXIT_OK


def cmd_triplet(args, ctx) -> int:
    from .analysis import extract_triplet
    from .formfactor import FormFactorCurve

    setup = ctx.setup()
    profile = _profile(args.profile, setup, args)
    gamma_at = None if args.gamma_at is None else args.gamma_at * setup.omega_c
    if args.peak is not None and args.profile != "hg":
        raise ConfigError("--peak applies to Hermite-Gaussian profiles only")
    trip = extract_triplet(setup, profile, setup.n_wavelengths, gamma_at, args.peak, threads=ctx.threads)
    stem = f"triplet_{args.profile}_N{setup.n_wavelengths}"
    if args.profile == "hg":
        stem += f"_w{args.waist_um:g}um_peak{int(trip.peak_u)}"
    doc = trip.to_dict()
    doc["params"] = {"tau": setup.tau, "N": setup.n_wavelengths, **profile.descriptor()}
    text = json.dumps(doc, indent=1, sort_keys=True)
    print(trip.summary())
    print(text)
    if "json" in ctx.formats:
        ctx.write(stem + ".json", text + "\n")
    if "csv" in ctx.formats or "svg" in ctx.formats:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["g_rad_s", "kappa_rad_s", "gamma_rad_s", "gamma_eval_rad_s", "residual"])
        w.writerow([f"{x:.11e}" for x in (trip.g, trip.kappa, trip.gamma, trip.gamma_eval_freq, trip.fit.residual)])
        ctx.write(stem + ".csv", buf.getvalue())
    return EXIT_OK


def _odd_range(text):
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text or "")
    if not m:
        raise ConfigError("--odd expects a range 'a..b'")
    a, b = int(m.group(1)), int(m.group(2))
    vals = [n for n in range(a, b + 1) if n % 2 == 1]
    if not vals:
        raise ConfigError(f"empty odd range {text!r}")
    return vals


def cmd_sweep(args, ctx) -> int:
    from .analysis import sweep_N, sweep_w
    from .plotting import render_sweep_svg

    setup = ctx.setup()
    if args.axis == "n":
        result = sweep_N(setup, _odd_range(args.odd), threads=ctx.threads)
        stem = "sweep_N"
    else:
        if args.from_um is None or args.to_um is None:
            raise ConfigError("--from-um and --to-um are required for a waist sweep")
        if not (0 < args.from_um < args.to_um) or args.points < 2:
            raise ConfigError("empty waist range: need 0 < from < to and --points >= 2")
        w = np.geomspace(args.from_um, args.to_um, args.points) * 1e-6
        result = sweep_w(setup, w, setup.n_wavelengths, threads=ctx.threads)
        stem = f"sweep_waist_N{setup.n_wavelengths}"
    csv_path = ctx.write(stem + ".csv", result.to_csv())
    if "json" in ctx.formats:
        ctx.write(stem + ".json", result.to_json())
    if "svg" in ctx.formats:
        render_sweep_svg(csv_path, ctx.out / (stem + ".svg"), result.axis, stem, result.params)
    for r in result.rows:
        if not r.ok:
            print(f"warning: sweep point {r.value:g} failed: {r.error}", file=sys.stderr)
    print(csv_path)
    return EXIT_OK if result.success_fraction >= 0.9 else EXIT_NUMERIC


def cmd_profile(args, ctx) -> int:
    from .plotting import render_profile_svg
    from .profiles import polar_grid_table

    setup = ctx.setup()
    profile = _profile(args.profile, setup, args)
    if args.k_max is not None:
        k_max = args.k_max
    elif args.profile == "hg":
        k_max = 4.0 / profile.v
    else:
        k_max = 3.0 * math.sqrt(2.0 * setup.n_wavelengths * setup.gamma_tilde) + math.sqrt(max(profile.v**2 - 1.0, 0.0))
    if not k_max > 0 or args.nk < 2 or args.ntheta < 1:
        raise ConfigError("need --k-max > 0, --nk >= 2, --ntheta >= 1")
    table = polar_grid_table(profile, k_max, args.nk, args.ntheta)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k_reduced", "theta_rad", "abs_phi_par", "abs_phi_perp"])
    for row in table:
        w.writerow([f"{x:.11e}" for x in row])
    stem = f"profile_{args.profile}_N{setup.n_wavelengths}"
    path = ctx.write(stem + ".csv", buf.getvalue())
    if "json" in ctx.formats:
        meta = {**profile.descriptor(), "k_max_reduced": k_max, "nk": args.nk, "ntheta": args.ntheta,
                "frequency_distribution": "narrow-band, does not enter the form-factors"}
        ctx.write(stem + ".json", json.dumps(meta, indent=1, sort_keys=True))
    if "svg" in ctx.formats:
        render_profile_svg(path, ctx.out / (stem + ".svg"), stem)
    print(path)
    return EXIT_OK


def cmd_selftest(args, ctx) -> int:
    from .selftest import run_checks

    results = run_checks(ctx.setup(), inject_fault=args.inject_fault)
    width = max(len(r[0]) for r in results)
    for name, ok, detail in results:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    return EXIT_OK if all(r[1] for r in results) else EXIT_SELFTEST


COMMANDS = {
    "formfactor": cmd_formfactor,
    "triplet": cmd_triplet,
    "sweep": cmd_sweep,
    "profile": cmd_profile,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        ctx = RunContext(args)
        return COMMANDS[args.command](args, ctx)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        est = f" (error estimate {exc.error_estimate:.3g})" if exc.error_estimate is not None else ""
        print(f"numerical error: {exc}{est}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
