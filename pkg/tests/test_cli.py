import json
import shutil
import subprocess

import pytest

from planarcqed.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_formfactor_total_n19(tmp_path, capsys):
    code, out, _ = run(capsys, "formfactor", "--kind", "total", "--n", "19", "--out", str(tmp_path), "--format", "csv,json,svg")
    assert code == 0
    csv_text = (tmp_path / "formfactor_total_N19.csv").read_text()
    assert csv_text.startswith("u,omega_rad_per_s,value_rad_per_s\n")
    assert len(csv_text.splitlines()) > 1000
    assert (tmp_path / "formfactor_total_N19.svg").exists()
    assert json.loads((tmp_path / "formfactor_total_N19.json").read_text())["params"]["N"] == 19


def test_formfactor_hg_n5(tmp_path, capsys):
    code, _, _ = run(capsys, "formfactor", "--kind", "cavity-hg", "--n", "5", "--waist-um", "500", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "formfactor_cavity-hg_N5_w500um.csv").exists()


def test_formfactor_invalid_n(tmp_path, capsys):
    code, _, err = run(capsys, "formfactor", "--kind", "total", "--n", "0", "--out", str(tmp_path))
    assert code == 2 and "n_wavelengths" in err


def test_argparse_errors_exit_2(capsys):
    assert run(capsys, "formfactor", "--kind", "nonsense")[0] == 2
    assert run(capsys)[0] == 2


def test_hg_needs_waist(tmp_path, capsys):
    code, _, err = run(capsys, "formfactor", "--kind", "cavity-hg", "--out", str(tmp_path))
    assert code == 2 and "waist" in err


def test_leaky_violation(tmp_path, capsys):
    code, _, err = run(capsys, "formfactor", "--kind", "total", "--tau", "0.5", "--out", str(tmp_path))
    assert code == 2 and "tau" in err


def test_triplet_optimal(tmp_path, capsys):
    code, out, _ = run(capsys, "triplet", "--profile", "optimal", "--n", "1", "--out", str(tmp_path))
    assert code == 0
    first = out.splitlines()[0]
    assert first.startswith("(g, kappa, gamma) = 2π·(") and "<=floor" in first
    doc = json.loads((tmp_path / "triplet_optimal_N1.json").read_text())
    assert doc["gamma_below_floor"] is True


def test_triplet_hg_peak5(tmp_path, capsys):
    code, out, _ = run(capsys, "triplet", "--profile", "hg", "--n", "5", "--waist-um", "500", "--peak", "5",
                       "--out", str(tmp_path), "--format", "csv")
    assert code == 0
    assert (tmp_path / "triplet_hg_N5_w500um_peak5.csv").exists()
    assert not (tmp_path / "triplet_hg_N5_w500um_peak5.json").exists()


def test_sweep_empty_range(tmp_path, capsys):
    assert run(capsys, "sweep", "--axis", "n", "--odd", "4..4", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "sweep", "--axis", "n", "--odd", "x", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "sweep", "--axis", "waist", "--from-um", "5", "--to-um", "1", "--out", str(tmp_path))[0] == 2


def test_sweep_n_small(tmp_path, capsys):
    code, _, _ = run(capsys, "sweep", "--axis", "n", "--odd", "1..5", "--out", str(tmp_path), "--format", "csv,svg")
    assert code == 0
    rows = (tmp_path / "sweep_N.csv").read_text().splitlines()
    assert len(rows) == 4
    assert (tmp_path / "sweep_N.svg").exists()


def test_profile_dump(tmp_path, capsys):
    code, _, _ = run(capsys, "profile", "--profile", "hg", "--waist-um", "100", "--nk", "5", "--ntheta", "4",
                     "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "profile_hg_N1.csv").read_text().splitlines()
    assert lines[0] == "k_reduced,theta_rad,abs_phi_par,abs_phi_perp" and len(lines) == 21


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("cavity.n_wavelengths = 3\nrun.format = csv\n")
    code, _, _ = run(capsys, "formfactor", "--kind", "total", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0 and (tmp_path / "o" / "formfactor_total_N3.csv").exists()
    cfg.write_text("unknown.key = 1\n")
    assert run(capsys, "formfactor", "--kind", "total", "--config", str(cfg), "--out", str(tmp_path))[0] == 2


def test_bad_format(tmp_path, capsys):
    assert run(capsys, "formfactor", "--kind", "total", "--format", "xml", "--out", str(tmp_path))[0] == 2


def test_svg_reproducible(tmp_path, capsys):
    for d in ("a", "b"):
        run(capsys, "formfactor", "--kind", "total", "--n", "3", "--format", "svg", "--out", str(tmp_path / d))
    a = (tmp_path / "a" / "formfactor_total_N3.svg").read_bytes()
    b = (tmp_path / "b" / "formfactor_total_N3.svg").read_bytes()
    assert a == b


def test_selftest_passes(tmp_path, capsys):
    code, out, _ = run(capsys, "selftest", "--out", str(tmp_path))
    assert code == 0 and "FAIL" not in out


def test_selftest_detects_fault(tmp_path, capsys):
    code, out, _ = run(capsys, "selftest", "--inject-fault", "--out", str(tmp_path))
    assert code == 1 and "FAIL" in out


@pytest.mark.skipif(shutil.which("planarcqed") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["planarcqed", "formfactor", "--kind", "total", "--n", "0", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 2
