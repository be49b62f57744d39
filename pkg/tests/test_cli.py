import json
import subprocess
import sys

import numpy as np
import pytest

from rodtip import natural_units
from rodtip import semiclassical as sc
from rodtip.cli import main
from rodtip.config import build_config, load_file
from rodtip.errors import ConfigError
from rodtip.report import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------- tiptime

def test_tiptime_headline(capsys):
    code, out, _ = run(capsys, "tiptime", "--hbar", "0.01", "--sigma", "0.1")
    assert code == 0
    body = json.loads(out)
    assert body["t_tip_exact"] == pytest.approx(0.806, abs=5e-4)
    assert body["t_tip_peak_search"] == pytest.approx(body["t_tip_exact"], rel=1e-8)
    assert body["regime"] == "intermediate"
    assert body["config"]["hbar"] == 0.01


def test_tiptime_sigma_zero_is_domain_error(capsys):
    code, _, err = run(capsys, "tiptime", "--sigma", "0")
    assert code == 3
    assert "sigma" in err


def test_tiptime_hbar_zero_is_config_error(capsys):
    code, _, err = run(capsys, "tiptime", "--hbar", "0")
    assert code == 2
    assert "hbar" in err


def test_unknown_flag_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["tiptime", "--no-such-flag"])
    assert exc.value.code == 2


def test_tiptime_si_units(capsys, tmp_path):
    code, out, _ = run(capsys, "tiptime", "--units", "si", "--mass", "0.1", "--half-length", "0.05",
                       "--sigma", "0.01", "--write", "--out", str(tmp_path))
    assert code == 0
    body = json.loads(out)
    assert body["regime"] == "classical"
    assert body["config"]["hbar"] == 1.054571817e-34
    assert json.loads((tmp_path / "tiptime.json").read_text())["t_tip_exact"] == body["t_tip_exact"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rodtip", "tiptime", "--hbar", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["regime"] == "intermediate"


# ---------------------------------------------------------------- config

def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("units_mode: natural\nhbar: 0.5\nsigma: 0.2\ngrid: 256\n")
    code, out, _ = run(capsys, "tiptime", "--config", str(cfg), "--sigma", "0.1")
    assert code == 0
    body = json.loads(out)
    assert body["config"]["hbar"] == 0.5
    assert body["config"]["sigma"] == 0.1
    assert body["config"]["n_points"] == 256


def test_config_errors_aggregated(tmp_path):
    with pytest.raises(ConfigError) as exc:
        build_config({"hbar": -1, "sigma": "wide", "potential": "quartic", "colour": 3, "n_points": 10})
    problems = exc.value.problems
    assert len(problems) == 5
    text = str(exc.value)
    for word in ("hbar", "sigma", "potential", "colour", "n_points"):
        assert word in text


def test_config_si_requires_geometry():
    with pytest.raises(ConfigError, match="mass"):
        build_config({"units": "si"})
    with pytest.raises(ConfigError, match="natural units"):
        build_config({"mass": 2.0})


def test_config_defaults():
    cfg = build_config()
    assert cfg.hbar == 0.01 and cfg.sigma == 0.1 and cfg.n_points == 1024
    assert cfg.tolerance == 0.05 and cfg.validity_threshold == 0.1
    assert cfg.engines == ("analytic", "numeric")


def test_config_file_problems(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("section:\n  hbar: 1\n")
    with pytest.raises(ConfigError, match="nested"):
        load_file(bad)
    code, _, err = run(capsys, "tiptime", "--config", str(tmp_path / "missing.yaml"))
    assert code == 2 and "cannot read" in err


# ---------------------------------------------------------------- evolve

def test_evolve_both_engines(tmp_path, capsys):
    code, _, _ = run(capsys, "evolve", "--hbar", "0.01", "--sigma", "0.1", "--grid", "512",
                     "--engine", "analytic", "--engine", "numeric", "--snapshots", "2", "--out", str(tmp_path))
    assert code == 0
    for name in ("snapshot_analytic_000.csv", "snapshot_numeric_002.csv", "evolve_summary.csv",
                 "density_vs_time.csv", "evolve.json", "snapshots.svg", "density_vs_time.svg"):
        assert (tmp_path / name).exists(), name
    rows = read_csv(tmp_path / "snapshot_numeric_002.csv")
    assert list(rows[0]) == ["theta", "re_psi", "im_psi", "density", "density_diff"]
    summary = read_csv(tmp_path / "evolve_summary.csv")
    assert float(summary[-1]["time"]) == pytest.approx(sc.tipping_time_exact(natural_units(0.01), 0.1))
    assert float(summary[-1]["diff_linf_rel"]) < 0.05
    assert (tmp_path / "snapshots.svg").read_text().startswith("<?xml")
    curves = json.loads((tmp_path / "evolve.json").read_text())
    assert all(curves["checks"].values())


def test_evolve_time_zero_is_initial_density(tmp_path, capsys):
    code, _, _ = run(capsys, "evolve", "--t", "0", "--engine", "both", "--grid", "256", "--out", str(tmp_path))
    assert code == 0
    for engine in ("analytic", "numeric"):
        rows = read_csv(tmp_path / f"snapshot_{engine}_000.csv")
        theta = np.array([float(r["theta"]) for r in rows])
        rho = np.array([float(r["density"]) for r in rows])
        ref = np.exp(-theta ** 2 / 0.01) / (np.sqrt(np.pi) * 0.1)
        assert np.allclose(rho, ref, rtol=1e-10)


def test_evolve_figure_curves(tmp_path, capsys):
    code, _, _ = run(capsys, "evolve", "--sigma", "0.3", "--engine", "analytic", "--grid", "256",
                     "--theta-points", "0,0.3,0.5,0.7", "--t-max", "4", "--out", str(tmp_path))
    assert code == 0
    body = json.loads((tmp_path / "evolve.json").read_text())
    assert body["checks"] == {"zero_curve_decreasing": True, "off_axis_unimodal": True, "peaks_ordered": True}
    lines = (tmp_path / "density_vs_time.csv").read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert "P_theta_3: theta = 0.69999999999999996" in lines[4]


# ---------------------------------------------------------------- determinism

def _snapshot_dir(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


def test_outputs_byte_identical(tmp_path, capsys):
    out = tmp_path / "run"
    argv = ["evolve", "--grid", "256", "--engine", "both", "--snapshots", "2", "--out", str(out)]
    assert main(argv) == 0
    first = _snapshot_dir(out)
    assert main(argv) == 0
    assert _snapshot_dir(out) == first
    argv = ["sweep", "--variable", "sigma", "--range", "0.01", "0.1", "10", "--out", str(out)]
    assert main(argv) == 0
    first = _snapshot_dir(out)
    assert main(argv) == 0
    assert _snapshot_dir(out) == first
    capsys.readouterr()


def test_every_file_embeds_config(tmp_path, capsys):
    run(capsys, "evolve", "--grid", "256", "--engine", "analytic", "--out", str(tmp_path))
    run(capsys, "sweep", "--variable", "omega", "--values", "0.5,1,2", "--out", str(tmp_path))
    for path in tmp_path.iterdir():
        if path.suffix == ".csv":
            head = path.read_text().splitlines()[0]
            assert head.startswith("# config: ")
            assert json.loads(head[len("# config: "):])["hbar"] == 0.01
        elif path.suffix == ".json":
            assert json.loads(path.read_text())["config"]["sigma"] == 0.1


def test_seventeen_digit_floats(tmp_path, capsys):
    run(capsys, "sweep", "--variable", "sigma", "--values", "0.1", "--out", str(tmp_path))
    row = read_csv(tmp_path / "sweep.csv")[0]
    t = sc.tipping_time_exact(natural_units(0.01), 0.1)
    assert row["t_tip_exact"] == f"{t:.17g}"
    assert float(row["t_tip_exact"]) == t


# ---------------------------------------------------------------- validate / sweep

def test_validate_passes(tmp_path, capsys):
    code, out, _ = run(capsys, "validate", "--out", str(tmp_path))
    assert code == 0, out
    assert "FAIL" not in out
    assert json.loads((tmp_path / "validate.json").read_text())["passed"] is True


def test_validate_failure_exit_one(tmp_path, capsys):
    code, out, _ = run(capsys, "validate", "--grid", "256", "--tolerance", "1e-6", "--out", str(tmp_path))
    assert code == 1
    assert "FAIL" in out and "validation FAILED" in out


def test_sweep_fit(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep", "--variable", "sigma", "--hbar", "1", "--range", "0.01", "0.1", "20",
                       "--log", "--out", str(tmp_path))
    assert code == 0
    fits = json.loads((tmp_path / "sweep.json").read_text())["fits"]
    assert fits["t_tip_exact"]["exponent"] == pytest.approx(2.0, abs=0.05)
    assert (tmp_path / "sweep.svg").exists()


def test_sweep_omega_monotone(tmp_path, capsys):
    code, _, _ = run(capsys, "sweep", "--variable", "omega", "--range", "0.1", "10", "100", "--log",
                     "--out", str(tmp_path))
    assert code == 0
    assert json.loads((tmp_path / "sweep.json").read_text())["monotone"]["t_tip_exact"] == "decreasing"


def test_sweep_bad_values_domain_error(tmp_path, capsys):
    code, _, err = run(capsys, "sweep", "--variable", "sigma", "--values", "0.1,0.05,0.2", "--out", str(tmp_path))
    assert code == 3 and "monotone" in err
    code, _, err = run(capsys, "sweep", "--variable", "sigma", "--values", "0.1,abc", "--out", str(tmp_path))
    assert code == 2
