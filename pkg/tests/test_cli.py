import csv
import subprocess
import sys

import numpy as np
import pytest

from ridg.cli import (CONVERGENCE_HEADER, ConfigError, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, RunConfig, main,
                      parse_config_text)
from ridg.mesh import estimate_order_from_counts


def read(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_parse_config():
    cfg = parse_config_text("# comment\nproblem = burgers1d\nmeshes = 39, 52\nnu=0.9  # trailing\n\nm_deg = 3\n")
    assert cfg == {"problem": "burgers1d", "meshes": (39, 52), "nu": 0.9, "m_deg": 3}
    with pytest.raises(ConfigError):
        parse_config_text("colour = red")
    with pytest.raises(ConfigError):
        parse_config_text("just words")
    with pytest.raises(ConfigError):
        parse_config_text("nu = fast")


def test_validation():
    with pytest.raises(ConfigError):
        RunConfig(meshes=(80, 40)).validate()
    with pytest.raises(ConfigError):
        RunConfig(nu=-1.0).validate()
    with pytest.raises(ConfigError):
        RunConfig(final_time=0.0).validate()
    with pytest.raises(ConfigError):
        RunConfig(problem="burgers1d", scheme="lidg").validate()
    with pytest.raises(ConfigError):
        RunConfig(problem="advection1d", scheme="rkdg").validate()


def test_converge_writes_table(tmp_path):
    out = tmp_path / "c.csv"
    code = main(["converge", "--problem", "advection1d", "--scheme", "ridg", "--mdeg", "3",
                 "--meshes", "40,80", "--nu", "0.9", "--out", str(out)])
    assert code == EXIT_OK
    text = out.read_text()
    assert text.splitlines()[0] == CONVERGENCE_HEADER
    rows = read(out)[1:]
    assert rows[0][4] == "" and rows[0][6] == ""
    l2 = [float(r[5]) for r in rows]
    assert float(rows[1][6]) == estimate_order_from_counts(l2, [40, 80])[1]
    assert float(rows[1][5]) == pytest.approx(3.6e-3, rel=0.1)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("problem = advection1d\nscheme = lidg\nm_deg = 1\nmeshes = 10\nnu = 0.2\nfinal_time = 0.1\n"
                   f"out = {tmp_path / 'a.csv'}\n")
    assert main(["converge", "--config", str(cfg)]) == EXIT_OK
    assert main(["converge", "--config", str(cfg), "--scheme", "ridg", "--nu", "0.9",
                 "--out", str(tmp_path / "b.csv")]) == EXIT_OK
    a, b = read(tmp_path / "a.csv"), read(tmp_path / "b.csv")
    assert int(a[1][1]) > int(b[1][1])


def test_config_errors_exit_2(tmp_path):
    assert main(["converge", "--meshes", "80,40"]) == EXIT_CONFIG
    assert main(["converge", "--problem", "nowhere"]) == EXIT_CONFIG
    assert main(["converge", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG
    assert main(["stability", "--scheme", "rkdg"]) == EXIT_CONFIG
    assert main(["stability", "--dim", "1", "--scan"]) == EXIT_CONFIG


def test_numerical_failure_exit_3(tmp_path):
    code = main(["converge", "--problem", "advection1d", "--scheme", "lidg", "--mdeg", "3", "--meshes", "20,40",
                 "--nu", "0.9", "--final-time", "20", "--out", str(tmp_path / "x.csv")])
    assert code == EXIT_NUMERICAL
    rows = read(tmp_path / "x.csv")
    assert rows[1][3] == "nan"
    assert main(["stability", "--scheme", "lidg", "--mdeg", "1", "--omega-resolution", "101",
                 "--epsilon", "1e9"]) == EXIT_NUMERICAL


def test_stability_command(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["stability", "--scheme", "lidg", "--mdeg", "0", "--dim", "1", "--out", str(out)]) == EXIT_OK
    assert float(read(out)[1][4]) == pytest.approx(1.0, abs=5e-3)
    assert "max_cfl=" in capsys.readouterr().out


def test_stability_scan(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["stability", "--scheme", "lidg", "--mdeg", "1", "--dim", "2", "--scan", "--scan-points", "5",
                 "--scan-max", "0.4", "--omega-resolution", "21", "--out", str(out)]) == EXIT_OK
    rows = read(out)
    assert rows[0] == ["nu_x", "nu_y", "f_plus_1"] and len(rows) == 26


def test_solve_constant_period(tmp_path, capsys):
    out = tmp_path / "sol.csv"
    assert main(["solve", "--problem", "advection1d", "--scheme", "ridg", "--mdeg", "3", "--meshes", "64",
                 "--nu", "0.5", "--final-time", "2.0", "--out", str(out)]) == EXIT_OK
    rows = read(out)
    assert rows[0] == ["i0", "c0", "c1", "c2", "c3"] and len(rows) == 65
    summary = capsys.readouterr().out
    fields = dict(kv.split("=") for kv in summary.split())
    assert abs(float(fields["mass_final"]) - float(fields["mass_initial"])) < 1e-12


def test_compare_same_scheme_ratio_one(tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--problem", "burgers1d", "--schemes", "ridg,ridg", "--mdeg", "2", "--meshes", "12",
                 "--out", str(out)]) == EXIT_OK
    row = read(out)[1]
    assert row[9:] == ["1.0", "1.0", "1.0"] and row[7] == "1.0"


def test_compare_ridg_rkdg_steps(tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--problem", "burgers1d", "--schemes", "ridg,rkdg", "--nus", "0.9,0.1", "--mdeg", "3",
                 "--meshes", "39", "--out", str(out)]) == EXIT_OK
    assert float(read(out)[1][7]) <= 0.2


def test_entry_point_module():
    r = subprocess.run([sys.executable, "-m", "ridg.cli", "stability", "--scheme", "ridg", "--mdeg", "0",
                        "--omega-resolution", "201"], capture_output=True, text=True)
    assert r.returncode == 0 and "max_cfl=1.00" in r.stdout
