import csv
import hashlib
import json
import math
import subprocess
import sys

import pytest

from wigner_phonon.cli import main


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def err_json(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_conductivity_table(tmp_path):
    assert main(["conductivity", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "conductivity.csv")
    assert [float(r["T"]) for r in rows] == [0.5, 1.0, 2.0]
    k = {float(r["T"]): float(r["k0"]) for r in rows}
    assert k[1.0] == pytest.approx(2 * math.pi ** 2 / 15, rel=1e-10)
    # k0 scales as T^3 (see the notes on the temperature exponent)
    assert k[2.0] / k[1.0] == pytest.approx(8.0, rel=1e-12)
    assert float(rows[0]["K_11"]) == pytest.approx(k[0.5] / 3)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "conductivity" and man["schema_version"] == 1
    entry = man["outputs"][0]
    digest = hashlib.sha256((tmp_path / entry["path"]).read_bytes()).hexdigest()
    assert entry["sha256"] == digest


def test_conductivity_output_is_deterministic(tmp_path):
    conf = write(tmp_path, "c.json", {"units": "nondimensional", "conductivity": {"temperatures": [0.3, 0.7]}})
    main(["conductivity", "--config", str(conf), "--out", str(tmp_path / "a")])
    main(["conductivity", "--config", str(conf), "--out", str(tmp_path / "b")])
    assert (tmp_path / "a/conductivity.csv").read_bytes() == (tmp_path / "b/conductivity.csv").read_bytes()
    ma = json.loads((tmp_path / "a/manifest.json").read_text())
    assert ma["config_digest"] == hashlib.sha256(conf.read_bytes()).hexdigest()


def test_einstein_conductivity_warns(tmp_path, caplog):
    conf = write(tmp_path, "e.json", {"units": "nondimensional",
                                      "branches": [{"dispersion": "einstein", "param": 1.0, "bz_volume": 1.0}]})
    assert main(["conductivity", "--config", str(conf), "--out", str(tmp_path)]) == 0
    assert all(float(r["k0"]) == 0.0 for r in read_csv(tmp_path / "conductivity.csv"))
    assert any("zero" in r.getMessage() for r in caplog.records)


def test_quantum_correction_in_two_dimensions_is_divergent(tmp_path, capsys):
    conf = write(tmp_path, "d2.json", {"units": "nondimensional",
                                       "branches": [{"dispersion": "debye", "param": 1.0, "dim": 2}],
                                       "conductivity": {"quantum_correction": True}})
    assert main(["conductivity", "--config", str(conf), "--out", str(tmp_path)]) == 2
    assert err_json(capsys)["type"] == "DivergentIntegral"


def test_missing_config_is_usage_error(tmp_path, capsys):
    missing = tmp_path / "missing.json"
    assert main(["simulate", "--config", str(missing), "--out", str(tmp_path)]) == 1
    assert str(missing) in err_json(capsys)["message"]
    assert main(["simulate", "--out", str(tmp_path)]) == 1


def test_bad_arguments_are_usage_errors(capsys):
    assert main(["frobnicate"]) == 1
    assert main(["verify", "--suite", "nope"]) == 1
    assert main(["integral", "--kind", "I1"]) == 1
    assert main(["verify", "--threads", "0"]) == 1


def test_invalid_config_reports_field(tmp_path, capsys):
    conf = write(tmp_path, "bad.json", {"units": "furlongs"})
    assert main(["conductivity", "--config", str(conf)]) == 1
    assert "units" in err_json(capsys)["message"]


def test_verify_suites(tmp_path, capsys):
    assert main(["verify", "--suite", "moyal", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["passed"] and report["schema_version"] == 1
    capsys.readouterr()
    assert main(["verify", "--suite", "heatflux", "--out", str(tmp_path)]) == 0
    names = [c["name"] for c in json.loads((tmp_path / "verify.json").read_text())["suites"][0]["checks"]]
    assert "I1(3) = pi^2" in names


def test_verify_tight_tolerance_fails(tmp_path):
    assert main(["verify", "--suite", "closure", "--tolerance", "1e-16", "--out", str(tmp_path)]) == 3
    report = json.loads((tmp_path / "verify.json").read_text())
    assert not report["passed"]
    assert any(not c["passed"] for c in report["suites"][0]["checks"])


def test_temperature_command(tmp_path, capsys):
    conf = write(tmp_path, "t.json", {
        "units": "nondimensional",
        "branches": [{"dispersion": "debye", "param": 1.0}, {"dispersion": "debye", "param": 1.0}],
        "temperature": {"branch_temperatures": [1.0, 2.0]}})
    assert main(["temperature", "--config", str(conf), "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "temperature.json").read_text())
    assert res["T_LE"] == pytest.approx((17 / 2) ** 0.25, rel=1e-12)


def test_integral_command(capsys):
    assert main(["integral", "--kind", "I2", "--order", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["value"] == pytest.approx(4 * math.pi ** 2, rel=1e-10)
    for d in ("1", "2"):
        assert main(["integral", "--kind", "I1", "--order", d]) == 2
        assert err_json(capsys)["error"] == "divergent_integral"


def test_tensors_command(tmp_path, capsys):
    assert main(["tensors", "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "tensors.json").read_text())
    assert res["branches"]["LA"]["U"][0][0][0][0] == pytest.approx(-1 / 30, rel=1e-12)
    conf = write(tmp_path, "d2.json", {"units": "nondimensional",
                                       "branches": [{"dispersion": "debye", "param": 1.0, "dim": 2}]})
    assert main(["tensors", "--config", str(conf), "--out", str(tmp_path)]) == 2
    assert err_json(capsys)["type"] == "DivergentIntegral"


def test_simulate_uniform_and_two_branch(tmp_path):
    uni = write(tmp_path, "u.json", {
        "units": "nondimensional",
        "simulation": {"length": 1.0, "n_cells": 16, "initial_T": "1.2", "t_end": 0.3}})
    assert main(["simulate", "--config", str(uni), "--out", str(tmp_path / "u")]) == 0
    rows = read_csv(tmp_path / "u/snapshot_0001.csv")
    assert len({r["W_LA"] for r in rows}) == 1 and len({r["T_LE"] for r in rows}) == 1

    two = write(tmp_path, "two.json", {
        "units": "nondimensional",
        "branches": [{"label": "LA", "dispersion": "debye", "param": 1.0, "tau_W": 0.1, "tau_Q": 0.1},
                     {"label": "TA", "dispersion": "debye", "param": 0.6, "tau_W": 0.1, "tau_Q": 0.1}],
        "simulation": {"length": 1.0, "n_cells": 16, "initial_T": "1.0", "branch_T": [1.0, 2.0],
                       "t_end": 3.0}})
    out = tmp_path / "two"
    assert main(["simulate", "--config", str(two), "--out", str(out), "--threads", "1"]) == 0
    a1, a2 = 1.0, 0.6 ** -3
    T_ref = ((a1 + a2 * 16) / (a1 + a2)) ** 0.25
    rows = read_csv(out / "snapshot_0001.csv")
    assert all(abs(float(r["T_LE"]) / T_ref - 1) <= 1e-8 for r in rows)
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["energy_total_relative_drift"] <= 1e-10
    man = json.loads((out / "manifest.json").read_text())
    assert {e["path"] for e in man["outputs"]} == {"snapshot_0000.csv", "snapshot_0001.csv", "diagnostics.json"}


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "wigner_phonon.cli", "integral", "--kind", "I1",
                           "--order", "2"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stderr)["error"] == "divergent_integral"
