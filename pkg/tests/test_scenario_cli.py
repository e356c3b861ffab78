import json
import math
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

from qthermo import cli
from qthermo.errors import SchemaError
from qthermo.scenario import parse_scenario, validate

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"

MINIMAL = """
[model]
kind = "tls"
omega0 = 1.0
baths = ["b"]

[[baths]]
id = "b"
kind = "harmonic"
temperature = 1.0

[run]
mode = "simulate"
t_end = 5.0
samples = 11
"""


def run(tmp_path, sub, name_or_text, *flags):
    if "\n" in name_or_text:
        path = tmp_path / "scenario.toml"
        path.write_text(name_or_text)
    else:
        path = SCENARIOS / name_or_text
    out = tmp_path / "out"
    code = cli.main([sub, str(path), "--out", str(out), *flags])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, report, out


class TestParse:
    def test_minimal_is_valid(self):
        scn = parse_scenario(MINIMAL)
        assert scn.bath_ids == ["b"]
        assert scn.model_bath_ids() == ["b"]
        assert len(scn.digest) == 64

    def test_undeclared_bath(self):
        with pytest.raises(SchemaError) as info:
            parse_scenario(MINIMAL.replace('baths = ["b"]', 'baths = ["ghost"]'))
        assert any("ghost" in e and e.startswith("model/baths/0") for e in info.value.errors)

    def test_negative_temperature_has_path(self):
        with pytest.raises(SchemaError) as info:
            parse_scenario(MINIMAL.replace("temperature = 1.0", "temperature = -1.0"))
        assert any(e.startswith("baths/0/temperature") for e in info.value.errors)

    def test_all_errors_reported(self):
        text = MINIMAL.replace("temperature = 1.0", "temperature = -1.0").replace(
            'mode = "simulate"', 'mode = "fly"').replace("omega0 = 1.0", "omega0 = 1.0\ncolour = 1")
        with pytest.raises(SchemaError) as info:
            parse_scenario(text)
        assert len(info.value.errors) >= 3

    def test_duplicate_ids_and_floor_order(self):
        raw = {"baths": [{"id": "a", "kind": "harmonic", "temperature": 1.0},
                         {"id": "a", "kind": "harmonic", "temperature": 2.0}],
               "run": {"mode": "cool", "T0": 0.1, "T_floor": 0.2}}
        errors = validate(raw)
        assert any("duplicate" in e for e in errors)
        assert any(e.startswith("run/T_floor") for e in errors)

    def test_bath_domain_error_surfaces(self):
        raw = {"baths": [{"id": "a", "kind": "harmonic", "temperature": 1.0, "kappa": -5.0}],
               "run": {"mode": "check"}}
        assert any(e.startswith("baths/0") for e in validate(raw))

    def test_work_bath_takes_no_temperature(self):
        raw = {"baths": [{"id": "w", "kind": "work", "temperature": 3.0}], "run": {}}
        assert validate(raw)

    def test_bad_toml(self):
        with pytest.raises(SchemaError):
            parse_scenario("[model\nkind=")

    @pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.toml")), ids=lambda p: p.stem)
    def test_shipped_scenarios_validate(self, path):
        parse_scenario(path.read_text())


class TestExitCodes:
    def test_schema_error_is_1(self, tmp_path):
        code, _, _ = run(tmp_path, "simulate", MINIMAL.replace("temperature = 1.0", "temperature = -1.0"))
        assert code == 1

    def test_mode_mismatch_is_1(self, tmp_path):
        assert run(tmp_path, "steady", MINIMAL)[0] == 1

    def test_bad_flag_value_is_1(self, tmp_path):
        assert run(tmp_path, "simulate", MINIMAL, "--tol", "0.5")[0] == 1

    def test_missing_file_is_1(self, tmp_path):
        assert cli.main(["simulate", str(tmp_path / "nope.toml")]) == 1

    def test_numerical_failure_is_2(self, tmp_path):
        text = MINIMAL.replace('kind = "tls"\nomega0 = 1.0', 'kind = "tls"\nomega0 = 500.0')
        report = cli.execute("simulate", _write(tmp_path, text), _args(tmp_path))
        assert report.exit_status == 2
        assert "MissingSpectralValue" in report.summary["errors"][0]

    def test_simulate(self, tmp_path):
        code, report, out = run(tmp_path, "simulate", "tls_thermalization.toml")
        assert code == 0
        assert {v["law"] for v in report["verdicts"]} == {"I", "II"}
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert lines[0].split(",")[:4] == ["t [time]", "E [energy]", "S_vn [k_B]", "S_E [k_B]"]
        assert len(lines) == 202

    def test_steady_tricycle(self, tmp_path):
        code, report, _ = run(tmp_path, "steady", "tricycle_engine.toml")
        assert code == 0
        assert report["verdicts"][0]["status"] == "PASS"
        assert report["summary"]["power_out"] > 0

    def test_steady_driven(self, tmp_path):
        code, report, _ = run(tmp_path, "steady", "driven_tls.toml")
        assert code == 0
        assert report["summary"]["power_out"] < 0

    def test_otto(self, tmp_path):
        code, report, out = run(tmp_path, "otto", "otto_refrigerator.toml")
        assert code == 0
        assert all(v["status"] == "PASS" for v in report["verdicts"])
        header = (out / "cycles.csv").read_text().splitlines()[0]
        assert header.startswith("cycle,Q_h [energy],Q_c [energy],W [energy],efficiency [1]")

    def test_cool_harmonic(self, tmp_path):
        code, report, _ = run(tmp_path, "cool", "cool_harmonic.toml")
        assert code == 0
        assert report["summary"]["exponents"]["zeta"] == pytest.approx(1.0, abs=0.1)

    def test_check_ohmic_is_3(self, tmp_path, capsys):
        code, report, _ = run(tmp_path, "check", "check_ohmic.toml")
        assert code == 3
        failed = [v for v in report["verdicts"] if v["status"] == "FAIL"]
        assert any(v["law"] == "ground-state" and v["inequality"] == "kappa > 2 - d" for v in failed)
        assert report["summary"]["thermoelectric_bound"] == pytest.approx(math.pi ** 2 / 6)
        assert "FAIL [ground-state]" in capsys.readouterr().err

    def test_non_kms_is_3(self, tmp_path):
        code, report, _ = run(tmp_path, "steady", "non_kms_wire.toml")
        assert code == 3
        v = [v for v in report["verdicts"] if v["status"] == "FAIL"][0]
        assert v["law"] == "II" and v["measured"] > 0 and "J_j/T_j" in v["inequality"]


def _write(tmp_path, text):
    p = tmp_path / "s.toml"
    p.write_text(text)
    return p


def _args(tmp_path, **kw):
    base = dict(out=str(tmp_path / "out"), tol=None, tmax=None, qmax=None, seed=0, verbose=False)
    base.update(kw)
    return SimpleNamespace(**base)


def test_outputs_are_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    text = MINIMAL.replace('mode = "simulate"', 'mode = "simulate"\ninitial_state = "random"')
    for d in (a, b):
        assert run(d, "simulate", text, "--seed", "7")[0] == 0
    assert (a / "out" / "trajectory.csv").read_bytes() == (b / "out" / "trajectory.csv").read_bytes()
    c = tmp_path / "c"
    c.mkdir()
    run(c, "simulate", text, "--seed", "8")
    assert (a / "out" / "trajectory.csv").read_bytes() != (c / "out" / "trajectory.csv").read_bytes()


def test_seventeen_significant_digits(tmp_path):
    _, _, out = run(tmp_path, "simulate", MINIMAL)
    row = (out / "trajectory.csv").read_text().splitlines()[5].split(",")
    assert float(row[1]) == float(repr(float(row[1])))
    assert any(len(x.replace("-", "").replace(".", "").split("e")[0]) >= 15 for x in row)


def test_cool_sweep_threads_deterministic(tmp_path, monkeypatch):
    text = """
[[baths]]
id = "c"
kind = "harmonic"
temperature = 0.1

[run]
mode = "cool"
sweep = {sweep}
"""
    text = text.replace("{sweep}", str([float(f"{t:.6g}") for t in np.geomspace(0.1, 1e-5, 41)]))
    run(tmp_path, "cool", text)
    serial = (tmp_path / "out" / "cooling.csv").read_bytes()
    monkeypatch.setenv("QTHERMO_THREADS", "3")
    code, report, _ = run(tmp_path, "cool", text)
    assert code == 0
    assert (tmp_path / "out" / "cooling.csv").read_bytes() == serial


def test_plot_script(tmp_path):
    text = MINIMAL + '\n[output]\nplot = true\n'
    _, _, out = run(tmp_path, "simulate", text)
    assert "plot 'trajectory.csv'" in (out / "trajectory.gp").read_text()
