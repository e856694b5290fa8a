import io
import json
import math

import numpy as np
import pytest

from weakmzi.cli import main
from weakmzi.scenario import COLUMNS, ConfigError, ScenarioConfig, SweepSpec, run_scenario, sweep, sweep_theta
from weakmzi.verify import parameter_grid, verify_identities

HALF = math.sqrt(0.5)


def cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def csv_rows(text):
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_run_unperturbed():
    row = run_scenario(ScenarioConfig.from_mapping({"r": HALF, "theta": 0.0}))
    assert row["P_D1"] == pytest.approx(0.25, abs=1e-12)
    assert row["P_E"] == pytest.approx(0, abs=1e-12)
    assert math.isnan(row["A_inferred"])


def test_run_three_box_weak_values():
    row = run_scenario(ScenarioConfig.from_mapping({"r": 1 / math.sqrt(3), "theta": 0.01}))
    assert row["A_C"] == pytest.approx(1.0, abs=1e-12)
    assert row["A_B"] == pytest.approx(-1.0, abs=1e-12)


def test_run_strong_coupling():
    row = run_scenario(ScenarioConfig.from_mapping({"r": HALF, "theta": math.pi, "order": "exact"}))
    assert row["P_D1"] == pytest.approx(0.125, abs=1e-12)
    assert row["P_E"] == pytest.approx(0.25, abs=1e-12)
    assert row["P_D1"] + row["P_D2"] + row["P_D3"] == pytest.approx(1, abs=1e-9)


def test_columns_follow_documented_order():
    cfg = ScenarioConfig.from_mapping({"r": 0.6, "outputs": "A_C,P_D1,order"})
    assert list(run_scenario(cfg)) == ["order", "P_D1", "A_C"]
    assert list(run_scenario(ScenarioConfig.from_mapping({"r": 0.6}))) == list(COLUMNS)


@pytest.mark.parametrize(
    "raw, field",
    [
        ({}, "r"),
        ({"r": 0.6, "t": 0.6}, "t"),
        ({"r": 1.5}, "r"),
        ({"r": 0.6, "eta": 2.0}, "tau"),
        ({"r": 0.6, "theta": 0.1, "eta": 1.0, "tau": 0.2}, "theta"),
        ({"r": 0.6, "position": "Q"}, "position"),
        ({"r": 0.6, "order": "second"}, "order"),
        ({"r": 0.6, "outputs": ["P_X"]}, "outputs"),
        ({"r": 0.6, "theta": 10.0}, "theta"),
        ({"r": 0.6, "colour": 1}, "colour"),
        ({"r": "abc"}, "r"),
    ],
)
def test_config_errors_name_the_field(raw, field):
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_mapping(raw)
    assert exc.value.field == field


def test_config_t_only_and_eta_tau():
    cfg = ScenarioConfig.from_mapping({"t": 0.8, "eta": 0.5, "tau": 0.2})
    assert cfg.r == pytest.approx(0.6)
    assert cfg.theta == pytest.approx(0.1)
    assert ScenarioConfig.from_mapping({"r": 0.6, "t": 0.8 + 1e-10}).t == pytest.approx(0.8, abs=1e-9)


def test_sweep_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec("theta", 0.1, 0.01, 5)
    with pytest.raises(ConfigError):
        SweepSpec("theta", 0.0, 0.1, 5, "log")
    with pytest.raises(ConfigError):
        SweepSpec("eta", 0.0, 0.1, 5)
    with pytest.raises(ConfigError):
        SweepSpec("theta", 0.0, 0.1, 0)


def test_sweep_difference_is_second_order():
    cfg = ScenarioConfig.from_mapping({"r": HALF})
    rows = sweep_theta(cfg, SweepSpec("theta", 1e-3, 1e-1, 3, "log"))
    d = [abs(row["dP_b"]) for row in rows]
    assert d[2] / d[1] == pytest.approx(100, rel=0.05)
    assert d[1] / d[0] == pytest.approx(100, rel=0.05)
    for row in rows:
        assert row["P_E_exact"] == pytest.approx((row["t"] ** 2 / 4) * (1 - math.cos(row["theta"])), abs=1e-12)


def test_single_point_sweep_matches_run():
    cfg = ScenarioConfig.from_mapping({"r": 0.6, "theta": 0.2})
    (row,) = sweep(cfg, SweepSpec("theta", 0.2, 0.2, 1))
    single = run_scenario(cfg)
    assert row["P_b_exact"] == single["P_b"]
    assert row["P_E_exact"] == single["P_E"]


def test_sweep_over_r():
    rows = sweep(ScenarioConfig.from_mapping({"r": 0.5, "theta": 0.1}), SweepSpec("r", 0.2, 0.9, 4))
    assert [round(r["r"], 12) for r in rows] == [0.2, round(0.2 + 0.7 / 3, 12), round(0.2 + 1.4 / 3, 12), 0.9]


def test_sweep_theta_bound():
    with pytest.raises(ConfigError):
        sweep(ScenarioConfig.from_mapping({"r": 0.6}), SweepSpec("theta", 0.1, 4.0, 3))


def test_cli_run_csv_is_deterministic():
    args = ("run", "--r", "0.6", "--theta", "0.3", "--order", "first")
    code, first = cli(*args)
    assert code == 0
    assert cli(*args)[1] == first
    (row,) = csv_rows(first)
    assert row["order"] == "first"
    assert list(row) == list(COLUMNS)
    assert row["r"] == "0.6"


def test_cli_run_json_and_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"r": 0.6, "theta": 0.3, "position": "C"}))
    code, text = cli("run", "--config", str(cfg), "--theta", "0.0", "--format", "json")
    assert code == 0
    data = json.loads(text)
    assert data["theta"] == 0
    assert data["A_inferred"] is None
    assert data["P_D1"] == pytest.approx(0.1296, abs=1e-12)


def test_cli_eta_tau():
    code, text = cli("run", "--r", "0.6", "--eta", "2", "--tau", "0.05", "--outputs", "theta")
    assert code == 0 and csv_rows(text)[0]["theta"] == "0.1"


def test_cli_config_error_exit_code(capsys):
    code, _ = cli("run", "--r", "0.6", "--t", "0.6")
    assert code == 1
    assert "t:" in capsys.readouterr().err


def test_cli_bad_config_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli("run", "--config", str(bad))[0] == 1


def test_cli_usage_error_exits_one():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--theta", "abc"])
    assert exc.value.code == 1


def test_cli_sweep():
    code, text = cli("sweep", "--r", "0.6", "--param", "theta", "--start", "0.001", "--stop", "0.1", "--points", "3", "--log")
    assert code == 0
    rows = csv_rows(text)
    assert [r["theta"] for r in rows] == ["0.001", "0.01", "0.1"]


def test_cli_weak_value():
    code, text = cli("weak-value", "--r", "0.6", "--position", "C", "E")
    (row,) = csv_rows(text)
    assert code == 0
    assert float(row["re"]) == pytest.approx(0.64 / 0.72, abs=1e-11)
    assert row["position"] == "C+E"
    assert cli("weak-value", "--r", "0.6", "--position", "E", "C")[0] == 1
    assert cli("weak-value", "--r", "0.0")[0] == 1


def test_cli_verify_negative_control():
    code, text = cli("verify", "--corrupt-bs2")
    assert code == 2
    lines = {line.split()[1]: line.split()[0] for line in text.splitlines() if line.startswith(("PASS", "FAIL"))}
    assert lines["pre-selected"] == "PASS"
    assert lines["post-selected"] == "FAIL"


def test_verify_empty_grid():
    with pytest.raises(ValueError, match="grid must contain at least one point"):
        verify_identities([])
    with pytest.raises(ValueError, match="grid must contain at least one point"):
        parameter_grid(0)


def test_parameter_grid_points_are_valid():
    pts = parameter_grid(20)
    assert len(pts) == 400
    assert max(abs(r * r + t * t - 1) for r, t in pts) <= 1e-15
    assert np.all(np.array(pts) > 0)
