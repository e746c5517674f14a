import csv
import json

import pytest

import config
import main

FAST = {
    "protocol": {
        "eta_p": 1.0, "eta_s": 1.0, "eta_e1": 0.8, "eta_e2": 0.95, "eta_d": 0.95,
        "r": 1e6, "L_n": 40.0, "L_att": 22.0, "n": 2, "c": 2e5,
    },
    "sim": {"trials": 300, "seed": 5, "workers": 2},
}


@pytest.fixture
def write_config(tmp_path):
    def _write(data, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)
    return _write


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_parse_values():
    assert main.parse_values("2..5") == [2, 3, 4, 5]
    assert main.parse_values("0.5, 0.9") == [0.5, 0.9]
    with pytest.raises(main.ConfigError):
        main.parse_values("5..2")
    with pytest.raises(main.ConfigError):
        main.parse_values("a,b")


def test_analytic_csv(tmp_path, clean_env):
    """Default preset reproduces the reference total time and cavity ratio."""
    out = tmp_path / "analytic.csv"
    assert main.main(["analytic", "--output", "csv", "--output-path", str(out)]) == 0
    (row,) = read_csv(out)
    assert list(row) == list(main.ANALYTIC_COLUMNS)
    assert float(row["T_tot"]) == pytest.approx(2251.4, rel=1e-3)
    assert float(row["R_sn"]) == pytest.approx(10.0, rel=1e-6)
    assert float(row["R_sn_free"]) == pytest.approx(0.01, rel=1e-6)
    assert float(row["speedup_dlcz"]) == pytest.approx(289, rel=1e-2)


def test_analytic_pretty_to_stdout(clean_env, capsys):
    assert main.main(["analytic"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].split()[:3] == ["p_r", "p_b", "p_i"]


def test_config_from_environment(monkeypatch, write_config, capsys):
    monkeypatch.setenv(config.CONFIG_ENV_VAR, write_config(dict(FAST, output="json")))
    assert main.main(["analytic"]) == 0
    (row,) = json.loads(capsys.readouterr().out)
    assert row["n"] == 2
    assert row["R_sn"] is None
    assert row["R_sn_free"] is None


def test_missing_field_exit_code(write_config):
    protocol = dict(FAST["protocol"])
    del protocol["c"]
    assert main.main(["analytic", "--config", write_config({"protocol": protocol})]) == 2


def test_missing_file_exit_code(tmp_path):
    assert main.main(["analytic", "--config", str(tmp_path / "nope.yaml")]) == 2


def test_non_numeric_cavity_exit_code(write_config):
    cavity = {"rho_n": 5.8486545e13, "L_a": 1e-3, "lambda_s": 1.5e-6, "Q": "high"}
    data = {"protocol": FAST["protocol"], "cavity": cavity}
    assert main.main(["analytic", "--config", write_config(data)]) == 2


def test_non_numeric_coherence_time_exit_code(write_config):
    data = dict(FAST, sim=dict(FAST["sim"], memory_coherence_time="1s"))
    assert main.main(["simulate", "--config", write_config(data)]) == 2


def test_unwritable_output_path(clean_env, tmp_path):
    out = tmp_path / "no" / "x.csv"
    assert main.main(["analytic", "--output", "csv", "--output-path", str(out)]) == 1
    assert not out.exists()


def test_simulate_is_reproducible(write_config, tmp_path):
    path = write_config(FAST)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main.main(["simulate", "--config", path, "--output", "csv", "--output-path", str(first)]) == 0
    assert main.main(["simulate", "--config", path, "--output", "csv", "--output-path", str(second),
                      "--workers", "1"]) == 0
    assert first.read_bytes() == second.read_bytes()
    rows = read_csv(first)
    assert [row["level"] for row in rows] == ["0", "1", "2"]


def test_simulate_seed_override(write_config, tmp_path):
    path = write_config(FAST)
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    main.main(["simulate", "--config", path, "--output", "json", "--output-path", str(first)])
    main.main(["simulate", "--config", path, "--output", "json", "--output-path", str(second), "--seed", "6"])
    assert first.read_text() != second.read_text()


def test_simulate_rejects_bad_trials(write_config):
    assert main.main(["simulate", "--config", write_config(FAST), "--trials", "0"]) == 2


def test_simulate_needs_sim_section(write_config):
    assert main.main(["simulate", "--config", write_config({"protocol": FAST["protocol"]})]) == 2


def test_verify_row_count(clean_env, tmp_path):
    out = tmp_path / "verify.csv"
    assert main.main(["verify", "--phase-grid", "2", "--output", "csv", "--output-path", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 4 + 2 + 4 + 2 + 2 + 4
    assert all(row["passed"] == "True" for row in rows)


def test_verify_with_dead_detectors(write_config, tmp_path):
    """With eta_d = 0 nothing heralds, and the closed form agrees."""
    data = {"protocol": dict(FAST["protocol"], eta_d=0.0)}
    out = tmp_path / "verify.csv"
    assert main.main(["verify", "--config", write_config(data), "--phase-grid", "1",
                      "--output", "csv", "--output-path", str(out)]) == 0
    probabilities = [row for row in read_csv(out) if row["check"].startswith("probability.")]
    assert len(probabilities) == 4
    assert all(float(row["value"]) == 0.0 for row in probabilities)


def test_verify_fails_when_a_check_fails(clean_env, mocker):
    mocker.patch('config.VERIFY_PROBABILITY_TOLERANCE', -1.0)
    assert main.main(["verify", "--phase-grid", "1", "--output", "csv"]) == 1


def test_sweep_nesting(clean_env, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main.main(["sweep", "--axis", "n", "--values", "2..6", "--output", "csv",
                      "--output-path", str(out)]) == 0
    rows = read_csv(out)
    assert [row["n"] for row in rows] == ["2", "3", "4", "5", "6"]
    assert list(rows[0])[0] == "n"
    assert list(rows[0]).count("n") == 1


def test_sweep_bad_input(clean_env):
    assert main.main(["sweep", "--axis", "n", "--values", "6..2"]) == 2
    assert main.main(["sweep", "--axis", "bogus", "--values", "1,2"]) == 2
