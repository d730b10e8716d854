import json

import pytest

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from sis_persuasion.cli import build_config, main, render_toml


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_reports_flags_and_thresholds(capsys):
    code, out, _ = run_cli(capsys, ["check", "--preset", "fig1-left"])
    assert code == 0
    summary = json.loads(out)
    assert summary["experiment"] == "check"
    m = summary["metrics"]
    assert m["a2_protection_cost"] is True
    assert m["mu_s_max"] == pytest.approx(0.566, abs=2e-3)
    assert m["mu_s_min"] == pytest.approx(-2.028, abs=1e-3)


def test_sne_subcommand_prints_triple(capsys):
    code, out, _ = run_cli(capsys, ["sne", "--preset", "fig2", "--mu-s", "0.548"])
    assert code == 0
    m = json.loads(out)["metrics"]
    assert m["case_id"] == "SIGNAL_FOLLOWING"
    assert m["y_star"] == pytest.approx(0.4677, abs=1e-3)
    assert (m["z_sbar_star"], m["z_ibar_star"]) == (1.0, 0.0)


def test_static_sweep_writes_csv(capsys, tmp_path):
    code, out, _ = run_cli(
        capsys,
        [
            "static-sweep",
            "--preset",
            "fig1-left",
            "--out",
            str(tmp_path),
            "--set",
            "experiment.step=0.05",
        ],
    )
    assert code == 0
    summary = json.loads(out)
    assert summary["outputs"] == [str(tmp_path / "sweep.csv")]
    assert (tmp_path / "sweep.csv").exists()
    assert summary["metrics"]["n_errors"] == 0


def test_simulate_writes_trajectory(capsys, tmp_path):
    code, out, _ = run_cli(
        capsys,
        [
            "simulate",
            "--preset",
            "fig2",
            "--mu-s",
            "0.548",
            "--out",
            str(tmp_path),
            "--set",
            "experiment.horizon_t=2.0",
            "--set",
            "experiment.thin=50",
        ],
    )
    assert code == 0
    m = json.loads(out)["metrics"]
    assert 0.0 < m["terminal_y"] < 1.0
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,y,z_sbar,z_ibar,mu_s,cost_integral"


def test_compare_small_instance(capsys, tmp_path):
    code, out, _ = run_cli(
        capsys,
        [
            "compare",
            "--preset",
            "fig2",
            "--out",
            str(tmp_path),
            "--set",
            "experiment.horizon_t=1.0",
            "--set",
            "experiment.n_intervals=2",
            "--set",
            "experiment.max_iter=3",
            "--set",
            "experiment.dt=0.02",
        ],
    )
    assert code == 0
    summary = json.loads(out)
    m = summary["metrics"]
    assert m["dynamic_objective"] <= m["static_objective"] + 1e-12
    for name in ("static_trajectory.csv", "dynamic_trajectory.csv", "control.csv", "comparison.json"):
        assert (tmp_path / name).exists()


def test_grid_mui_small(capsys, tmp_path):
    code, out, _ = run_cli(
        capsys,
        ["grid-mui", "--preset", "fig4", "--out", str(tmp_path), "--set", "experiment.step=0.3"],
    )
    assert code == 0
    m = json.loads(out)["metrics"]
    assert m["n_unconverged"] == 0
    assert (tmp_path / "y_matrix.csv").exists()
    assert (tmp_path / "mui_summary.csv").exists()


def test_dump_config_round_trips(capsys):
    code, out, _ = run_cli(capsys, ["sne", "--preset", "fig2", "--mu-s", "0.3", "--dump-config"])
    assert code == 0
    reparsed = tomllib.loads(out)
    rebuilt = build_config(reparsed)
    assert rebuilt.raw == build_config(reparsed).raw
    assert render_toml(rebuilt.raw) == out


def test_config_file_and_overrides(capsys, tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(
        "[model]\nbeta_p = 0.5\nbeta_u = 0.65\nc_p = 25.0\nc_u = 32.0\n"
        "[experiment]\nmu_s = 0.8\n"
    )
    code, out, _ = run_cli(capsys, ["sne", "--config", str(cfg)])
    assert code == 0
    assert json.loads(out)["metrics"]["case_id"] == "SIGNAL_FOLLOWING"


def test_unknown_key_rejected(capsys, tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[model]\nalpha = 0.45\nbogus = 1.0\n")
    code, out, err = run_cli(capsys, ["check", "--config", str(cfg)])
    assert code == 2
    assert "bogus" in json.loads(err)["error"]


def test_invalid_model_rejected_as_config_error(capsys):
    code, _, err = run_cli(capsys, ["check", "--set", "model.alpha=1.5"])
    assert code == 2
    assert "alpha" in json.loads(err)["error"]


def test_numerical_failure_exit_code(capsys):
    # recovery above the protected transmission rate: no endemic state at low mu_s
    code, _, err = run_cli(
        capsys, ["sne", "--set", "model.gamma=0.24", "--set", "experiment.mu_s=0.0"]
    )
    assert code == 3
    assert json.loads(err)["kind"] == "numerical"


def test_deterministic_outputs(capsys, tmp_path):
    argv = lambda d: [
        "static-sweep",
        "--preset",
        "fig1-right",
        "--out",
        str(d),
        "--set",
        "experiment.step=0.1",
    ]
    a, b = tmp_path / "a", tmp_path / "b"
    code1, out1, _ = run_cli(capsys, argv(a))
    code2, out2, _ = run_cli(capsys, argv(b))
    assert code1 == code2 == 0
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()
    assert json.loads(out1)["metrics"] == json.loads(out2)["metrics"]
    assert json.loads(out1)["params_hash"] == json.loads(out2)["params_hash"]
