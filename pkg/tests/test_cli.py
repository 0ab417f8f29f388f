import json

import numpy as np
import pytest

from robust_koopman import cli, io


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "system,extra,shape",
    [
        ("oscillators", ["--simulation-steps", 100], (101, 41)),
        ("burgers", [], (51, 101)),
        ("stuart-landau", ["--simulation-steps", 150], (151, 3)),
    ],
)
def test_simulate_shapes(tmp_path, capsys, system, extra, shape):
    code, out, _ = run(capsys, "simulate", "--system", system, *extra, "--output-dir", tmp_path)
    assert code == 0
    assert f"{shape[0]} rows x {shape[1]} columns" in out
    header, data = io.read_csv(tmp_path / "trajectory.csv", "trajectory")
    assert (data.shape[0], len(header)) == shape


@pytest.fixture
def osc_traj(tmp_path, capsys):
    run(capsys, "simulate", "--system", "oscillators", "--output-dir", tmp_path)
    return tmp_path / "trajectory.csv"


def test_train_records_enriched_pairs(tmp_path, capsys, osc_traj):
    code, out, _ = run(
        capsys, "train", "--system", "oscillators", "--training-steps", 15, "--multiplier", 2,
        "--lambda", 1e-6, "--trajectory", osc_traj, "--output-dir", tmp_path,
    )
    assert code == 0 and "pairs=45" in out
    model = io.load_model(tmp_path / "model.json")
    assert model.provenance["total_pairs"] == 45 and model.C is not None
    header, _ = io.read_csv(tmp_path / "model_spectrum.csv", "spectrum")
    assert header == io.SPECTRUM_HEADER


def test_train_plain_matches_baseline(tmp_path, capsys, osc_traj):
    from robust_koopman.dictionary import linear
    from robust_koopman.koopman import train_from_trajectory

    run(capsys, "train", "--system", "oscillators", "--training-steps", 15, "--multiplier", 0,
        "--lambda", 0, "--trajectory", osc_traj, "--output-dir", tmp_path)
    model = io.load_model(tmp_path / "model.json")
    states = io.read_trajectory(osc_traj).states[:16]
    np.testing.assert_array_equal(model.K, train_from_trajectory(states, linear(40)).K)
    assert model.solver_mode == "pseudoinverse"


def test_train_insufficient_rows(tmp_path, capsys, osc_traj):
    code, _, err = run(capsys, "train", "--system", "oscillators", "--training-steps", 500,
                       "--trajectory", osc_traj, "--output-dir", tmp_path)
    assert code == 2 and "training_steps=500" in err


def test_train_parse_error_names_line(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,s0\n0,1\n0.1,x\n")
    code, _, err = run(capsys, "train", "--system", "stuart-landau", "--trajectory", bad)
    assert code == 2 and "line 3" in err


def test_predict_with_truth(tmp_path, capsys, osc_traj):
    run(capsys, "train", "--system", "oscillators", "--training-steps", 15, "--lambda", 0,
        "--multiplier", 0, "--trajectory", osc_traj, "--output-dir", tmp_path)
    code, out, _ = run(capsys, "predict", "--model", tmp_path / "model.json", "--initial-row", osc_traj, 15,
                       "--horizon", 45, "--truth", osc_traj, "--output-dir", tmp_path)
    assert code == 0 and "final-step error" in out
    mse = out.split("per-state MSE: ")[1].split()
    assert len(mse) == 40
    header, data = io.read_csv(tmp_path / "prediction.csv", "prediction")
    assert data.shape == (46, 82) and np.all(np.isfinite(data))


def test_predict_horizon_zero(tmp_path, capsys, osc_traj):
    run(capsys, "train", "--system", "oscillators", "--training-steps", 15, "--lambda", 0,
        "--multiplier", 0, "--trajectory", osc_traj, "--output-dir", tmp_path)
    code, _, _ = run(capsys, "predict", "--model", tmp_path / "model.json", "--initial-row", osc_traj, 3,
                     "--horizon", 0, "--output-dir", tmp_path)
    _, data = io.read_csv(tmp_path / "prediction.csv", "prediction")
    assert code == 0 and data.shape == (1, 41)
    np.testing.assert_allclose(data[0, 1:], io.read_trajectory(osc_traj).states[3], atol=1e-10)


def test_predict_dimension_error(tmp_path, capsys, osc_traj):
    run(capsys, "train", "--system", "oscillators", "--training-steps", 15, "--lambda", 0,
        "--multiplier", 0, "--trajectory", osc_traj, "--output-dir", tmp_path)
    code, _, err = run(capsys, "predict", "--model", tmp_path / "model.json", "--initial-condition", "1,2",
                       "--horizon", 3)
    assert code == 2 and "state_dim is 40" in err


def test_predict_burgers_mse_length(tmp_path, capsys):
    run(capsys, "simulate", "--system", "burgers", "--output-dir", tmp_path)
    traj = tmp_path / "trajectory.csv"
    run(capsys, "train", "--system", "burgers", "--training-steps", 8, "--total", 40, "--mode", "pairs",
        "--trajectory", traj, "--output-dir", tmp_path)
    code, out, _ = run(capsys, "predict", "--model", tmp_path / "model.json", "--initial-row", traj, 8,
                       "--horizon", 35, "--truth", traj, "--output-dir", tmp_path)
    assert code == 0 and len(out.split("per-state MSE: ")[1].split()) == 100


def test_sweep_writes_model_per_point(tmp_path, capsys, osc_traj):
    code, _, _ = run(capsys, "sweep", "--system", "oscillators", "--training-steps", 15, "--multiplier", 2,
                     "--lambda-sweep", 1e-8, 1, 5, "--trajectory", osc_traj, "--output-dir", tmp_path / "sw")
    assert code == 0
    assert len(list((tmp_path / "sw").glob("model_*.json"))) == 5
    header, data = io.read_csv(tmp_path / "sw" / "sweep.csv", "sweep")
    np.testing.assert_allclose(data[:, 0], np.logspace(-8, 0, 5))
    for i, rho in enumerate(data[:, 1]):
        K = io.load_model(tmp_path / "sw" / f"model_{i:03d}.json").K
        assert rho == pytest.approx(np.max(np.abs(np.linalg.eigvals(K))))


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = {"system": "stuart-landau", "simulation_steps": 40, "seed": 3, "output_dir": str(tmp_path / "fromcfg")}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    code, out, _ = run(capsys, "simulate", "--config", tmp_path / "c.json")
    assert code == 0 and "41 rows" in out and (tmp_path / "fromcfg" / "trajectory.csv").exists()
    code, out, _ = run(capsys, "simulate", "--config", tmp_path / "c.json", "--simulation-steps", 9,
                       "--output-dir", tmp_path / "flag")
    assert "10 rows" in out and (tmp_path / "flag" / "trajectory.csv").exists()


def test_env_output_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUTPUT_DIR, str(tmp_path / "env"))
    run(capsys, "simulate", "--system", "stuart-landau", "--simulation-steps", 5)
    assert (tmp_path / "env" / "trajectory.csv").exists()
    run(capsys, "simulate", "--system", "stuart-landau", "--simulation-steps", 5, "--output-dir", tmp_path / "flag")
    assert (tmp_path / "flag" / "trajectory.csv").exists()


@pytest.mark.parametrize(
    "argv,field",
    [
        (["simulate"], "system"),
        (["simulate", "--system", "oscillators", "--training-steps", "1"], "training_steps"),
        (["simulate", "--system", "oscillators", "--horizon", "0"], "horizon"),
        (["simulate", "--system", "oscillators", "--lambda-sweep", "1e-3", "1", "1"], "2 points"),
        (["simulate", "--system", "oscillators", "--radius", "-1"], "radius"),
        (["simulate", "--system", "oscillators", "--dictionary", "poly"], "dictionary"),
        (["bogus"], "invalid choice"),
    ],
)
def test_config_errors_exit_2(capsys, argv, field):
    code, _, err = run(capsys, *argv)
    assert code == 2 and field in err


def test_unknown_config_field(tmp_path, capsys):
    (tmp_path / "c.json").write_text('{"system": "burgers", "colour": 1}')
    code, _, err = run(capsys, "simulate", "--config", tmp_path / "c.json")
    assert code == 2 and "colour" in err


def test_io_error_exit_4(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, _ = run(capsys, "simulate", "--system", "stuart-landau", "--output-dir", blocker / "sub")
    assert code == 4
    code, _, _ = run(capsys, "predict", "--model", tmp_path / "missing.json", "--initial-condition", "1", "--horizon", 1)
    assert code == 4


def test_numerical_failure_exit_3(tmp_path, capsys):
    cfg = {"system": "burgers", "initial_condition": {"u0": [0.0] + [1e307] * 98 + [0.0]}}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    code, _, err = run(capsys, "simulate", "--config", tmp_path / "c.json")
    assert code == 3 and "step" in err


def test_experiment_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        assert run(capsys, "--seed", 4, "experiment", "stuart-landau", "--output-dir", tmp_path / d)[0] == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
