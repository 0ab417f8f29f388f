import json

import numpy as np
import pytest

from robust_koopman import experiments as ex
from robust_koopman.enrichment import EnrichmentConfig
from robust_koopman.errors import ConfigError, InstabilityError


def test_config_round_trip(tmp_path):
    cfg = ex.preset("stuart-landau", seed=9)
    (tmp_path / "c.json").write_text(json.dumps(cfg.to_dict()))
    back = ex.ExperimentConfig.load(tmp_path / "c.json")
    assert back == cfg
    assert "lambda" in cfg.to_dict() and "lam" not in cfg.to_dict()


@pytest.mark.parametrize(
    "kwargs",
    [
        {"system": "lorenz"},
        {"training_steps": 1},
        {"horizon": 0},
        {"lam": -1.0},
        {"solver_mode": "cg"},
        {"system_config": {"n_oscillators": 20, "spring": 1.0}},
        {"dictionary": "fourier:3:99"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        ex.ExperimentConfig(**kwargs)


def test_config_bad_json(tmp_path):
    (tmp_path / "c.json").write_text('{"system": \n')
    with pytest.raises(ConfigError, match="line"):
        ex.ExperimentConfig.load(tmp_path / "c.json")


def test_lambda_sweep_grid():
    np.testing.assert_allclose(ex.LambdaSweep(1e-4, 1.0, 5).grid(), [1e-4, 1e-3, 1e-2, 1e-1, 1])
    with pytest.raises(ConfigError):
        ex.LambdaSweep(1e-4, 1.0, 1)


def test_select_lambda_rule():
    sweep = [(1e-3, None, 1.2, 0.0), (1e-2, None, 0.99, 0.0), (1e-1, None, 0.5, 0.0)]
    assert ex.select_lambda(sweep) == 1e-2
    assert ex.select_lambda([(1e-3, None, 1.5, 0.0), (1.0, None, 1.1, 0.0)]) == 1.0


def test_oscillator_preset_enrichment_count():
    plain, robust, lam, sweep = ex.compare(ex.preset("oscillators"))
    assert robust.model.provenance["total_pairs"] == 45
    assert plain.model.provenance is None and plain.model.lam == 0
    assert lam in [s[0] for s in sweep]


def test_seeds_change_initial_condition():
    a = ex.simulate(ex.preset("oscillators", 0)).states[0]
    b = ex.simulate(ex.preset("oscillators", 1)).states[0]
    assert not np.array_equal(a, b)
    assert not a[20:].any()


def test_burgers_sweep_grid_shape(tmp_path):
    s = ex.run_preset("burgers-sweep", 0, tmp_path)
    for tag in ("plain", "robust"):
        assert s["grids"][tag].shape == (7, 100)
        text = (tmp_path / f"mse_grid_{tag}.csv").read_text().splitlines()
        assert len(text) == 8 and text[0].startswith("training_size,mse_0")
        assert [int(r.split(",")[0]) for r in text[1:]] == list(ex.SWEEP_SIZES)


def test_preset_report_files(tmp_path):
    ex.run_preset("burgers", 0, tmp_path)
    names = {p.name for p in tmp_path.iterdir()}
    for tag in ("plain", "robust"):
        assert {f"model_{tag}.json", f"spectrum_{tag}.csv", f"prediction_{tag}.csv"} <= names
    summary = (tmp_path / "summary.txt").read_text()
    for key in ("lambda:", "spectral_radius_plain:", "spectral_radius_robust:", "final_mse_plain:", "final_mse_robust:"):
        assert key in summary


def test_errors_carry_stage_name():
    cfg = ex.preset("burgers")
    cfg.initial_condition = {"u0": [0.0] + [1e307] * 98 + [0.0]}
    with pytest.raises(InstabilityError, match="^simulate: "):
        ex.run_comparison(cfg, None)
    cfg = ex.preset("oscillators")
    cfg.horizon = 500
    with pytest.raises(ConfigError, match="^train/predict: "):
        ex.run_comparison(cfg, None)


def test_stuart_landau_robust_radius_not_above_plain():
    s = ex.run_preset("stuart-landau")
    assert s["spectral_radius_robust"] <= s["spectral_radius_plain"]


# Ordering claims about the benchmark setups that do not hold for this
# implementation. Each is asserted as stated and expected to fail; the
# reasons are recorded with the decision log.


@pytest.mark.xfail(strict=True, reason="true step matrix has spectral radius 1; plain DMD underestimates it, robust lands closer")
def test_oscillator_robust_radius_not_above_plain():
    s = ex.run_preset("oscillators")
    assert s["spectral_radius_robust"] <= s["spectral_radius_plain"]


@pytest.mark.xfail(strict=True, reason="plain DMD is near exact on this noise-free linear system; enrichment only adds bias")
def test_oscillator_robust_final_error_not_above_plain():
    s = ex.run_preset("oscillators")
    assert s["final_position_error_osc3_robust"] < s["final_position_error_osc3_plain"]
    assert s["final_position_error_osc4_robust"] < s["final_position_error_osc4_plain"]


@pytest.mark.xfail(strict=True, reason="plain EDMD on 30 on-cycle samples has spectral radius just below 1")
def test_stuart_landau_plain_radius_above_one():
    assert ex.run_preset("stuart-landau")["spectral_radius_plain"] > 1
