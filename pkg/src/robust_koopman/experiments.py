"""Experiment configuration, presets and the plain-vs-robust comparison runs."""

from __future__ import annotations

import contextlib
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io, systems
from .dictionary import Dictionary, parse_spec
from .enrichment import EnrichmentConfig, SnapshotPairs, enrich
from .errors import ConfigError, KoopmanError
from .koopman import (
    KoopmanModel,
    build_gram,
    dominant_spectrum_distance,
    spectral_radius,
    spectrum,
    train_from_trajectory,
)
from .predictor import fit_output_map, predict

SYSTEMS = ("oscillators", "stuart-landau", "burgers")
PRESETS = ("oscillators", "stuart-landau", "burgers", "burgers-sweep")
SWEEP_SIZES = (5, 10, 15, 20, 25, 30, 35)

_SYSTEM_CONFIGS = {
    "oscillators": systems.OscillatorRingConfig,
    "stuart-landau": systems.StuartLandauConfig,
    "burgers": systems.BurgersConfig,
}


@dataclass
class LambdaSweep:
    start: float = 1e-12
    stop: float = 1.0
    points: int = 13

    def __post_init__(self):
        if self.points < 2:
            raise ConfigError("lambda_sweep needs at least 2 points")
        if not (0 < self.start < self.stop):
            raise ConfigError("lambda_sweep needs 0 < start < stop")

    def grid(self) -> np.ndarray:
        return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)


@dataclass
class ExperimentConfig:
    """Everything one plain-vs-robust comparison needs.

    ``lam = None`` selects lambda with the sweep: the smallest grid value
    whose robust model has spectral radius at most 1 (the largest grid value
    if none does). ``training_steps`` counts observed snapshot pairs, so
    ``training_steps + 1`` states are used for training.
    """

    system: str = "oscillators"
    system_config: dict = field(default_factory=dict)
    simulation_steps: int = 100
    initial_condition: dict = field(default_factory=dict)
    training_steps: int = 15
    enrichment: EnrichmentConfig = field(default_factory=EnrichmentConfig)
    dictionary: str = "linear"
    lam: float | None = None
    lambda_sweep: LambdaSweep = field(default_factory=LambdaSweep)
    solver_mode: str = "ridge"
    horizon: int = 45
    dominant_count: int = 10
    output_dir: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ConfigError(f"system must be one of {SYSTEMS}, got {self.system!r}")
        if self.training_steps < 2:
            raise ConfigError("training_steps must be at least 2")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        if self.lam is not None and self.lam < 0:
            raise ConfigError("lambda must be non-negative")
        if self.solver_mode not in ("ridge", "exact-frobenius"):
            raise ConfigError(f"unknown solver_mode {self.solver_mode!r}")
        parse_spec(self.dictionary, self.state_dim())

    def system_cfg(self):
        try:
            return _SYSTEM_CONFIGS[self.system](**self.system_config)
        except TypeError as exc:
            raise ConfigError(f"system_config: {exc}") from exc

    def state_dim(self) -> int:
        scfg = self.system_cfg()
        if self.system == "oscillators":
            return 2 * scfg.n_oscillators
        if self.system == "stuart-landau":
            return 2
        return scfg.nx

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if isinstance(d.get("enrichment"), dict):
            d["enrichment"] = EnrichmentConfig.from_dict(d["enrichment"])
        if isinstance(d.get("lambda_sweep"), dict):
            d["lambda_sweep"] = LambdaSweep(**d["lambda_sweep"])
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc


def preset(name: str, seed: int = 0) -> ExperimentConfig:
    """Configurations of the three benchmark comparisons."""
    if name == "oscillators":
        return ExperimentConfig(
            system="oscillators",
            system_config={"n_oscillators": 20, "damping": 0.4, "dt": 0.01},
            simulation_steps=100,
            training_steps=15,
            enrichment=EnrichmentConfig(radius=0.1, multiplier=2, mode="pairs", coupling="shared"),
            dictionary="linear",
            horizon=45,
            seed=seed,
        )
    if name == "stuart-landau":
        return ExperimentConfig(
            system="stuart-landau",
            system_config={"mu": 1.0, "gamma": 1.0, "beta": 0.0, "dt": 0.01},
            simulation_steps=150,
            initial_condition={"r0": 1.0, "theta0": math.pi},
            training_steps=30,
            enrichment=EnrichmentConfig(radius=1.0, multiplier=1, mode="pairs", coupling="shared"),
            dictionary="fourier:10:1",
            horizon=70,
            seed=seed,
        )
    if name in ("burgers", "burgers-sweep"):
        return ExperimentConfig(
            system="burgers",
            system_config={"viscosity": 0.01, "nx": 100, "dt": 0.02, "nt": 50 if name == "burgers" else 70},
            training_steps=8,
            enrichment=EnrichmentConfig(radius=0.01, total=40, mode="pairs", coupling="shared"),
            dictionary="linear",
            horizon=35,
            seed=seed,
        )
    raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")


@contextlib.contextmanager
def stage(name: str):
    """Re-raise library errors with ``name`` prefixed to the message."""
    try:
        yield
    except KoopmanError as exc:
        exc.args = (f"{name}: {exc}",) + exc.args[1:]
        raise


def derived_seeds(seed: int, n: int = 2) -> list[int]:
    """Independent child seeds (initial condition, enrichment) from one master seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def simulate(cfg: ExperimentConfig) -> systems.Trajectory:
    scfg = cfg.system_cfg()
    ic = dict(cfg.initial_condition)
    if cfg.system == "oscillators":
        n = scfg.n_oscillators
        rng = np.random.default_rng(derived_seeds(cfg.seed)[0])
        theta0 = np.asarray(ic.get("theta0", rng.standard_normal(n)), dtype=float)
        omega0 = np.asarray(ic.get("omega0", np.zeros(n)), dtype=float)
        return systems.simulate_oscillators(scfg, theta0, omega0, cfg.simulation_steps)
    if cfg.system == "stuart-landau":
        return systems.simulate_stuart_landau(
            scfg, ic.get("r0", 1.0), ic.get("theta0", math.pi), cfg.simulation_steps
        )
    u0 = ic.get("u0")
    return systems.simulate_burgers(scfg, None if u0 is None else np.asarray(u0, dtype=float))


def seeded_enrichment(enrichment: EnrichmentConfig, seed: int) -> EnrichmentConfig:
    """Copy of ``enrichment`` drawing from the child seed of ``seed``."""
    return dataclasses.replace(enrichment, seed=derived_seeds(seed)[1])


def gram_residual(model: KoopmanModel, pairs: SnapshotPairs) -> float:
    gram = build_gram(pairs, model.dictionary)
    return float(np.linalg.norm(gram.G @ model.K - gram.A))


def lambda_sweep(train, dictionary: Dictionary, enrichment: EnrichmentConfig, grid, solver_mode="ridge"):
    """Fit the robust model at each grid value.

    Returns a list of ``(lam, model, spectral_radius, training_residual)``.
    """
    pairs = enrich(train, enrichment)
    out = []
    for lam in grid:
        model = train_from_trajectory(train, dictionary, enrichment, float(lam), solver_mode)
        out.append((float(lam), model, spectral_radius(model.K), gram_residual(model, pairs)))
    return out


def select_lambda(sweep) -> float:
    for lam, _, rho, _ in sweep:
        if rho <= 1.0:
            return lam
    return sweep[-1][0]


@dataclass
class MethodResult:
    model: KoopmanModel
    eigs: np.ndarray
    prediction: object

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.eigs)))


def _fit_and_predict(train, dictionary, enrichment, lam, solver_mode, x0, horizon, truth, dt):
    model = train_from_trajectory(train, dictionary, enrichment, lam, solver_mode)
    model = model.with_output_map(fit_output_map(train, dictionary))
    eigs, _ = spectrum(model)
    return MethodResult(model, eigs, predict(model, x0, horizon, truth=truth, dt=dt))


def compare(cfg: ExperimentConfig, traj: systems.Trajectory | None = None, training_steps: int | None = None):
    """Train plain and robust models on the same data and predict with both.

    Returns ``(plain, robust, lam, sweep)`` where ``sweep`` is empty when the
    config fixes lambda.
    """
    traj = simulate(cfg) if traj is None else traj
    ts = cfg.training_steps if training_steps is None else training_steps
    if ts + 1 + cfg.horizon > len(traj):
        raise ConfigError(
            f"trajectory has {len(traj)} states; training_steps={ts} and horizon={cfg.horizon} need {ts + 1 + cfg.horizon}"
        )
    dictionary = parse_spec(cfg.dictionary, traj.state_dim)
    train = traj.states[: ts + 1]
    x0 = traj.states[ts]
    truth = traj.states[ts : ts + cfg.horizon + 1]
    enrichment = seeded_enrichment(cfg.enrichment, cfg.seed)
    sweep = []
    lam = cfg.lam
    if lam is None:
        sweep = lambda_sweep(train, dictionary, enrichment, cfg.lambda_sweep.grid(), cfg.solver_mode)
        lam = select_lambda(sweep)
    plain = _fit_and_predict(train, dictionary, None, 0.0, cfg.solver_mode, x0, cfg.horizon, truth, traj.dt)
    robust = _fit_and_predict(train, dictionary, enrichment, lam, cfg.solver_mode, x0, cfg.horizon, truth, traj.dt)
    return plain, robust, lam, sweep


def true_discrete_spectrum(cfg: ExperimentConfig) -> np.ndarray | None:
    if cfg.system != "oscillators":
        return None
    return np.linalg.eigvals(systems.oscillator_step_matrix(cfg.system_cfg()))


def _write_method(out: Path, tag: str, res: MethodResult, truth, dt):
    io.save_model(res.model, out / f"model_{tag}.json")
    io.write_spectrum(out / f"spectrum_{tag}.csv", res.eigs, dt)
    io.write_prediction(out / f"prediction_{tag}.csv", res.prediction, truth)


def run_comparison(cfg: ExperimentConfig, out: Path | None) -> dict:
    """One plain-vs-robust comparison; writes reports under ``out`` when given."""
    with stage("simulate"):
        traj = simulate(cfg)
    with stage("train/predict"):
        plain, robust, lam, sweep = compare(cfg, traj)
    ts = cfg.training_steps
    truth = traj.states[ts : ts + cfg.horizon + 1]
    summary = {
        "system": cfg.system,
        "seed": cfg.seed,
        "lambda": lam,
        "observed_pairs": ts,
        "total_training_pairs": robust.model.provenance["total_pairs"],
        "spectral_radius_plain": plain.radius,
        "spectral_radius_robust": robust.radius,
        "final_mse_plain": float(np.mean((plain.prediction.predicted.states[-1] - truth[-1]) ** 2)),
        "final_mse_robust": float(np.mean((robust.prediction.predicted.states[-1] - truth[-1]) ** 2)),
        "mse_sum_plain": float(np.sum(plain.prediction.mse_per_state)),
        "mse_sum_robust": float(np.sum(robust.prediction.mse_per_state)),
    }
    final_plain = np.abs(plain.prediction.predicted.states[-1] - truth[-1])
    final_robust = np.abs(robust.prediction.predicted.states[-1] - truth[-1])
    if cfg.system == "oscillators":
        ref = true_discrete_spectrum(cfg)
        summary["dominant_distance_plain"] = dominant_spectrum_distance(plain.eigs, ref, cfg.dominant_count)
        summary["dominant_distance_robust"] = dominant_spectrum_distance(robust.eigs, ref, cfg.dominant_count)
        for k in (3, 4):
            summary[f"final_position_error_osc{k}_plain"] = float(final_plain[k - 1])
            summary[f"final_position_error_osc{k}_robust"] = float(final_robust[k - 1])
    elif cfg.system == "stuart-landau":
        for i, name in enumerate(("r", "theta")):
            summary[f"final_{name}_error_plain"] = float(final_plain[i])
            summary[f"final_{name}_error_robust"] = float(final_robust[i])
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        io.write_trajectory(traj, out / "trajectory.csv")
        _write_method(out, "plain", plain, truth, traj.dt)
        _write_method(out, "robust", robust, truth, traj.dt)
        if sweep:
            io.write_csv(out / "lambda_sweep.csv", io.SWEEP_HEADER, ([l, r, e] for l, _, r, e in sweep))
        (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
        write_summary(out / "summary.txt", summary)
    return summary


def run_burgers_sweep(cfg: ExperimentConfig, out: Path | None, sizes=SWEEP_SIZES) -> dict:
    """Per-state MSE of both methods over a range of training sizes."""
    with stage("simulate"):
        traj = simulate(cfg)
    grids = {"plain": [], "robust": []}
    lams = []
    for s in sizes:
        with stage(f"train/predict (training size {s})"):
            plain, robust, lam, _ = compare(cfg, traj, training_steps=s)
        grids["plain"].append(plain.prediction.mse_per_state)
        grids["robust"].append(robust.prediction.mse_per_state)
        lams.append(lam)
    summary = {"system": "burgers", "seed": cfg.seed, "training_sizes": list(sizes), "lambdas": lams}
    for tag in grids:
        grids[tag] = np.array(grids[tag])
        summary[f"mse_sum_{tag}"] = [float(v) for v in grids[tag].sum(axis=1)]
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        for tag, g in grids.items():
            io.write_csv(
                out / f"mse_grid_{tag}.csv",
                io.mse_grid_header(g.shape[1]),
                ([s] + list(row) for s, row in zip(sizes, g)),
            )
        (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
        write_summary(out / "summary.txt", summary)
    summary["grids"] = grids
    return summary


def write_summary(path: Path, summary: dict) -> None:
    lines = []
    for k, v in summary.items():
        if isinstance(v, float):
            v = io.fmt(v)
        elif isinstance(v, list):
            v = " ".join(io.fmt(x) if isinstance(x, float) else str(x) for x in v)
        lines.append(f"{k}: {v}")
    path.write_text("\n".join(lines) + "\n")


def run_preset(name: str, seed: int = 0, output_dir=None) -> dict:
    cfg = preset(name, seed)
    out = None if output_dir is None else Path(output_dir)
    if name == "burgers-sweep":
        return run_burgers_sweep(cfg, out)
    return run_comparison(cfg, out)
