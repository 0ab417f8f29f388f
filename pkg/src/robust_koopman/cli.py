"""Command-line interface: ``robust-koopman {simulate,train,predict,experiment,sweep}``.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure,
4 I/O error. The output directory is taken from ``--output-dir``, then the
``ROBUST_KOOPMAN_OUTPUT_DIR`` environment variable, then the config file,
then the current directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, io
from .dictionary import parse_spec
from .errors import ConfigError, DimensionError, InsufficientDataError, KoopmanError, NumericalFailure
from .experiments import ExperimentConfig
from .koopman import spectrum, train_from_trajectory
from .predictor import fit_output_map, predict

ENV_OUTPUT_DIR = "ROBUST_KOOPMAN_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _global_flags(p, suppress):
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=default, help="master random seed (default 0)")
    p.add_argument("--output-dir", default=default, help=f"output directory (default: ${ENV_OUTPUT_DIR} or .)")


def _config_flags(p):
    p.add_argument("--config", help="JSON experiment config; flags below override its fields")
    p.add_argument("--system", choices=experiments.SYSTEMS)
    p.add_argument("--simulation-steps", type=int)
    p.add_argument("--training-steps", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--dictionary", help="linear | fourier:N_MAX:COORD | monomial:DEGREE")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--lambda-sweep", nargs=3, metavar=("START", "STOP", "POINTS"))
    p.add_argument("--solver-mode", choices=("ridge", "exact-frobenius"))
    g = p.add_argument_group("enrichment")
    g.add_argument("--radius", type=float)
    g.add_argument("--multiplier", type=int)
    g.add_argument("--mode", choices=("trajectory", "pairs"))
    g.add_argument("--coupling", choices=("independent", "shared"))
    g.add_argument("--output-radius", type=float)
    g.add_argument("--total", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robust-koopman", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a system and write a trajectory CSV")
    _global_flags(p, suppress=True)
    _config_flags(p)

    p = sub.add_parser("train", help="fit a model on the first training_steps pairs of a trajectory")
    _global_flags(p, suppress=True)
    _config_flags(p)
    p.add_argument("--trajectory", required=True)
    p.add_argument("--name", default="model", help="basename of the model and spectrum files")

    p = sub.add_parser("predict", help="predict from an initial state with a saved model")
    _global_flags(p, suppress=True)
    p.add_argument("--model", required=True)
    ic = p.add_mutually_exclusive_group(required=True)
    ic.add_argument("--initial-condition", help="comma-separated state values")
    ic.add_argument("--initial-row", nargs=2, metavar=("TRAJECTORY", "ROW"), help="take x0 from a trajectory CSV row")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--truth", help="trajectory CSV holding the true states")
    p.add_argument("--truth-start", type=int, help="row of --truth matching x0 (default: ROW of --initial-row, else 0)")
    p.add_argument("--name", default="prediction")

    p = sub.add_parser("experiment", help="run a plain-vs-robust benchmark preset")
    _global_flags(p, suppress=True)
    p.add_argument("preset", choices=experiments.PRESETS)

    p = sub.add_parser("sweep", help="fit one model per lambda on a log grid")
    _global_flags(p, suppress=True)
    _config_flags(p)
    p.add_argument("--trajectory", required=True)
    return parser


def _output_dir(args, cfg: ExperimentConfig | None = None) -> Path:
    if args.output_dir:
        return Path(args.output_dir)
    if os.environ.get(ENV_OUTPUT_DIR):
        return Path(os.environ[ENV_OUTPUT_DIR])
    if cfg is not None and cfg.output_dir:
        return Path(cfg.output_dir)
    return Path(".")


def config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else None
    d = cfg.to_dict() if cfg else {}
    d.pop("lambda", None)
    if cfg is not None:
        d["lam"] = cfg.lam
    d["enrichment"] = dict(cfg.enrichment.to_dict() if cfg else {})
    for name in ("system", "simulation_steps", "training_steps", "horizon", "dictionary", "lam", "solver_mode"):
        v = getattr(args, name)
        if v is not None:
            d[name] = v
    for name in ("radius", "multiplier", "mode", "coupling", "output_radius", "total"):
        v = getattr(args, name)
        if v is not None:
            d["enrichment"][name] = v
    if args.lambda_sweep:
        start, stop, points = args.lambda_sweep
        try:
            d["lambda_sweep"] = {"start": float(start), "stop": float(stop), "points": int(points)}
        except ValueError as exc:
            raise ConfigError(f"--lambda-sweep: {exc}") from exc
    if "system" not in d:
        raise ConfigError("system: give --system or a --config file naming one")
    d["seed"] = args.seed if args.seed is not None else d.get("seed", 0)
    return ExperimentConfig.from_dict(d)


def _ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _training_states(cfg: ExperimentConfig, path):
    traj = io.read_trajectory(path)
    need = cfg.training_steps + 1
    if len(traj) < need:
        raise InsufficientDataError(
            f"{path}: training_steps={cfg.training_steps} needs {need} rows, file has {len(traj)}"
        )
    return traj, traj.states[:need]


def cmd_simulate(args) -> int:
    cfg = config_from_args(args)
    traj = experiments.simulate(cfg)
    out = _ensure_dir(_output_dir(args, cfg)) / "trajectory.csv"
    io.write_trajectory(traj, out)
    print(f"wrote {out}: {len(traj)} rows x {traj.state_dim + 1} columns")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = config_from_args(args)
    traj, train = _training_states(cfg, args.trajectory)
    dictionary = parse_spec(cfg.dictionary, traj.state_dim)
    enrichment = experiments.seeded_enrichment(cfg.enrichment, cfg.seed)
    lam = cfg.lam
    if lam is None:
        sweep = experiments.lambda_sweep(train, dictionary, enrichment, cfg.lambda_sweep.grid(), cfg.solver_mode)
        lam = experiments.select_lambda(sweep)
    if enrichment.multiplier == 0 and enrichment.total is None and lam == 0:
        enrichment = None
    model = train_from_trajectory(train, dictionary, enrichment, lam, cfg.solver_mode)
    model = model.with_output_map(fit_output_map(train, dictionary))
    out = _ensure_dir(_output_dir(args, cfg))
    io.save_model(model, out / f"{args.name}.json")
    eigs, _ = spectrum(model)
    io.write_spectrum(out / f"{args.name}_spectrum.csv", eigs, traj.dt)
    pairs = model.provenance["total_pairs"] if model.provenance else cfg.training_steps
    print(f"wrote {out / (args.name + '.json')}: lambda={io.fmt(lam)} pairs={pairs} spectral_radius={io.fmt(np.max(np.abs(eigs)))}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = io.load_model(args.model)
    n = model.dictionary.state_dim
    dt = 1.0
    if args.initial_condition is not None:
        try:
            x0 = np.array([float(v) for v in args.initial_condition.split(",")])
        except ValueError as exc:
            raise ConfigError(f"--initial-condition: {exc}") from exc
        start = 0
    else:
        src, row = args.initial_row
        try:
            start = int(row)
        except ValueError as exc:
            raise ConfigError(f"--initial-row: ROW must be an integer, got {row!r}") from exc
        traj = io.read_trajectory(src)
        if not 0 <= start < len(traj):
            raise ConfigError(f"--initial-row: row {start} outside 0..{len(traj) - 1}")
        x0, dt = traj.states[start], traj.dt
    if x0.shape != (n,):
        raise DimensionError(f"initial condition has {x0.size} values; the model's state_dim is {n}")
    truth = None
    if args.truth:
        ttraj = io.read_trajectory(args.truth)
        t0 = start if args.truth_start is None else args.truth_start
        truth = ttraj.states[t0 : t0 + args.horizon + 1]
        if truth.shape[0] != args.horizon + 1:
                raise InsufficientDataError(
                f"{args.truth}: needs rows {t0}..{t0 + args.horizon}, file has {len(ttraj)}"
            )
        dt = ttraj.dt
    result = predict(model, x0, args.horizon, truth=truth, dt=dt)
    out = _ensure_dir(_output_dir(args)) / f"{args.name}.csv"
    io.write_prediction(out, result, truth)
    print(f"wrote {out}: {args.horizon + 1} rows")
    if truth is not None:
        print(f"final-step error: {io.fmt(result.per_step_error[-1])}")
        print("per-state MSE: " + " ".join(io.fmt(v) for v in result.mse_per_state))
    return EXIT_OK


def cmd_experiment(args) -> int:
    out = _output_dir(args) / args.preset
    experiments.run_preset(args.preset, 0 if args.seed is None else args.seed, out)
    print((out / "summary.txt").read_text(), end="")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = config_from_args(args)
    traj, train = _training_states(cfg, args.trajectory)
    dictionary = parse_spec(cfg.dictionary, traj.state_dim)
    enrichment = experiments.seeded_enrichment(cfg.enrichment, cfg.seed)
    sweep = experiments.lambda_sweep(train, dictionary, enrichment, cfg.lambda_sweep.grid(), cfg.solver_mode)
    out = _ensure_dir(_output_dir(args, cfg))
    C = fit_output_map(train, dictionary)
    for i, (_, model, _, _) in enumerate(sweep):
        io.save_model(model.with_output_map(C), out / f"model_{i:03d}.json")
    io.write_csv(out / "sweep.csv", io.SWEEP_HEADER, ([lam, rho, res] for lam, _, rho, res in sweep))
    chosen = experiments.select_lambda(sweep)
    print(f"wrote {len(sweep)} models and {out / 'sweep.csv'}; selected lambda={io.fmt(chosen)}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "predict": cmd_predict,
    "experiment": cmd_experiment,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except KoopmanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
