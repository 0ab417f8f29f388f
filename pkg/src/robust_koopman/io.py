"""Model files and CSV tables.

Model files are JSON documents; every float is written with 17 significant
digits and complex matrices are row-major lists of ``[re, im]`` pairs.
The writer is deterministic, so load-then-save reproduces a file byte for
byte.

Every CSV starts with a header row naming its columns; readers check that
header against the schema they expect and refuse anything else.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .dictionary import Dictionary
from .errors import SchemaError
from .koopman import KoopmanModel
from .numerics import SolveReport
from .systems import Trajectory

MODEL_FORMAT = "robust-koopman-model/1"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# model files ---------------------------------------------------------------


def _emit(obj, indent=0) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not np.isfinite(obj):
            raise ValueError("model files cannot hold non-finite numbers")
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {_emit(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (list, tuple, dict)) for v in obj) or all(
            isinstance(v, (list, tuple)) and all(not isinstance(w, (list, tuple, dict)) for w in v) for v in obj
        ):
            return "[" + ", ".join(_emit(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + "  " + _emit(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _matrix_to_pairs(M):
    if M is None:
        return None
    M = np.asarray(M, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _pairs_to_matrix(rows, name):
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"matrix {name!r} is not a list of [re, im] rows") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise SchemaError(f"matrix {name!r} must be rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def model_to_text(model: KoopmanModel) -> str:
    report = None
    if model.report is not None:
        r = model.report
        report = {
            "objective_value": float(r.objective_value),
            "iterations": r.iterations,
            "converged": r.converged,
            "mode": r.mode,
            "pseudoinverse_fallback": r.pseudoinverse_fallback,
        }
    doc = {
        "format": MODEL_FORMAT,
        "dictionary": model.dictionary.describe(),
        "lambda": float(model.lam),
        "solver_mode": model.solver_mode,
        "provenance": model.provenance,
        "report": report,
        "K": _matrix_to_pairs(model.K),
        "C": _matrix_to_pairs(model.C),
    }
    return _emit(doc) + "\n"


def model_from_text(text: str) -> KoopmanModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"model file is not valid JSON (line {exc.lineno}): {exc.msg}") from exc
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise SchemaError(f"not a model file of format {MODEL_FORMAT}")
    try:
        report = None
        if doc.get("report") is not None:
            r = doc["report"]
            report = SolveReport(
                objective_value=float(r["objective_value"]),
                iterations=int(r["iterations"]),
                converged=bool(r["converged"]),
                mode=r["mode"],
                pseudoinverse_fallback=bool(r.get("pseudoinverse_fallback", False)),
            )
        C = doc.get("C")
        return KoopmanModel(
            K=_pairs_to_matrix(doc["K"], "K"),
            dictionary=Dictionary.from_description(doc["dictionary"]),
            lam=float(doc["lambda"]),
            solver_mode=doc["solver_mode"],
            C=None if C is None else _pairs_to_matrix(C, "C"),
            provenance=doc.get("provenance"),
            report=report,
        )
    except KeyError as exc:
        raise SchemaError(f"model file is missing field {exc}") from exc


def save_model(model: KoopmanModel, path) -> None:
    Path(path).write_text(model_to_text(model))


def load_model(path) -> KoopmanModel:
    return model_from_text(Path(path).read_text())


# CSV -----------------------------------------------------------------------


def _indexed(prefix, n):
    return [f"{prefix}{i}" for i in range(n)]


def trajectory_header(n):
    return ["t"] + _indexed("s", n)


def prediction_header(n, with_truth=True):
    if with_truth:
        return ["step"] + _indexed("truth_", n) + _indexed("pred_", n) + ["err"]
    return ["step"] + _indexed("pred_", n)


SPECTRUM_HEADER = ["re_discrete", "im_discrete", "re_continuous", "im_continuous"]
SWEEP_HEADER = ["lambda", "spectral_radius", "training_residual"]


def mse_grid_header(n):
    return ["training_size"] + _indexed("mse_", n)


_SCHEMAS = {
    "trajectory": re.compile(r"^t(,s\d+)+$"),
    "prediction": re.compile(r"^step((,truth_\d+)+(,pred_\d+)+,err|(,pred_\d+)+)$"),
    "spectrum": re.compile("^" + ",".join(SPECTRUM_HEADER) + "$"),
    "sweep": re.compile("^" + ",".join(SWEEP_HEADER) + "$"),
    "mse_grid": re.compile(r"^training_size(,mse_\d+)+$"),
}


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (str, int, np.integer)) else fmt(v) for v in row])


def read_csv(path, schema: str):
    """Return ``(header, data)`` after checking the header against ``schema``."""
    if schema not in _SCHEMAS:
        raise SchemaError(f"unknown CSV schema {schema!r}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file, expected a {schema} header")
    header = [h.strip() for h in rows[0]]
    if not _SCHEMAS[schema].match(",".join(header)):
        raise SchemaError(f"{path}: line 1 header {','.join(header)[:80]!r} is not a {schema} schema")
    data = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise SchemaError(f"{path}: line {i} has {len(row)} fields, header has {len(header)}")
        try:
            data[i - 2] = [float(v) for v in row]
        except ValueError as exc:
            raise SchemaError(f"{path}: line {i}: {exc}") from exc
    return header, data


def write_trajectory(traj: Trajectory, path) -> None:
    rows = (np.concatenate([[t], s]) for t, s in zip(traj.times, traj.states))
    write_csv(path, trajectory_header(traj.state_dim), rows)


def read_trajectory(path) -> Trajectory:
    _, data = read_csv(path, "trajectory")
    if data.shape[0] < 1:
        raise SchemaError(f"{path}: trajectory has no rows")
    dt = float(data[1, 0] - data[0, 0]) if data.shape[0] > 1 else 1.0
    return Trajectory(data[:, 1:], dt)


def write_spectrum(path, eigs, dt) -> None:
    from .koopman import discrete_to_continuous

    cont = discrete_to_continuous(eigs, dt)
    write_csv(path, SPECTRUM_HEADER, ([e.real, e.imag, c.real, c.imag] for e, c in zip(eigs, cont)))


def write_prediction(path, result, truth=None) -> None:
    pred = result.predicted.states
    n = pred.shape[1]
    if truth is None:
        write_csv(path, prediction_header(n, False), ([k] + list(p) for k, p in enumerate(pred)))
        return
    truth = np.asarray(getattr(truth, "states", truth))
    rows = ([k] + list(t) + list(p) + [e] for k, (t, p, e) in enumerate(zip(truth, pred, result.per_step_error)))
    write_csv(path, prediction_header(n, True), rows)
