"""Linear multi-step predictor built on a fitted Koopman model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .dictionary import Dictionary
from .errors import DimensionError, InsufficientDataError, MisconfigurationError
from .koopman import KoopmanModel
from .systems import Trajectory


@dataclass(frozen=True)
class PredictionResult:
    """Predicted states plus optional error measures against a ground truth.

    ``max_imag`` is the largest imaginary magnitude discarded when mapping
    complex features back to real states.
    """

    predicted: Trajectory
    max_imag: float
    per_step_error: np.ndarray | None = None
    mse_per_state: np.ndarray | None = None


def fit_output_map(train_states, dictionary: Dictionary, rank_tol: float = numerics.DEFAULT_RANK_TOL) -> np.ndarray:
    """Least-squares ``C`` (``N x K``) minimizing ``sum_i ||x_i - C Psi(x_i)^T||^2``.

    For the linear dictionary the identity has zero residual and is returned
    directly; the minimum-norm solution would instead project onto the span
    of the (often rank-deficient) training states.
    """
    X = np.atleast_2d(np.asarray(train_states, dtype=float))
    if X.shape[0] < 1 or X.size == 0:
        raise InsufficientDataError("fitting an output map needs at least one state")
    if dictionary.kind == "linear":
        if X.shape[1] != dictionary.state_dim:
            raise DimensionError(f"states have dimension {X.shape[1]}, dictionary expects {dictionary.state_dim}")
        return np.eye(dictionary.state_dim, dtype=np.complex128)
    Phi = dictionary.evaluate_batch(X)
    return (numerics.pseudo_inverse(Phi, rank_tol) @ X.astype(np.complex128)).T


def reconstruction_residuals(C, states, dictionary: Dictionary) -> np.ndarray:
    """``||x_i - Re(C Psi(x_i)^T)||_2`` for each state."""
    X = np.atleast_2d(np.asarray(states, dtype=float))
    recon = (dictionary.evaluate_batch(X) @ np.asarray(C).T).real
    return np.linalg.norm(X - recon, axis=1)


def propagate_lifted(K, z0, horizon: int) -> np.ndarray:
    """Rows ``z_0 .. z_horizon`` with ``z_{n+1} = z_n @ K``."""
    K = np.asarray(K, dtype=np.complex128)
    Z = np.empty((horizon + 1, K.shape[0]), dtype=np.complex128)
    Z[0] = z0
    for n in range(horizon):
        Z[n + 1] = Z[n] @ K
    return Z


def evaluate_prediction(pred, truth):
    """Per-step 2-norm error and per-state mean squared error."""
    pred = np.atleast_2d(np.asarray(getattr(pred, "states", pred), dtype=float))
    truth = np.atleast_2d(np.asarray(getattr(truth, "states", truth), dtype=float))
    if pred.shape != truth.shape:
        raise DimensionError(f"prediction {pred.shape} and truth {truth.shape} differ in shape")
    diff = pred - truth
    return np.linalg.norm(diff, axis=1), np.mean(diff * diff, axis=0)


def predict(model: KoopmanModel, x0, horizon: int, truth=None, dt: float = 1.0) -> PredictionResult:
    """Lift ``x0``, advance ``horizon`` steps with ``K``, map back with ``C``.

    ``truth``, if given, must hold ``horizon + 1`` states starting at ``x0``.
    """
    if model.C is None:
        raise MisconfigurationError("model has no output map; fit one with fit_output_map first")
    if horizon < 0:
        raise DimensionError("horizon must be non-negative")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.dictionary.state_dim,):
        raise DimensionError(f"initial state must have length state_dim={model.dictionary.state_dim}")
    Z = propagate_lifted(model.K, model.dictionary.evaluate(x0), horizon)
    full = Z @ model.C.T
    predicted = Trajectory(full.real, dt)
    max_imag = float(np.max(np.abs(full.imag))) if full.size else 0.0
    if truth is None:
        return PredictionResult(predicted=predicted, max_imag=max_imag)
    err, mse = evaluate_prediction(predicted, truth)
    return PredictionResult(predicted=predicted, max_imag=max_imag, per_step_error=err, mse_per_state=mse)
