"""Gram matrices, EDMD and regularized (robust) Koopman fits, and spectra.

Lifted states are row vectors and the operator acts on the right,
``Psi(y) ~= Psi(x) @ K``. For a linear map ``y = M x`` with the linear
dictionary this means the fitted ``K`` equals ``M.T``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import numerics
from .dictionary import Dictionary
from .enrichment import EnrichmentConfig, SnapshotPairs, enrich
from .errors import ConfigError, DimensionError, InsufficientDataError

FIT_MODES = ("pseudoinverse",) + numerics.SOLVER_MODES


@dataclass(frozen=True)
class GramMatrices:
    G: np.ndarray
    A: np.ndarray
    sample_count: int


@dataclass(frozen=True)
class KoopmanModel:
    """A fitted operator together with everything needed to reuse it.

    ``C`` is the optional ``N x K`` output map from features back to state
    space. ``provenance`` is ``None`` for unenriched fits; otherwise it holds
    the enrichment configuration and pair counts.
    """

    K: np.ndarray
    dictionary: Dictionary
    lam: float = 0.0
    solver_mode: str = "pseudoinverse"
    C: np.ndarray | None = None
    provenance: dict | None = None
    report: numerics.SolveReport | None = None

    def __post_init__(self):
        k = self.dictionary.feature_dim
        if self.K.shape != (k, k):
            raise DimensionError(f"K has shape {self.K.shape}, dictionary has {k} features")
        if self.C is not None and self.C.shape != (self.dictionary.state_dim, k):
            raise DimensionError(f"C has shape {self.C.shape}, expected {(self.dictionary.state_dim, k)}")
        if self.solver_mode not in FIT_MODES:
            raise ConfigError(f"unknown solver mode {self.solver_mode!r}")

    def with_output_map(self, C) -> "KoopmanModel":
        return dataclasses.replace(self, C=np.asarray(C, dtype=np.complex128))


def build_gram(pairs: SnapshotPairs, dictionary: Dictionary) -> GramMatrices:
    """``G = Psi_X^H Psi_X / M`` and ``A = Psi_X^H Psi_Y / M``.

    The conjugate transpose keeps ``G`` Hermitian positive semidefinite for
    complex dictionaries; for real features it is the plain transpose.
    """
    if len(pairs) < 1:
        raise InsufficientDataError("at least one snapshot pair is required")
    if pairs.state_dim != dictionary.state_dim:
        raise DimensionError(f"data has dimension {pairs.state_dim}, dictionary expects {dictionary.state_dim}")
    px = dictionary.evaluate_batch(pairs.Xp)
    py = dictionary.evaluate_batch(pairs.Xf)
    m = len(pairs)
    pxh = px.conj().T
    G = pxh @ px / m
    G = 0.5 * (G + G.conj().T)
    A = pxh @ py / m
    return GramMatrices(G=G, A=A, sample_count=m)


def fit_edmd(gram: GramMatrices, dictionary: Dictionary, rank_tol: float = numerics.DEFAULT_RANK_TOL) -> KoopmanModel:
    K = numerics.pseudo_inverse(gram.G, rank_tol) @ gram.A
    return KoopmanModel(K=K, dictionary=dictionary, lam=0.0, solver_mode="pseudoinverse")


def fit_robust(
    gram: GramMatrices,
    dictionary: Dictionary,
    lam: float,
    solver_mode: str = "ridge",
    tol: float = 1e-10,
    max_iter: int = 20000,
) -> KoopmanModel:
    """Regularized fit; non-convergence is recorded in ``model.report``."""
    if not lam > 0:
        raise ConfigError("fit_robust needs lambda > 0; use fit_edmd for the unregularized fit")
    if solver_mode == "ridge":
        K, report = numerics.solve_ridge(gram.G, gram.A, lam)
    elif solver_mode == "exact-frobenius":
        K, report = numerics.solve_frobenius_regularized(gram.G, gram.A, lam, tol=tol, max_iter=max_iter)
    else:
        raise ConfigError(f"unknown solver mode {solver_mode!r}")
    return KoopmanModel(K=K, dictionary=dictionary, lam=lam, solver_mode=solver_mode, report=report)


def train_from_trajectory(
    traj,
    dictionary: Dictionary,
    enrichment: EnrichmentConfig | None = None,
    lam: float = 0.0,
    solver_mode: str = "ridge",
    tol: float = 1e-10,
    max_iter: int = 20000,
) -> KoopmanModel:
    """Enrich a trajectory, build Gram matrices and fit.

    ``lam = 0`` gives the pseudoinverse (EDMD) fit on whatever pairs the
    enrichment produced; ``lam > 0`` gives the regularized fit.
    """
    traj = np.asarray(traj, dtype=float)
    if traj.ndim != 2 or traj.shape[0] < 2:
        raise InsufficientDataError("training needs a trajectory with at least 2 states")
    if lam < 0:
        raise ConfigError("lambda must be non-negative")
    if enrichment is None:
        pairs = SnapshotPairs.from_trajectory(traj)
        provenance = None
    else:
        pairs = enrich(traj, enrichment)
        n_obs = int(pairs.observed_mask.sum())
        provenance = {
            "enrichment": enrichment.to_dict(),
            "observed_pairs": n_obs,
            "artificial_pairs": len(pairs) - n_obs,
            "total_pairs": len(pairs),
        }
    gram = build_gram(pairs, dictionary)
    if lam == 0:
        model = fit_edmd(gram, dictionary)
    else:
        model = fit_robust(gram, dictionary, lam, solver_mode, tol, max_iter)
    return dataclasses.replace(model, provenance=provenance)


def spectrum(model: KoopmanModel):
    """Eigenvalues and unit eigenvectors (columns) of ``K`` in canonical order."""
    return numerics.eig(model.K)


def spectral_radius(K) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(K))))


def eigenfunction_eval(model: KoopmanModel, index: int, x) -> complex:
    """``phi_j(x) = Psi(x) @ v_j`` for the ``index``-th eigenvector."""
    k = model.dictionary.feature_dim
    if not 0 <= index < k:
        raise DimensionError(f"eigenvector index {index} out of range for {k} features")
    _, vecs = spectrum(model)
    return complex(model.dictionary.evaluate(x) @ vecs[:, index])


def discrete_to_continuous(eigs, dt: float) -> np.ndarray:
    """Principal-branch ``log(lambda) / dt``; zero eigenvalues map to ``-inf``."""
    if not dt > 0:
        raise ConfigError("dt must be positive")
    eigs = np.asarray(eigs, dtype=np.complex128)
    out = np.full(eigs.shape, complex(-np.inf, 0.0))
    nz = eigs != 0
    out[nz] = np.log(eigs[nz]) / dt
    return out


def dominant_spectrum_distance(eigs, reference, count: int) -> float:
    """Mean distance from the ``count`` largest-modulus ``eigs`` to their nearest ``reference`` value."""
    eigs = np.asarray(eigs, dtype=np.complex128)
    reference = np.asarray(reference, dtype=np.complex128)
    top = eigs[np.argsort(-np.abs(eigs), kind="stable")][:count]
    return float(np.mean(np.min(np.abs(top[:, None] - reference[None, :]), axis=1)))


def _random_ball_matrix(rng, shape, radius):
    d = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return d * (radius * rng.random() / np.linalg.norm(d))


def worst_case_residual_sample(gram: GramMatrices, K, lam: float, n_samples: int, seed: int = 0) -> float:
    """Monte-Carlo lower bound on ``max ||(G + dG) K - (A + dA)||_F`` over ``||dG||, ||dA|| <= lam``.

    The zero perturbation is always the first of the ``n_samples`` draws,
    so the result is at least the nominal residual.
    """
    if n_samples < 1:
        raise ConfigError("n_samples must be at least 1")
    G, A = gram.G, gram.A
    K = np.asarray(K, dtype=np.complex128)
    best = float(np.linalg.norm(G @ K - A))
    if lam == 0:
        return best
    rng = np.random.default_rng(seed)
    for _ in range(n_samples - 1):
        dG = _random_ball_matrix(rng, G.shape, lam)
        dA = _random_ball_matrix(rng, A.shape, lam)
        best = max(best, float(np.linalg.norm((G + dG) @ K - (A + dA))))
    return best
