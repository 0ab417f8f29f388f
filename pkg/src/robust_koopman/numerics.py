"""Complex dense linear algebra and the two regularized Gram-matrix solvers.

Every matrix in this package is a 2-D ``complex128`` ndarray; real inputs are
embedded with zero imaginary part by :func:`as_cmatrix`.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, NumericalFailure

DEFAULT_RANK_TOL = 1e-12
SOLVER_MODES = ("ridge", "exact-frobenius")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a regularized solve.

    ``objective_value`` is the objective the solver minimized: the squared
    ridge objective in ``ridge`` mode and the non-squared Frobenius objective
    in ``exact-frobenius`` mode. ``pseudoinverse_fallback`` is set when a
    ``lambda = 0`` ridge solve met a singular Gram matrix.
    """

    objective_value: float
    iterations: int
    converged: bool
    mode: str
    pseudoinverse_fallback: bool = False


def as_cmatrix(m, name="matrix") -> np.ndarray:
    """Validate ``m`` as a finite, non-empty 2-D array and return a complex copy."""
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalFailure(f"{name} contains non-finite entries")
    return a


def _svd(m):
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge for {m.shape[0]}x{m.shape[1]} input") from exc


def pseudo_inverse(m, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse through the SVD.

    Singular values at or below ``rank_tol`` times the largest one are
    treated as zero.
    """
    if rank_tol < 0:
        raise ConfigError("rank_tol must be non-negative")
    m = as_cmatrix(m)
    u, s, vh = _svd(m)
    keep = s > rank_tol * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (vh.conj().T * inv_s) @ u.conj().T


def _eig_order(a: complex, b: complex, tol: float) -> int:
    for x, y in ((abs(a), abs(b)), (a.real, b.real), (a.imag, b.imag)):
        if abs(x - y) > tol:
            return -1 if x > y else 1
    return 0


def eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Right eigenpairs sorted by modulus, then real part, then imaginary part.

    All three keys are descending. Values closer than ``1e-10`` times the
    spectral scale count as tied so conjugate pairs order deterministically
    despite rounding. Eigenvectors are unit 2-norm with their largest
    component rotated to the positive real axis.
    """
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"eig requires a square matrix, got {m.shape}")
    try:
        w, v = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue iteration failed for {m.shape[0]}x{m.shape[1]} input") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise NumericalFailure("eigendecomposition produced non-finite values")
    tol = 1e-10 * max(1.0, float(np.max(np.abs(w))))
    order = sorted(range(len(w)), key=functools.cmp_to_key(lambda i, j: _eig_order(w[i], w[j], tol)))
    w = w[order]
    v = v[:, order]
    v = v / np.linalg.norm(v, axis=0)
    pivot = v[np.argmax(np.abs(v), axis=0), np.arange(v.shape[1])]
    v = v * (np.abs(pivot) / pivot)
    return w, v


def _check_pair(G, A):
    G = as_cmatrix(G, "G")
    A = as_cmatrix(A, "A")
    if G.shape[0] != G.shape[1] or A.shape != G.shape:
        raise DimensionError(f"G and A must be square with equal size, got {G.shape} and {A.shape}")
    return G, A


def ridge_objective(G, A, K, lam) -> float:
    return float(np.linalg.norm(G @ K - A) ** 2 + lam * np.linalg.norm(K) ** 2)


def frobenius_objective(G, A, K, lam) -> float:
    return float(np.linalg.norm(G @ K - A) + lam * np.linalg.norm(K))


def solve_ridge(G, A, lam: float, rank_tol: float = DEFAULT_RANK_TOL):
    """Minimize ``||G K - A||_F^2 + lam ||K||_F^2``.

    The closed form ``(G^H G + lam I)^{-1} G^H A`` is evaluated through the
    SVD of ``G`` as ``V diag(s / (s^2 + lam)) U^H A``, which avoids squaring
    the condition number of ``G``. At ``lam = 0`` a numerically singular
    ``G`` falls back to the pseudoinverse and sets the report flag.
    """
    if lam < 0:
        raise ConfigError("lambda must be non-negative")
    G, A = _check_pair(G, A)
    u, s, vh = _svd(G)
    fallback = False
    if lam == 0:
        singular = s[0] == 0 or s[-1] <= rank_tol * s[0]
        if singular:
            fallback = True
            K = pseudo_inverse(G, rank_tol) @ A
        else:
            K = (vh.conj().T / s) @ (u.conj().T @ A)
    else:
        K = (vh.conj().T * (s / (s * s + lam))) @ (u.conj().T @ A)
    report = SolveReport(
        objective_value=ridge_objective(G, A, K, lam),
        iterations=0,
        converged=True,
        mode="ridge",
        pseudoinverse_fallback=fallback,
    )
    return K, report


def _prox_frobenius(K, threshold):
    # proximal map of threshold * ||K||_F (block soft-thresholding)
    nk = np.linalg.norm(K)
    if nk <= threshold:
        return np.zeros_like(K)
    return K * (1.0 - threshold / nk)


def solve_frobenius_regularized(
    G,
    A,
    lam: float,
    tol: float = 1e-10,
    max_iter: int = 20000,
    rank_tol: float = DEFAULT_RANK_TOL,
):
    """Approximately minimize ``||G K - A||_F + lam ||K||_F``.

    Accelerated proximal gradient on a smoothed residual term
    ``sqrt(||G K - A||_F^2 + eps^2)`` with the regularizer handled exactly by
    its proximal map (block soft-thresholding). The gradient of the smoothed
    term is ``L / eps`` Lipschitz with ``L = sigma_max(G)^2``, so each stage
    uses step ``eps / L``. When a stage stalls, ``eps`` shrinks tenfold and
    the step with it, down to ``eps = tol * scale``. Momentum restarts
    whenever the objective goes up.

    The start point is the ``lam = 0`` ridge solution. The best iterate under
    the exact objective is returned, so the result never scores worse than
    the start. ``converged`` means the final stage reached a relative
    objective decrease below ``tol`` within ``max_iter`` total iterations.
    """
    if lam < 0:
        raise ConfigError("lambda must be non-negative")
    if tol <= 0 or max_iter < 1:
        raise ConfigError("tol must be positive and max_iter at least 1")
    G, A = _check_pair(G, A)
    K, _ = solve_ridge(G, A, 0.0, rank_tol)
    best_K = K
    best_f = frobenius_objective(G, A, K, lam)
    scale = max(float(np.linalg.norm(A)), lam * float(np.linalg.norm(K)), np.finfo(float).tiny)
    smax = float(np.linalg.norm(G, 2))
    L = smax * smax if smax > 0 else 1.0
    Gh = G.conj().T

    def smoothed(K, eps):
        return float(np.sqrt(np.linalg.norm(G @ K - A) ** 2 + eps * eps) + lam * np.linalg.norm(K))

    eps = scale
    eps_final = tol * scale
    it = 0
    converged = best_f == 0.0
    while not converged and it < max_iter:
        step = eps / L
        Y, K_prev, t = K, K, 1.0
        f_prev = smoothed(K, eps)
        stage_done = False
        while it < max_iter:
            it += 1
            R = G @ Y - A
            grad = Gh @ R / np.sqrt(np.linalg.norm(R) ** 2 + eps * eps)
            K_new = _prox_frobenius(Y - step * grad, step * lam)
            f_new = smoothed(K_new, eps)
            exact = frobenius_objective(G, A, K_new, lam)
            if exact < best_f:
                best_K, best_f = K_new, exact
            if f_new > f_prev:
                # restart momentum from the last accepted point
                Y, t = K, 1.0
                continue
            rel = (f_prev - f_new) / max(f_prev, np.finfo(float).tiny)
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            Y = K_new + ((t - 1.0) / t_next) * (K_new - K_prev)
            K_prev, K, t, f_prev = K_new, K_new, t_next, f_new
            if rel < tol:
                stage_done = True
                break
        if not stage_done:
            break
        if eps <= eps_final:
            converged = True
        eps = max(eps / 10.0, eps_final)
    report = SolveReport(objective_value=best_f, iterations=it, converged=converged, mode="exact-frobenius")
    return best_K, report
