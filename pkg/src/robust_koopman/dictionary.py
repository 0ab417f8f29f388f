"""Observable dictionaries lifting physical states to feature space.

A lifted state is a complex *row* vector; stacking rows gives the feature
matrix whose Gram products define the Koopman regression.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import ConfigError, DimensionError

KINDS = ("linear", "fourier", "monomial")


@dataclass(frozen=True)
class Dictionary:
    """A finite family of observables ``psi_1 .. psi_K`` on an ``N``-dim state.

    Use the :func:`linear`, :func:`fourier` and :func:`monomial` constructors
    rather than building one by hand; they fill in ``params`` consistently.
    """

    name: str
    kind: str
    state_dim: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown dictionary kind {self.kind!r}")
        if self.state_dim < 1:
            raise ConfigError("state_dim must be at least 1")
        if self.kind == "fourier":
            n_max, j = self.params.get("n_max"), self.params.get("coord_index")
            if n_max is None or n_max < 0:
                raise ConfigError("fourier dictionary needs n_max >= 0")
            if j is None or not 0 <= j < self.state_dim:
                raise ConfigError(f"fourier coord_index must lie in [0, {self.state_dim})")
        if self.kind == "monomial" and self.params.get("max_degree", -1) < 0:
            raise ConfigError("monomial dictionary needs max_degree >= 0")

    @property
    def feature_dim(self) -> int:
        if self.kind == "linear":
            return self.state_dim
        if self.kind == "fourier":
            return 2 * self.params["n_max"] + 1
        return comb(self.state_dim + self.params["max_degree"], self.params["max_degree"])

    def describe(self) -> dict:
        """Descriptor stored in model files."""
        return {"name": self.name, "kind": self.kind, "state_dim": self.state_dim, "parameters": dict(self.params)}

    @classmethod
    def from_description(cls, desc: dict) -> "Dictionary":
        try:
            return cls(
                name=desc["name"],
                kind=desc["kind"],
                state_dim=int(desc["state_dim"]),
                params={k: int(v) for k, v in desc.get("parameters", {}).items()},
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed dictionary descriptor: {desc!r}") from exc

    # evaluation ------------------------------------------------------------
    def evaluate(self, x) -> np.ndarray:
        """Lift one state to a complex row vector of length ``feature_dim``."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise DimensionError(f"state must be a vector, got shape {x.shape}")
        return self.evaluate_batch(x[None, :])[0]

    def evaluate_batch(self, X) -> np.ndarray:
        """Lift each row of ``X`` (M x N); returns an M x K complex matrix.

        An empty batch gives a ``0 x K`` matrix.
        """
        X = np.asarray(X, dtype=float)
        if X.size == 0:
            return np.zeros((0, self.feature_dim), dtype=np.complex128)
        if X.ndim != 2 or X.shape[1] != self.state_dim:
            raise DimensionError(f"expected states of dimension {self.state_dim}, got array of shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DimensionError("states must be finite")
        if self.kind == "linear":
            return X.astype(np.complex128)
        if self.kind == "fourier":
            n = self.params["n_max"]
            freqs = np.arange(-n, n + 1)
            return np.exp(1j * np.outer(X[:, self.params["coord_index"]], freqs))
        return _monomials(X, self.params["max_degree"]).astype(np.complex128)


def _monomials(X, degree):
    # graded-lex: constant, then each total degree in combinations order
    cols = [np.ones(X.shape[0])]
    for d in range(1, degree + 1):
        for idx in itertools.combinations_with_replacement(range(X.shape[1]), d):
            cols.append(np.prod(X[:, idx], axis=1))
    return np.column_stack(cols)


def linear(state_dim: int, name: str = "linear") -> Dictionary:
    return Dictionary(name=name, kind="linear", state_dim=state_dim)


def fourier(state_dim: int, n_max: int, coord_index: int, name: str = "fourier") -> Dictionary:
    """``exp(i k x_j)`` for ``k = -n_max .. n_max``, in ascending frequency."""
    return Dictionary(name=name, kind="fourier", state_dim=state_dim, params={"n_max": n_max, "coord_index": coord_index})


def monomial(state_dim: int, max_degree: int, name: str = "monomial") -> Dictionary:
    return Dictionary(name=name, kind="monomial", state_dim=state_dim, params={"max_degree": max_degree})


def parse_spec(text: str, state_dim: int) -> Dictionary:
    """Build a dictionary from a short CLI form.

    Accepted forms are ``linear``, ``fourier:<n_max>:<coord>`` and
    ``monomial:<degree>``.
    """
    parts = text.strip().split(":")
    try:
        if parts[0] == "linear" and len(parts) == 1:
            return linear(state_dim)
        if parts[0] == "fourier" and len(parts) == 3:
            return fourier(state_dim, int(parts[1]), int(parts[2]))
        if parts[0] == "monomial" and len(parts) == 2:
            return monomial(state_dim, int(parts[1]))
    except ValueError as exc:
        raise ConfigError(f"bad dictionary descriptor {text!r}") from exc
    raise ConfigError(f"bad dictionary descriptor {text!r}; use linear, fourier:<n>:<coord> or monomial:<d>")
