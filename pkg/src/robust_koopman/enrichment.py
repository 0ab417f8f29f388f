"""Bounded-perturbation data enrichment for sparse snapshot sets.

Artificial snapshot pairs are built by perturbing observed states inside a
Euclidean ball. Two constructions are supported:

``trajectory``
    Perturb every point of a trajectory, then re-pair by time shift.
``pairs``
    Perturb both members of each observed pair ``(x_i, y_i)``.

``coupling`` says how the output perturbation relates to the input one.
With ``independent`` every perturbation is drawn separately. With
``shared`` a single draw moves input and output together. In trajectory
mode that is one offset per replicate trajectory. In pairs mode the output
offset is ``(output_radius / radius) * dx``, i.e. a first-order image of
``dx`` under a map whose Jacobian is approximated by a multiple of the
identity.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, InsufficientDataError

OBSERVED = "observed"
ARTIFICIAL = "artificial"


@dataclass(frozen=True)
class SnapshotPairs:
    """Snapshot pairs ``(Xp[m], Xf[m])`` with ``Xf[m]`` one step after ``Xp[m]``.

    ``parent[m]`` is the index of the observed pair that artificial pair
    ``m`` perturbs (observed pairs point at themselves).
    """

    Xp: np.ndarray
    Xf: np.ndarray
    origin: tuple = field(default=())
    parent: np.ndarray = field(default=None)

    def __post_init__(self):
        Xp = np.atleast_2d(np.asarray(self.Xp, dtype=float))
        Xf = np.atleast_2d(np.asarray(self.Xf, dtype=float))
        if Xp.shape != Xf.shape or Xp.shape[0] < 1 or Xp.size == 0:
            raise DimensionError(f"Xp and Xf must be non-empty with equal shapes, got {Xp.shape} and {Xf.shape}")
        m = Xp.shape[0]
        origin = tuple(self.origin) if self.origin else (OBSERVED,) * m
        parent = np.arange(m) if self.parent is None else np.asarray(self.parent, dtype=int)
        if len(origin) != m or parent.shape != (m,):
            raise DimensionError("origin and parent must have one entry per pair")
        object.__setattr__(self, "Xp", Xp)
        object.__setattr__(self, "Xf", Xf)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "parent", parent)

    def __len__(self):
        return self.Xp.shape[0]

    @property
    def state_dim(self) -> int:
        return self.Xp.shape[1]

    @property
    def observed_mask(self) -> np.ndarray:
        return np.array([o == OBSERVED for o in self.origin])

    @classmethod
    def from_trajectory(cls, traj) -> "SnapshotPairs":
        traj = np.asarray(traj, dtype=float)
        if traj.ndim != 2 or traj.shape[0] < 2:
            raise InsufficientDataError(f"a trajectory needs at least 2 states, got {traj.shape[0] if traj.ndim else 0}")
        return cls(traj[:-1], traj[1:])


@dataclass(frozen=True)
class EnrichmentConfig:
    """Parameters of the artificial-data generator.

    ``radius`` bounds input perturbations (state units). ``output_radius``
    bounds pairs-mode output perturbations and defaults to
    ``radius * lipschitz``. ``total``, when set, overrides ``multiplier``:
    artificial pairs are added until the set holds ``total`` pairs, cycling
    through replicates and truncating the last one.
    """

    radius: float = 0.1
    multiplier: int = 1
    seed: int = 0
    mode: str = "trajectory"
    output_radius: float | None = None
    lipschitz: float = 1.0
    coupling: str = "independent"
    total: int | None = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError("enrichment radius must be positive")
        if self.multiplier < 0:
            raise ConfigError("enrichment multiplier must be non-negative")
        if self.mode not in ("trajectory", "pairs"):
            raise ConfigError(f"enrichment mode must be 'trajectory' or 'pairs', got {self.mode!r}")
        if self.coupling not in ("independent", "shared"):
            raise ConfigError(f"enrichment coupling must be 'independent' or 'shared', got {self.coupling!r}")
        if self.output_radius is not None and self.output_radius < 0:
            raise ConfigError("output_radius must be non-negative")
        if self.lipschitz < 0:
            raise ConfigError("lipschitz estimate must be non-negative")
        if self.total is not None and self.total < 1:
            raise ConfigError("total must be positive")

    @property
    def effective_output_radius(self) -> float:
        return self.radius * self.lipschitz if self.output_radius is None else self.output_radius

    def artificial_count(self, n_observed: int) -> int:
        if self.total is None:
            return self.multiplier * n_observed
        if self.total < n_observed:
            raise ConfigError(f"total={self.total} is smaller than the {n_observed} observed pairs")
        return self.total - n_observed

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EnrichmentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown enrichment fields: {sorted(unknown)}")
        return cls(**d)


def sample_ball(rng: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    """``count`` points uniform in the solid ``dim``-ball of the given radius."""
    if radius == 0 or count == 0:
        return np.zeros((count, dim))
    g = rng.standard_normal((count, dim))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0] = 1.0
    r = radius * rng.random(count) ** (1.0 / dim)
    return g * (r / norms)[:, None]


def _assemble(observed: SnapshotPairs, art_p, art_f, art_parent) -> SnapshotPairs:
    n_art = len(art_parent)
    return SnapshotPairs(
        Xp=np.vstack([observed.Xp] + art_p) if n_art else observed.Xp,
        Xf=np.vstack([observed.Xf] + art_f) if n_art else observed.Xf,
        origin=(OBSERVED,) * len(observed) + (ARTIFICIAL,) * n_art,
        parent=np.concatenate([np.arange(len(observed))] + [np.asarray(art_parent, dtype=int)]),
    )


def enrich_trajectory(traj, cfg: EnrichmentConfig) -> SnapshotPairs:
    """Observed pairs of ``traj`` followed by pairs from perturbed replicates.

    Each replicate perturbs every trajectory point inside the ``radius``
    ball and re-pairs the perturbed points by one time step.
    """
    if cfg.mode != "trajectory":
        raise ConfigError("enrich_trajectory requires mode='trajectory'")
    observed = SnapshotPairs.from_trajectory(traj)
    traj = np.vstack([observed.Xp, observed.Xf[-1:]])
    n_pts, dim = traj.shape
    n_obs = n_pts - 1
    remaining = cfg.artificial_count(n_obs)
    rng = np.random.default_rng(cfg.seed)
    art_p, art_f, art_parent = [], [], []
    while remaining > 0:
        if cfg.coupling == "shared":
            delta = np.repeat(sample_ball(rng, 1, dim, cfg.radius), n_pts, axis=0)
        else:
            delta = sample_ball(rng, n_pts, dim, cfg.radius)
        perturbed = traj + delta
        take = min(remaining, n_obs)
        art_p.append(perturbed[:take])
        art_f.append(perturbed[1 : take + 1])
        art_parent.extend(range(take))
        remaining -= take
    return _assemble(observed, art_p, art_f, art_parent)


def enrich_pairs(pairs: SnapshotPairs, cfg: EnrichmentConfig) -> SnapshotPairs:
    """Observed pairs followed by ``(x_i + dx_i, y_i + dy_i)`` replicates.

    Only the observed pairs of ``pairs`` are used as seeds; any artificial
    pairs already present are discarded.
    """
    if cfg.mode != "pairs":
        raise ConfigError("enrich_pairs requires mode='pairs'")
    mask = pairs.observed_mask
    observed = SnapshotPairs(pairs.Xp[mask], pairs.Xf[mask])
    n_obs, dim = observed.Xp.shape
    remaining = cfg.artificial_count(n_obs)
    out_r = cfg.effective_output_radius
    rng = np.random.default_rng(cfg.seed)
    art_p, art_f, art_parent = [], [], []
    while remaining > 0:
        take = min(remaining, n_obs)
        dx = sample_ball(rng, n_obs, dim, cfg.radius)
        if cfg.coupling == "shared":
            dy = dx * (out_r / cfg.radius)
        else:
            dy = sample_ball(rng, n_obs, dim, out_r)
        art_p.append((observed.Xp + dx)[:take])
        art_f.append((observed.Xf + dy)[:take])
        art_parent.extend(range(take))
        remaining -= take
    return _assemble(observed, art_p, art_f, art_parent)


def enrich(traj, cfg: EnrichmentConfig) -> SnapshotPairs:
    """Dispatch on ``cfg.mode`` starting from a trajectory."""
    if cfg.mode == "trajectory":
        return enrich_trajectory(traj, cfg)
    return enrich_pairs(SnapshotPairs.from_trajectory(traj), cfg)
