"""Reference simulators: damped oscillator ring, Stuart-Landau map, viscous Burgers.

All simulators return a :class:`Trajectory` whose first state is the
initial condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConfigError, DimensionError, InstabilityError


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray
    dt: float

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.states, dtype=float))
        if s.shape[0] < 1:
            raise DimensionError("a trajectory needs at least one state")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        object.__setattr__(self, "states", s)

    def __len__(self):
        return self.states.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self))

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]


# oscillator ring -----------------------------------------------------------


@dataclass(frozen=True)
class OscillatorRingConfig:
    n_oscillators: int = 20
    damping: float = 0.4
    dt: float = 0.01

    def __post_init__(self):
        if self.n_oscillators < 3:
            raise ConfigError("n_oscillators must be at least 3")
        if self.damping < 0:
            raise ConfigError("damping must be non-negative")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")


def ring_laplacian(n: int) -> np.ndarray:
    """Graph Laplacian of an ``n``-node cycle: 2 on the diagonal, -1 to each neighbour."""
    if n < 3:
        raise ConfigError("a ring needs at least 3 nodes")
    eye = np.eye(n)
    return 2.0 * eye - np.roll(eye, 1, axis=1) - np.roll(eye, -1, axis=1)


def oscillator_generator(cfg: OscillatorRingConfig) -> np.ndarray:
    """Continuous-time matrix of ``d/dt [theta; omega] = [[0, I], [-L, -d I]] [theta; omega]``."""
    n = cfg.n_oscillators
    return np.block(
        [
            [np.zeros((n, n)), np.eye(n)],
            [-ring_laplacian(n), -cfg.damping * np.eye(n)],
        ]
    )


def oscillator_step_matrix(cfg: OscillatorRingConfig) -> np.ndarray:
    """Exact one-step propagator ``expm(generator * dt)``."""
    return sla.expm(oscillator_generator(cfg) * cfg.dt)


def simulate_oscillators(cfg: OscillatorRingConfig, theta0, omega0, steps: int) -> Trajectory:
    theta0 = np.asarray(theta0, dtype=float)
    omega0 = np.asarray(omega0, dtype=float)
    n = cfg.n_oscillators
    if theta0.shape != (n,) or omega0.shape != (n,):
        raise DimensionError(f"initial positions and velocities must both have length {n}")
    if steps < 0:
        raise ConfigError("steps must be non-negative")
    P = oscillator_step_matrix(cfg)
    states = np.empty((steps + 1, 2 * n))
    states[0] = np.concatenate([theta0, omega0])
    for k in range(steps):
        states[k + 1] = P @ states[k]
    return Trajectory(states, cfg.dt)


def oscillator_energy(cfg: OscillatorRingConfig, states) -> np.ndarray:
    """``0.5 |omega|^2 + 0.5 theta^T L theta`` for each row of ``states``."""
    states = np.atleast_2d(states)
    n = cfg.n_oscillators
    th, om = states[:, :n], states[:, n:]
    L = ring_laplacian(n)
    return 0.5 * np.sum(om * om, axis=1) + 0.5 * np.einsum("ij,jk,ik->i", th, L, th)


# Stuart-Landau -------------------------------------------------------------


@dataclass(frozen=True)
class StuartLandauConfig:
    mu: float = 1.0
    gamma: float = 1.0
    beta: float = 0.0
    dt: float = 0.01

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigError("mu must be positive")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")


def simulate_stuart_landau(cfg: StuartLandauConfig, r0: float, theta0: float, steps: int) -> Trajectory:
    """Iterate the forward-Euler polar map; ``theta`` is kept unwrapped."""
    if not r0 > 0:
        raise ConfigError("r0 must be positive")
    if steps < 0:
        raise ConfigError("steps must be non-negative")
    states = np.empty((steps + 1, 2))
    r, th = float(r0), float(theta0)
    states[0] = r, th
    for k in range(steps):
        r, th = r + (cfg.mu * r - r**3) * cfg.dt, th + (cfg.gamma - cfg.beta * r * r) * cfg.dt
        states[k + 1] = r, th
    return Trajectory(states, cfg.dt)


# Burgers -------------------------------------------------------------------


@dataclass(frozen=True)
class BurgersConfig:
    """Viscous Burgers on ``[0, 1]`` with ``nx`` grid points including both ends."""

    viscosity: float = 0.01
    nx: int = 100
    dt: float = 0.02
    nt: int = 50

    def __post_init__(self):
        if not self.viscosity > 0:
            raise ConfigError("viscosity must be positive")
        if self.nx < 3:
            raise ConfigError("nx must be at least 3")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.nt < 0:
            raise ConfigError("nt must be non-negative")

    @property
    def dx(self) -> float:
        return 1.0 / (self.nx - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nx)


def burgers_initial_sine(cfg: BurgersConfig) -> np.ndarray:
    u0 = np.sin(2.0 * np.pi * cfg.grid)
    u0[0] = u0[-1] = 0.0
    return u0


def burgers_step_system(u, cfg: BurgersConfig):
    """Banded matrix (``solve_banded`` layout) and right-hand side for one step.

    Row ``j`` of the interior system reads::

        u_j' + a_j (u_{j+1}' - u_{j-1}') - r (u_{j+1}' - 2 u_j' + u_{j-1}') = u_j

    with ``r = k dt / dx^2`` and ``a_j = dt u_j / (2 dx)``: central
    differences, implicit in the new field, advecting velocity from the
    previous step. Whenever ``|u| dx / (2 k) <= 1`` the matrix is an
    M-matrix, so the maximum norm cannot grow.
    """
    u = np.asarray(u, dtype=float)
    r = cfg.viscosity * cfg.dt / cfg.dx**2
    a = cfg.dt * u[1:-1] / (2.0 * cfg.dx)
    m = cfg.nx - 2
    ab = np.zeros((3, m))
    ab[1] = 1.0 + 2.0 * r
    ab[0, 1:] = (a - r)[:-1]
    ab[2, :-1] = (-a - r)[1:]
    return ab, u[1:-1].copy()


def burgers_step(u, cfg: BurgersConfig) -> np.ndarray:
    ab, rhs = burgers_step_system(u, cfg)
    out = np.zeros(cfg.nx)
    out[1:-1] = sla.solve_banded((1, 1), ab, rhs, check_finite=False)
    return out


def simulate_burgers(cfg: BurgersConfig, u0=None) -> Trajectory:
    """March ``nt`` steps from ``u0`` (default ``sin(2 pi x)``) with zero Dirichlet ends."""
    u = burgers_initial_sine(cfg) if u0 is None else np.array(u0, dtype=float)
    if u.shape != (cfg.nx,):
        raise DimensionError(f"u0 must have length nx={cfg.nx}")
    if abs(u[0]) > 1e-12 or abs(u[-1]) > 1e-12:
        raise ConfigError("u0 must vanish at both boundaries")
    u[0] = u[-1] = 0.0
    states = np.empty((cfg.nt + 1, cfg.nx))
    states[0] = u
    for n in range(cfg.nt):
        u = burgers_step(u, cfg)
        if not np.all(np.isfinite(u)):
            raise InstabilityError(f"Burgers solution became non-finite at step {n + 1}", step=n + 1)
        states[n + 1] = u
    return Trajectory(states, cfg.dt)
