"""Samples, corteges and cortege ensembles.

A sample is one classical probe (position, velocity, mass) of one real
particle.  A cortege bundles exactly one sample per particle slot and acts
as a single "world" of the n-particle system: all potential interactions
happen inside it.  The ensemble stores all corteges in flat arrays
(positions and velocities of shape (N, n, dim)) so the dynamics can stay
vectorized; Sample/Cortege objects are materialized views for inspection.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ContractViolationError
from .lattice import SpatialGrid


@dataclass
class Sample:
    """One classical probe of particle `slot`."""

    slot: int
    position: np.ndarray
    velocity: np.ndarray
    mass: float


@dataclass
class Cortege:
    """An n-tuple of samples, one per slot; members[j].slot == j."""

    id: int
    members: list

    @property
    def n_particles(self):
        return len(self.members)


@dataclass(eq=False)
class CortegeEnsemble:
    """The full swarm of corteges for an n-particle system.

    positions, velocities: float64 arrays of shape (N, n, dim).
    masses: per-slot masses, shape (n,).
    ids: stable int64 identifiers, shape (N,).
    """

    positions: np.ndarray
    velocities: np.ndarray
    masses: np.ndarray
    grid: SpatialGrid
    ids: np.ndarray = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        self.masses = np.asarray(self.masses, dtype=float)
        if self.positions.ndim != 3:
            raise ConfigError(f"positions must have shape (N, n, dim), got {self.positions.shape}")
        if self.positions.shape != self.velocities.shape:
            raise ConfigError(
                f"positions/velocities shapes differ: {self.positions.shape} vs {self.velocities.shape}"
            )
        n = self.positions.shape[1]
        if self.masses.shape != (n,):
            raise ConfigError(f"masses must have shape ({n},), got {self.masses.shape}")
        if not np.all(self.masses > 0):
            raise ConfigError("all slot masses must be positive")
        if self.positions.shape[2] != self.grid.dim:
            raise ConfigError(
                f"ensemble dim {self.positions.shape[2]} does not match grid dim {self.grid.dim}"
            )
        if self.ids is None:
            self.ids = np.arange(self.positions.shape[0], dtype=np.int64)
        else:
            self.ids = np.asarray(self.ids, dtype=np.int64)
            if self.ids.shape != (self.positions.shape[0],):
                raise ConfigError("ids must have one entry per cortege")

    @property
    def n_corteges(self):
        return self.positions.shape[0]

    @property
    def n_particles(self):
        return self.positions.shape[1]

    @property
    def dim(self):
        return self.positions.shape[2]

    def copy(self):
        return CortegeEnsemble(
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            masses=self.masses.copy(),
            grid=self.grid,
            ids=self.ids.copy(),
        )

    def cortege(self, index):
        """Materialize cortege number `index` (by array row, not id)."""
        members = [
            Sample(
                slot=j,
                position=self.positions[index, j].copy(),
                velocity=self.velocities[index, j].copy(),
                mass=float(self.masses[j]),
            )
            for j in range(self.n_particles)
        ]
        return Cortege(id=int(self.ids[index]), members=members)

    def require_nonempty(self):
        if self.n_corteges == 0:
            raise ContractViolationError("operation requires a nonempty ensemble")
