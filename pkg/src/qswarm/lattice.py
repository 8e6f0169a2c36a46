"""Regular-grid geometry.

One cell convention serves three spaces: the single-particle space, the
n-particle configuration space (the n-fold product of the former), and the
doubled (initial, final) configuration space that selection groups over.
Cells are half-open cubes [lo + i*dx, lo + (i+1)*dx); the last cell along
each axis absorbs the upper edge of the extent so that reflected samples
sitting exactly on the wall still have a home.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, OutOfDomainError


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform cubic mesh over a box extent, per-particle.

    dim is the spatial dimension of one particle (1 to 3); lo/hi are the
    per-axis extent bounds; dx is the cell side.  cells_per_axis is derived
    as ceil((hi - lo) / dx).
    """

    dim: int
    lo: tuple
    hi: tuple
    dx: float
    cells_per_axis: tuple = None

    def __post_init__(self):
        if not 1 <= int(self.dim) <= 3:
            raise ConfigError(f"grid dim must be 1..3, got {self.dim}")
        lo = np.broadcast_to(np.asarray(self.lo, dtype=float), (self.dim,))
        hi = np.broadcast_to(np.asarray(self.hi, dtype=float), (self.dim,))
        if not float(self.dx) > 0.0:
            raise ConfigError(f"grid dx must be positive, got {self.dx}")
        if not np.all(hi > lo):
            raise ConfigError(f"grid extent must satisfy hi > lo, got lo={lo}, hi={hi}")
        cells = np.ceil((hi - lo) / float(self.dx) - 1e-12).astype(int)
        cells = np.maximum(cells, 1)
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "lo", tuple(float(v) for v in lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in hi))
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "cells_per_axis", tuple(int(c) for c in cells))

    @property
    def lo_array(self):
        return np.asarray(self.lo, dtype=float)

    @property
    def hi_array(self):
        return np.asarray(self.hi, dtype=float)

    @property
    def cells_array(self):
        return np.asarray(self.cells_per_axis, dtype=np.int64)

    def shape(self, n_particles=1):
        """Array shape of a field over the n-particle configuration space."""
        return tuple(self.cells_per_axis) * int(n_particles)

    def cell_volume(self, n_particles=1):
        return float(self.dx) ** (self.dim * int(n_particles))

    def centers(self, axis=0):
        """Cell-center coordinates along one axis."""
        n = self.cells_per_axis[axis]
        return self.lo[axis] + (np.arange(n) + 0.5) * self.dx


class DoubleCellIndex(NamedTuple):
    """Cell of the doubled configuration space: (initial cell, final cell)."""

    ini: tuple
    fin: tuple


def cell_of(position, grid):
    """Map positions to half-open grid cells.

    Accepts a single point of shape (dim,) and returns a tuple, or a batch of
    shape (..., dim) and returns an int64 array of the same leading shape.
    Positions must satisfy lo <= x <= hi; the upper bound maps into the last
    cell.  Anything outside raises OutOfDomainError naming the first
    offending axis.
    """
    pos = np.asarray(position, dtype=float)
    if pos.shape[-1:] != (grid.dim,):
        raise ConfigError(
            f"position has {pos.shape[-1] if pos.ndim else 0} components, grid dim is {grid.dim}"
        )
    lo = grid.lo_array
    hi = grid.hi_array
    bad_low = pos < lo
    bad_high = pos > hi
    if bad_low.any() or bad_high.any():
        bad = bad_low | bad_high
        flat = bad.reshape(-1, grid.dim)
        row, axis = np.argwhere(flat)[0]
        value = pos.reshape(-1, grid.dim)[row, axis]
        raise OutOfDomainError(
            f"position component {value!r} outside extent "
            f"[{grid.lo[axis]}, {grid.hi[axis]}] on axis {int(axis)}",
            axis=int(axis),
        )
    idx = np.floor((pos - lo) / grid.dx).astype(np.int64)
    np.minimum(idx, grid.cells_array - 1, out=idx)
    if pos.ndim == 1:
        return tuple(int(i) for i in idx)
    return idx


def config_cells(positions, grid):
    """Cells of n-particle configuration points.

    positions has shape (..., n, dim); the result is int64 of shape
    (..., n*dim), slot-major (slot 0 axes first).
    """
    pos = np.asarray(positions, dtype=float)
    idx = cell_of(pos, grid)
    return idx.reshape(pos.shape[:-2] + (-1,))


def double_cell_of(ini_positions, fin_positions, grid):
    """Cell of an (initial, final) configuration pair in the doubled space."""
    ini = np.atleast_2d(np.asarray(ini_positions, dtype=float))
    fin = np.atleast_2d(np.asarray(fin_positions, dtype=float))
    if ini.shape != fin.shape:
        raise ConfigError(f"initial/final shapes differ: {ini.shape} vs {fin.shape}")
    ini_cells = config_cells(ini[np.newaxis], grid)[0]
    fin_cells = config_cells(fin[np.newaxis], grid)[0]
    return DoubleCellIndex(
        ini=tuple(int(i) for i in ini_cells),
        fin=tuple(int(i) for i in fin_cells),
    )


def pack_cells(cells, grid, n_particles):
    """Collapse per-axis cell indices (N, n*dim) into scalar keys when safe.

    Returns an int64 key array when the full index range fits in 62 bits,
    otherwise None (callers then group on rows directly).
    """
    cells = np.asarray(cells)
    base = list(grid.cells_per_axis) * int(n_particles)
    total = 1
    for b in base:
        total *= int(b)
    if total >= 2**62:
        return None
    keys = np.zeros(cells.shape[:-1], dtype=np.int64)
    for a, b in enumerate(base):
        keys *= b
        keys += cells[..., a]
    return keys
