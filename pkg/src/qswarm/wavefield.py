"""Grid wavefunctions and the swarm <-> wavefunction dictionary.

A wavefunction lives on the configuration-space lattice as one complex
amplitude per cell, normalized so that sum |amp|^2 * dx^(n*dim) = 1.  The
swarm picture stores the same information as samples: the cell histogram
recovers |amp|^2 and per-cell mean velocities recover the phase gradient.
Conversions go both ways:

* wavefunction -> swarm: positions are drawn cell-wise from |amp|^2 (urn
  scheme, uniform jitter inside the cell) and each sample's velocity is the
  phase gradient at its cell divided by its slot mass.
* swarm -> wavefunction: modulus is sqrt(cell density); the phase is the
  line integral of the mean mass-scaled velocity along a fixed axis-ordered
  lattice path from an anchor cell (trapezoid rule between neighbors), which
  inverts the gradient exactly for linear phases.

The amplitude-grain rule implements absolute decoherence: amplitudes whose
modulus falls below the grain are deleted and the remainder renormalized.
"""

import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .ensemble import CortegeEnsemble
from .errors import (
    AnnihilationError,
    ConfigError,
    ContractViolationError,
    GridMismatchError,
)
from .lattice import SpatialGrid, config_cells

NORM_TOL = 1e-9
# dense per-cell fields are only sensible for a few degrees of freedom
MAX_DENSE_CELLS = 50_000_000


@dataclass(frozen=True)
class UnitsConfig:
    """Unit system of the swarm <-> wavefunction dictionary (hbar fixed to 1).

    k_phase scales the phase line integral and a_vel the velocity read-out;
    they must multiply to 1 so the two directions invert each other.  With
    the defaults the per-slot coefficients are k = m/dx^2 and a = dx^2/m,
    i.e. velocity is the probability-current velocity grad(phase)/m.
    """

    masses: tuple
    hbar: float = 1.0
    k_phase: float = 1.0
    a_vel: float = 1.0

    def __post_init__(self):
        masses = tuple(float(m) for m in np.atleast_1d(np.asarray(self.masses, dtype=float)))
        if any(m <= 0 for m in masses):
            raise ConfigError("all masses must be positive")
        object.__setattr__(self, "masses", masses)
        if float(self.hbar) != 1.0:
            raise ConfigError("hbar is fixed to 1 in this unit system")
        if float(self.k_phase) * float(self.a_vel) != 1.0:
            raise ConfigError(
                f"k_phase * a_vel must equal 1 exactly, got {self.k_phase} * {self.a_vel}"
            )

    @property
    def n_particles(self):
        return len(self.masses)

    def phase_coefficient(self, slot, dx):
        """Effective k for one slot: k_phase * m / dx^2."""
        return self.k_phase * self.masses[slot] / dx**2

    def velocity_coefficient(self, slot, dx):
        """Effective a for one slot: a_vel * dx^2 / m."""
        return self.a_vel * dx**2 / self.masses[slot]


@dataclass(eq=False)
class GridWavefunction:
    """Complex amplitudes over the n-particle configuration lattice."""

    grid: SpatialGrid
    n_particles: int
    amps: np.ndarray
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        expected = self.grid.shape(self.n_particles)
        if self.amps.shape != expected:
            raise ConfigError(
                f"amplitude array shape {self.amps.shape} does not match grid shape {expected}"
            )

    @property
    def n_axes(self):
        return self.grid.dim * self.n_particles

    @property
    def cell_volume(self):
        return self.grid.cell_volume(self.n_particles)

    def density(self):
        """|amp|^2 per cell; integrates to 1 over the configuration space."""
        return np.abs(self.amps) ** 2

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2) * self.cell_volume))

    def require_normalized(self, tol=NORM_TOL):
        n = self.norm()
        if abs(n - 1.0) > tol:
            raise ContractViolationError(f"wavefunction norm {n} deviates from 1 beyond {tol}")

    def normalized(self):
        n = self.norm()
        if n == 0.0:
            raise ContractViolationError("cannot normalize the zero wavefunction")
        return GridWavefunction(self.grid, self.n_particles, self.amps / n, dict(self.flags))


@dataclass
class AmplitudeVector:
    """Association of basis labels with complex amplitudes (unit total norm)."""

    entries: dict

    def norm(self):
        return float(np.sqrt(sum(abs(v) ** 2 for v in self.entries.values())))

    def require_normalized(self, tol=NORM_TOL):
        n = self.norm()
        if abs(n - 1.0) > tol:
            raise ContractViolationError(f"amplitude vector norm {n} deviates from 1 beyond {tol}")

    def support(self):
        return set(self.entries)

    def max_modulus(self):
        return max(abs(v) for v in self.entries.values()) if self.entries else 0.0


def amplitude_grain_reduce(state, epsilon):
    """Delete every amplitude with modulus below the grain, then renormalize.

    Single pass: the threshold is applied to pre-reduction moduli only, so
    entries rescued above the grain by renormalization are not re-tested.
    Raises AnnihilationError when nothing survives (grain coarser than the
    largest amplitude).
    """
    state.require_normalized()
    eps = float(epsilon)
    if not 0.0 < eps < 1.0:
        raise ConfigError(f"grain epsilon must lie in (0, 1), got {epsilon}")
    kept = {k: v for k, v in state.entries.items() if abs(v) >= eps}
    if not kept:
        raise AnnihilationError(
            f"grain {eps} annihilates the whole state (max modulus {state.max_modulus()})"
        )
    norm = np.sqrt(sum(abs(v) ** 2 for v in kept.values()))
    return AmplitudeVector({k: v / norm for k, v in kept.items()})


# ---------------------------------------------------------------------------
# sampling


def _dense_shape(wf):
    size = 1
    for c in wf.amps.shape:
        size *= c
    if size > MAX_DENSE_CELLS:
        raise ConfigError(f"grid with {size} cells is too large for dense field operations")
    return wf.amps.shape


def born_sample(wf, count, seed, n_chunks=1):
    """Draw configuration points from |amp|^2, cell-wise with uniform jitter.

    Returns float64 positions of shape (count, n_particles, dim).  The draw
    is keyed by (seed,) through a counter-based generator with a fixed draw
    budget per sample, so the result is bitwise identical for any n_chunks
    split (chunks may be evaluated concurrently).
    """
    wf.require_normalized()
    count = int(count)
    if count < 1:
        raise ConfigError(f"sample count must be >= 1, got {count}")
    n_chunks = max(1, int(n_chunks))
    shape = _dense_shape(wf)
    p = (np.abs(wf.amps.ravel()) ** 2) * wf.cell_volume
    cum = np.cumsum(p)
    cum /= cum[-1]

    n_axes = wf.n_axes
    per = rng_mod.padded_draws(1 + n_axes)
    lo = np.tile(wf.grid.lo_array, wf.n_particles)
    dx = wf.grid.dx

    out = np.empty((count, n_axes), dtype=float)
    edges = np.linspace(0, count, n_chunks + 1).astype(int)
    for start, stop in zip(edges[:-1], edges[1:]):
        if stop == start:
            continue
        g = rng_mod.generator((seed, rng_mod.BORN), advance_blocks=start * per // 4)
        u = g.random((stop - start, per))
        flat = np.searchsorted(cum, u[:, 0], side="right")
        multi = np.unravel_index(flat, shape)
        for a in range(n_axes):
            out[start:stop, a] = lo[a] + (multi[a] + u[:, 1 + a]) * dx
    return out.reshape(count, wf.n_particles, wf.grid.dim)


def swarm_density(ensemble, grid):
    """Cell histogram of cortege configuration points, normalized to unit integral."""
    ensemble.require_nonempty()
    n = ensemble.n_particles
    shape = grid.shape(n)
    size = 1
    for c in shape:
        size *= c
    if size > MAX_DENSE_CELLS:
        raise ConfigError(f"grid with {size} cells is too large for dense field operations")
    cells = config_cells(ensemble.positions, grid)
    flat = np.ravel_multi_index(tuple(cells[:, a] for a in range(cells.shape[1])), shape)
    counts = np.bincount(flat, minlength=size).reshape(shape)
    return counts / (ensemble.n_corteges * grid.cell_volume(n))


# ---------------------------------------------------------------------------
# swarm -> wavefunction


def _cumulative_from(values, start, step):
    """Trapezoid integral along the last axis, measured from index `start`."""
    seg = 0.5 * (values[..., 1:] + values[..., :-1]) * step
    out = np.zeros_like(values)
    n = values.shape[-1]
    if start < n - 1:
        out[..., start + 1 :] = np.cumsum(seg[..., start:], axis=-1)
    if start > 0:
        back = np.cumsum(seg[..., :start][..., ::-1], axis=-1)[..., ::-1]
        out[..., :start] = -back
    return out


def _prefix_all(occ_line, start):
    """Cumulative AND along the last axis outward from index `start`."""
    out = np.zeros(occ_line.shape, dtype=bool)
    n = occ_line.shape[-1]
    fwd = np.logical_and.accumulate(occ_line[..., start:], axis=-1)
    out[..., start:] = fwd
    if start > 0:
        bwd = np.logical_and.accumulate(occ_line[..., :start + 1][..., ::-1], axis=-1)[..., ::-1]
        out[..., :start] = bwd[..., :-1]
    return out


def _path_reachable(occupied, anchor):
    """Cells whose axis-ordered lattice path from the anchor stays on occupied cells."""
    n_axes = occupied.ndim
    reach = np.ones((), dtype=bool)
    for a in range(n_axes):
        sl = (slice(None),) * (a + 1) + tuple(anchor[a + 1 :])
        line = occupied[sl]
        leg = _prefix_all(line, anchor[a])
        reach = reach[..., np.newaxis] & leg
    return reach


def wavefunction_from_swarm(ensemble, grid, units, anchor=None):
    """Reconstruct the wavefunction carried by a cortege ensemble.

    Modulus per cell is sqrt(cell density).  The phase is accumulated along
    the fixed axis-ordered lattice path from `anchor` (axis 0 first, then
    axis 1, ...), integrating k * dx^2 * vbar per step where vbar is the
    per-cell mean velocity; phase(anchor) = 0.  Empty cells get amplitude 0
    and phase 0.  If any occupied cell cannot be reached from the anchor
    without crossing empty cells, the result carries
    flags["disconnected_support"] = True.
    """
    ensemble.require_nonempty()
    n = ensemble.n_particles
    if len(units.masses) != n:
        raise ConfigError(f"units carry {len(units.masses)} masses for {n} particles")
    shape = grid.shape(n)
    size = int(np.prod(np.asarray(shape, dtype=np.int64)))
    if size > MAX_DENSE_CELLS:
        raise ConfigError(f"grid with {size} cells is too large for dense field operations")
    n_axes = grid.dim * n
    dx = grid.dx

    cells = config_cells(ensemble.positions, grid)
    flat = np.ravel_multi_index(tuple(cells[:, a] for a in range(n_axes)), shape)
    counts = np.bincount(flat, minlength=size)
    occupied = (counts > 0).reshape(shape)

    if anchor is None:
        anchor = np.unravel_index(int(np.argmax(counts)), shape)
    anchor = tuple(int(i) for i in anchor)
    if not occupied[anchor]:
        raise ContractViolationError(f"anchor cell {anchor} holds no samples")

    # mean mass-scaled velocity per cell and axis; zero on empty cells
    momentum = np.zeros((n_axes,) + shape)
    safe = np.maximum(counts, 1)
    for j in range(n):
        for k in range(grid.dim):
            a = j * grid.dim + k
            sums = np.bincount(
                flat, weights=ensemble.masses[j] * ensemble.velocities[:, j, k], minlength=size
            )
            momentum[a] = (sums / safe).reshape(shape)

    phase = np.zeros(())
    for a in range(n_axes):
        sl = (slice(None),) * (a + 1) + tuple(anchor[a + 1 :])
        leg = _cumulative_from(momentum[a][sl], anchor[a], dx) * units.k_phase
        phase = phase[..., np.newaxis] + leg

    density = (counts / (ensemble.n_corteges * grid.cell_volume(n))).reshape(shape)
    amps = np.where(occupied, np.sqrt(density) * np.exp(1j * phase), 0.0 + 0.0j)

    flags = {}
    if np.any(occupied & ~_path_reachable(occupied, anchor)):
        flags["disconnected_support"] = True
    return GridWavefunction(grid=grid, n_particles=n, amps=amps, flags=flags)


# ---------------------------------------------------------------------------
# wavefunction -> swarm


def phase_gradient(wf):
    """Per-axis phase gradient on occupied cells, via local phase differences.

    Neighbor phase steps are taken as angle(amp[i+1] * conj(amp[i])), which
    unwraps automatically as long as the phase changes by less than pi per
    cell.  Central differences where both neighbors are occupied, one-sided
    at support edges, zero (with a count in the returned info dict) where a
    cell has no occupied neighbor along the axis.
    """
    amps = wf.amps
    shape = amps.shape
    n_axes = amps.ndim
    dx = wf.grid.dx
    occupied = amps != 0
    grad = np.zeros((n_axes,) + shape)
    isolated = 0
    for a in range(n_axes):
        lo_sl = tuple(slice(0, -1) if i == a else slice(None) for i in range(n_axes))
        hi_sl = tuple(slice(1, None) if i == a else slice(None) for i in range(n_axes))
        prod = amps[hi_sl] * np.conj(amps[lo_sl])
        valid = prod != 0
        step = np.where(valid, np.angle(np.where(valid, prod, 1.0)), 0.0)

        fwd = np.zeros(shape)
        has_f = np.zeros(shape, dtype=bool)
        fwd[lo_sl] = step
        has_f[lo_sl] = valid
        bwd = np.zeros(shape)
        has_b = np.zeros(shape, dtype=bool)
        bwd[hi_sl] = step
        has_b[hi_sl] = valid

        g = np.where(
            has_f & has_b,
            (fwd + bwd) / (2.0 * dx),
            np.where(has_f, fwd / dx, np.where(has_b, bwd / dx, 0.0)),
        )
        grad[a] = np.where(occupied, g, 0.0)
        isolated += int(np.count_nonzero(occupied & ~(has_f | has_b)))
    return grad, {"isolated_cells": isolated}


def swarm_from_wavefunction(wf, count, units, seed, n_chunks=1):
    """Sample per-particle swarms from a wavefunction.

    Positions follow the Born weights via `born_sample`; each sample's
    velocity is a * dx^-2 * (phase gradient at its cell) for its slot, i.e.
    grad(phase)/mass with default units.  Returns (positions, velocities),
    both of shape (count, n_particles, dim); column j is particle j's swarm.
    """
    if len(units.masses) != wf.n_particles:
        raise ConfigError(
            f"units carry {len(units.masses)} masses for {wf.n_particles} particles"
        )
    positions = born_sample(wf, count, seed, n_chunks=n_chunks)
    grad, info = phase_gradient(wf)
    if info["isolated_cells"]:
        warnings.warn(
            f"{info['isolated_cells']} occupied cells have no occupied neighbor; "
            "their samples get zero velocity",
            stacklevel=2,
        )
    cells = config_cells(positions, wf.grid)
    n_axes = wf.n_axes
    flat = np.ravel_multi_index(tuple(cells[:, a] for a in range(n_axes)), wf.amps.shape)
    velocities = np.empty_like(positions).reshape(count, n_axes)
    dx = wf.grid.dx
    for j in range(wf.n_particles):
        coeff = units.velocity_coefficient(j, dx) / dx**2
        for k in range(wf.grid.dim):
            a = j * wf.grid.dim + k
            velocities[:, a] = coeff * grad[a].ravel()[flat]
    return positions, velocities.reshape(count, wf.n_particles, wf.grid.dim)


def cortege_ensemble_from_entangled(wf, count, units, seed, n_chunks=1):
    """Build a cortege ensemble representing an (entangled) n-particle state.

    Joint positions are drawn from |amp|^2 over the full configuration space,
    so for every region the cortege fraction tracks the quantum weight of the
    region; each drawn configuration becomes one cortege.  Velocities follow
    the per-slot phase-gradient rule.
    """
    if wf.n_particles < 1:
        raise ConfigError("wavefunction must describe at least one particle")
    positions, velocities = swarm_from_wavefunction(wf, count, units, seed, n_chunks=n_chunks)
    return CortegeEnsemble(
        positions=positions,
        velocities=velocities,
        masses=np.asarray(units.masses, dtype=float),
        grid=wf.grid,
        ids=np.arange(count, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# construction helpers and serialization


def gaussian_wavefunction(grid, center, width, velocity=None, mass=1.0, k_phase=1.0):
    """Single-particle Gaussian packet with a linear phase (mean velocity).

    Amplitudes are evaluated at cell centers and renormalized on the grid.
    """
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    velocity = (
        np.zeros(grid.dim)
        if velocity is None
        else np.broadcast_to(np.asarray(velocity, dtype=float), (grid.dim,))
    )
    width = float(width)
    if width <= 0:
        raise ConfigError(f"gaussian width must be positive, got {width}")
    axes = [grid.centers(a) for a in range(grid.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    r2 = sum((m - c) ** 2 for m, c in zip(mesh, center))
    phase = sum(k_phase * mass * v * m for m, v in zip(mesh, velocity))
    amps = np.exp(-r2 / (4.0 * width**2)) * np.exp(1j * phase)
    wf = GridWavefunction(grid=grid, n_particles=1, amps=amps)
    return wf.normalized()


def product_wavefunction(wfs):
    """Tensor product of single-particle wavefunctions on a shared grid."""
    if not wfs:
        raise ConfigError("need at least one factor")
    grid = wfs[0].grid
    amps = wfs[0].amps
    for w in wfs[1:]:
        if w.grid != grid:
            raise GridMismatchError("product factors must share one grid")
        amps = np.tensordot(amps, w.amps, axes=0)
    wf = GridWavefunction(grid=grid, n_particles=sum(w.n_particles for w in wfs), amps=amps)
    return wf.normalized()


def wavefunction_to_text(wf, target):
    """Write the columnar text form: header with grid metadata, then one row
    per cell with the cell indices, Re(amp), Im(amp)."""
    lines = [
        "# qswarm-wavefunction dim=%d n_particles=%d dx=%.17g lo=%s hi=%s"
        % (
            wf.grid.dim,
            wf.n_particles,
            wf.grid.dx,
            ",".join("%.17g" % v for v in wf.grid.lo),
            ",".join("%.17g" % v for v in wf.grid.hi),
        )
    ]
    shape = wf.amps.shape
    flat = wf.amps.ravel()
    for i, amp in enumerate(flat):
        idx = np.unravel_index(i, shape)
        lines.append(
            " ".join(str(int(v)) for v in idx)
            + " %.17g %.17g" % (amp.real, amp.imag)
        )
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)


def wavefunction_from_text(source):
    """Parse the columnar text form written by `wavefunction_to_text`."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# qswarm-wavefunction"):
        raise ConfigError("not a wavefunction text file (missing header)")
    meta = dict(tok.split("=", 1) for tok in lines[0].split()[2:])
    dim = int(meta["dim"])
    n_particles = int(meta["n_particles"])
    grid = SpatialGrid(
        dim=dim,
        lo=tuple(float(v) for v in meta["lo"].split(",")),
        hi=tuple(float(v) for v in meta["hi"].split(",")),
        dx=float(meta["dx"]),
    )
    shape = grid.shape(n_particles)
    amps = np.zeros(shape, dtype=complex)
    n_axes = dim * n_particles
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != n_axes + 2:
            raise ConfigError(f"malformed wavefunction row: {ln!r}")
        idx = tuple(int(p) for p in parts[:n_axes])
        amps[idx] = float(parts[-2]) + 1j * float(parts[-1])
    return GridWavefunction(grid=grid, n_particles=n_particles, amps=amps)
