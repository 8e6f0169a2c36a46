"""Potential specifications used by both the swarm dynamics and the reference solver.

External potentials act on single-particle coordinates (radial for the
anharmonic kinds); pair potentials act on the scalar separation between two
samples of the same cortege.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

KINDS = ("zero", "harmonic", "morse", "tabulated")


def morse_potential(r, depth, alpha, r0):
    """Morse well: depth*(1 - exp(-alpha*(r - r0)))**2 - depth.

    Minimum -depth at r = r0, asymptote 0 as r -> inf.
    """
    u = np.exp(-alpha * (np.asarray(r, dtype=float) - r0))
    return depth * (1.0 - u) ** 2 - depth


def morse_gradient(r, depth, alpha, r0):
    """dV/dr of the Morse well."""
    u = np.exp(-alpha * (np.asarray(r, dtype=float) - r0))
    return 2.0 * depth * alpha * u * (1.0 - u)


@dataclass(frozen=True)
class PotentialSpec:
    """One potential: zero, harmonic(omega), morse(depth, alpha, r0) or tabulated.

    Tabulated potentials interpolate linearly on (table_r, table_v) and are
    clamped at the table ends.  Harmonic energy carries the mass
    (V = m*omega^2*|r|^2/2) so the classical frequency is mass independent.
    """

    kind: str
    omega: float = 0.0
    depth: float = 0.0
    alpha: float = 0.0
    r0: float = 0.0
    table_r: tuple = field(default=())
    table_v: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown potential kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "tabulated":
            r = np.asarray(self.table_r, dtype=float)
            v = np.asarray(self.table_v, dtype=float)
            if r.size < 2 or r.size != v.size:
                raise ConfigError("tabulated potential needs matching tables with >= 2 entries")
            if not np.all(np.diff(r) > 0):
                raise ConfigError("tabulated potential abscissae must be strictly increasing")
            if not (np.isfinite(r).all() and np.isfinite(v).all()):
                raise ConfigError("tabulated potential contains non-finite entries")
            object.__setattr__(self, "table_r", tuple(float(x) for x in r))
            object.__setattr__(self, "table_v", tuple(float(x) for x in v))

    @classmethod
    def zero(cls):
        return cls(kind="zero")

    @classmethod
    def harmonic(cls, omega):
        return cls(kind="harmonic", omega=float(omega))

    @classmethod
    def morse(cls, depth, alpha, r0):
        return cls(kind="morse", depth=float(depth), alpha=float(alpha), r0=float(r0))

    @classmethod
    def tabulated(cls, table_r, table_v):
        return cls(kind="tabulated", table_r=tuple(table_r), table_v=tuple(table_v))

    # -- scalar (separation / radial) form ----------------------------------

    def value(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "harmonic":
            return 0.5 * self.omega**2 * r**2
        if self.kind == "morse":
            return morse_potential(r, self.depth, self.alpha, self.r0)
        return np.interp(r, self.table_r, self.table_v)

    def gradient(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "harmonic":
            return self.omega**2 * r
        if self.kind == "morse":
            return morse_gradient(r, self.depth, self.alpha, self.r0)
        tr = np.asarray(self.table_r)
        tv = np.asarray(self.table_v)
        slopes = np.gradient(tv, tr)
        return np.interp(r, tr, slopes)

    # -- external (vector coordinate) form -----------------------------------

    def external_value(self, points, mass=1.0):
        """Potential energy at coordinates of shape (..., dim)."""
        pts = np.asarray(points, dtype=float)
        if self.kind == "zero":
            return np.zeros(pts.shape[:-1])
        if self.kind == "harmonic":
            return 0.5 * mass * self.omega**2 * np.sum(pts**2, axis=-1)
        r = np.sqrt(np.sum(pts**2, axis=-1))
        return self.value(r)

    def external_force(self, points, mass=1.0):
        """-grad V at coordinates of shape (..., dim)."""
        pts = np.asarray(points, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(pts)
        if self.kind == "harmonic":
            return -mass * self.omega**2 * pts
        r = np.sqrt(np.sum(pts**2, axis=-1))
        dvdr = self.gradient(r)
        # radial direction; force 0 exactly at the origin
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[..., None] > 0, pts / np.where(r[..., None] > 0, r[..., None], 1.0), 0.0)
        return -dvdr[..., None] * unit
