"""Bethe wave functions on the alcove and their wall (Robin) residuals.

A Bethe wave is a Weyl-symmetrized superposition of plane waves with
c-function coefficients.  It is a Laplacian eigenfunction for every spectral
point; the wall condition (inward derivative = coupling times value) holds
exactly when the spectral point solves the Bethe equations, which makes the
wall residual the discriminating certificate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .baesolver import Coupling, PoleError
from .rootsys import DominantWeight, RootSystem, WeylGroup

__all__ = [
    "WallSample",
    "BetheWave",
    "c_function",
    "bethe_value",
    "bethe_directional_derivative",
    "boundary_residual",
    "boundary_residual_by_wall",
    "free_wave",
    "wall_coupling",
    "wall_normal",
    "write_grid_csv",
]

# c-function evaluations reject pairings below this threshold instead of
# amplifying rounding noise; chamber-interior spectral points never trip it.
POLE_THRESHOLD = 1e-8

_EVAL_CHUNK = 1 << 16


def c_function(rs: RootSystem, k: Coupling, lam) -> complex:
    """Product over positive roots of (<lam,a^vee> - i k_a) / <lam,a^vee>.

    Zero coupling gives exactly 1.  Raises PoleError when some pairing is
    within POLE_THRESHOLD of zero.
    """
    if k.is_zero:
        return 1.0 + 0.0j
    lam = np.asarray(lam, dtype=float)
    x = rs.positive_coroots @ lam
    bad = int(np.argmin(np.abs(x)))
    if abs(x[bad]) < POLE_THRESHOLD:
        raise PoleError(
            f"c-function pole: |<lam, alpha^vee>| = {abs(x[bad]):.2e} for {rs.describe_positive(bad)}"
        )
    ka = k.on_positive_roots(rs)
    return complex(np.prod((x - 1j * ka) / x))


class BetheWave:
    """Weyl-symmetrized plane-wave eigenfunction for a fixed spectral point.

    Precomputes the Weyl orbit of the spectral point and the c-function
    coefficient of each branch, in the deterministic enumeration order of the
    group, so repeated evaluations and batch evaluations are cheap.
    """

    def __init__(self, rs: RootSystem, weyl: WeylGroup, k: Coupling, lam):
        self.rs = rs
        self.coupling = k
        self.lam = np.asarray(lam, dtype=float)
        self.orbit = weyl.elements @ self.lam  # (#W, n)
        if k.is_zero:
            self.coefficients = np.ones(len(self.orbit), dtype=complex)
        else:
            self.coefficients = np.array([c_function(rs, k, wl) for wl in self.orbit])
        self._scale = 1.0 / len(self.orbit)

    @property
    def eigenvalue(self) -> float:
        return float(self.lam @ self.lam)

    def at(self, v):
        """Value at a point (n,) or batch of points (m, n)."""
        v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            return complex(self.coefficients @ np.exp(1j * (self.orbit @ v)) * self._scale)
        out = np.empty(len(v), dtype=complex)
        for lo in range(0, len(v), _EVAL_CHUNK):
            block = v[lo : lo + _EVAL_CHUNK]
            out[lo : lo + _EVAL_CHUNK] = np.exp(1j * (block @ self.orbit.T)) @ self.coefficients
        return out * self._scale

    def directional_derivative(self, v, eta):
        """Derivative along the (unnormalized) direction eta."""
        v = np.asarray(v, dtype=float)
        eta = np.asarray(eta, dtype=float)
        weights = self.coefficients * (1j * (self.orbit @ eta))
        if v.ndim == 1:
            return complex(weights @ np.exp(1j * (self.orbit @ v)) * self._scale)
        return np.exp(1j * (v @ self.orbit.T)) @ weights * self._scale


def bethe_value(rs: RootSystem, weyl: WeylGroup, k: Coupling, lam, v):
    return BetheWave(rs, weyl, k, lam).at(v)


def bethe_directional_derivative(rs: RootSystem, weyl: WeylGroup, k: Coupling, lam, v, eta):
    return BetheWave(rs, weyl, k, lam).directional_derivative(v, eta)


def free_wave(rs: RootSystem, weyl: WeylGroup, mu: DominantWeight, v):
    """Zero-coupling eigenfunction of the weight mu (plain plane-wave average)."""
    lam = 2.0 * np.pi * (mu.vector - rs.rho)
    return BetheWave(rs, weyl, Coupling.zero(), lam).at(v)


@dataclass(frozen=True)
class WallSample:
    """A point on one of the n+1 alcove walls with its inward normal."""

    wall_index: int
    point: np.ndarray
    barycentric: tuple
    normal: np.ndarray  # inward coroot direction of the wall


def wall_normal(rs: RootSystem, wall_index: int) -> np.ndarray:
    """Inward coroot normal of wall i (i = 0 is the affine wall)."""
    if wall_index == 0:
        return -2.0 * rs.highest_root / float(rs.pos_norms2[rs.highest_index])
    return rs.simple_coroots[wall_index - 1]


def wall_coupling(rs: RootSystem, k: Coupling, wall_index: int) -> float:
    """Coupling constant attached to wall i (the class of its root)."""
    if k.is_zero:
        return 0.0
    cls = rs.highest_class if wall_index == 0 else int(rs.class_of_simple[wall_index - 1])
    return k.of_class(cls)


def boundary_residual_by_wall(rs: RootSystem, weyl: WeylGroup, k: Coupling, lam, samples) -> dict:
    """Max |d_normal(phi) - k_wall * phi| per wall index over the given samples."""
    wave = BetheWave(rs, weyl, k, lam)
    walls = sorted({s.wall_index for s in samples})
    out = {}
    for i in walls:
        pts = np.array([s.point for s in samples if s.wall_index == i])
        normal = wall_normal(rs, i)
        kw = wall_coupling(rs, k, i)
        res = wave.directional_derivative(pts, normal) - kw * wave.at(pts)
        out[i] = float(np.max(np.abs(res)))
    return out


def boundary_residual(rs: RootSystem, weyl: WeylGroup, k: Coupling, lam, samples) -> float:
    """Largest wall-condition violation over the samples (all walls)."""
    return max(boundary_residual_by_wall(rs, weyl, k, lam, samples).values())


def write_grid_csv(path, points, values):
    """CSV export of a grid evaluation: columns v_1..v_n, re(phi), im(phi)."""
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=complex)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"v_{i + 1}" for i in range(points.shape[1])] + ["re_phi", "im_phi"])
        for p, z in zip(points, values):
            writer.writerow([repr(float(c)) for c in p] + [repr(z.real), repr(z.imag)])
