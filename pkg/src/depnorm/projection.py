"""Random low-dimensional projections: 2-d data onto a line, 3-d data onto a
plane, and in-plane rotations of 2-d data.

Angle conventions: a scalar direction is (sin(phi), cos(phi)) with phi
uniform on [0, pi); a plane is tilted from the z axis by theta in
(-pi/2, pi/2) and carries an in-plane angle phi from the x axis. These
reproduce the angle parameterization used by the experiment protocol as-is
(it is not Haar-uniform over planes, and no Jacobian correction is applied).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RngStream, TimeSeriesSample

__all__ = [
    "Direction1D",
    "Plane2D",
    "project_1d",
    "project_2d",
    "rotate_2d",
    "rotation_matrix",
    "sample_direction",
    "sample_plane",
    "sample_rotation",
]


@dataclass(frozen=True)
class Direction1D:
    phi: float

    def vector(self) -> np.ndarray:
        return np.array([np.sin(self.phi), np.cos(self.phi)])


@dataclass(frozen=True)
class Plane2D:
    theta: float
    phi: float

    def basis(self) -> np.ndarray:
        """Orthonormal 2 x 3 basis of the plane.

        Row u1 lies in the xy plane at angle phi from the x axis; row u2
        completes it under the tilt theta. u1 . u2 = 0 and both have unit
        norm for any angles.
        """
        st, ct = np.sin(self.theta), np.cos(self.theta)
        sp, cp = np.sin(self.phi), np.cos(self.phi)
        return np.array([[cp, sp, 0.0], [-st * sp, st * cp, ct]])


def project_1d(x: TimeSeriesSample, d: Direction1D) -> TimeSeriesSample:
    """y(n) = sin(phi) x1(n) + cos(phi) x2(n); requires p = 2."""
    if x.p != 2:
        raise ValueError(f"project_1d needs p=2, got p={x.p}")
    return TimeSeriesSample(d.vector()[None, :] @ x.data)


def project_2d(x: TimeSeriesSample, pl: Plane2D) -> TimeSeriesSample:
    """Project a trivariate sample onto the plane's orthonormal basis."""
    if x.p != 3:
        raise ValueError(f"project_2d needs p=3, got p={x.p}")
    return TimeSeriesSample(pl.basis() @ x.data)


def rotation_matrix(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, s], [-s, c]])


def rotate_2d(x: TimeSeriesSample, phi: float) -> TimeSeriesSample:
    """Re-express a bivariate sample in a rotated orthonormal basis, i.e.
    two scalar projections onto two orthogonal axes."""
    if x.p != 2:
        raise ValueError(f"rotate_2d needs p=2, got p={x.p}")
    return TimeSeriesSample(rotation_matrix(phi) @ x.data)


def sample_direction(rng: RngStream | np.random.Generator) -> Direction1D:
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return Direction1D(gen.uniform(0.0, np.pi))


def sample_plane(rng: RngStream | np.random.Generator) -> Plane2D:
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    theta = gen.uniform(-np.pi / 2, np.pi / 2)
    phi = gen.uniform(0.0, np.pi)
    return Plane2D(theta, phi)


def sample_rotation(rng: RngStream | np.random.Generator) -> float:
    """A random in-plane rotation angle, uniform on [0, pi)."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return gen.uniform(0.0, np.pi)
