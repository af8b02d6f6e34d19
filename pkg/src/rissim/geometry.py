"""Antenna array geometry: UPA/ULA manifolds, steering vectors, distances.

Conventions
-----------
* Elements of an ``N_y x N_z`` planar array are flattened y-major,
  ``n = n_y * N_z + n_z``, so the vectorized UPA steering vector equals the
  Kronecker product ``a_y (x) a_z`` of its per-axis ULA factors.
* Angles are (elevation ``theta``, azimuth ``phi``) in radians, expressed in
  the array's local frame: boresight along +x, rows along +y, columns along
  +z.  The unit direction for an angle pair is
  ``[cos(theta)cos(phi), cos(theta)sin(phi), sin(theta)]``.
* Steering phases are referenced to element (0, 0), which sits at the
  array origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Local-to-global rotations for the supported mounting planes. The local
# frame always has the elements in its own y-z plane; "plane" states where
# that plane lands in global coordinates (boresight in parentheses):
#   yz -> global y-z plane (+x), xz -> global x-z plane (+y),
#   xy -> global x-y plane (+z).
_PLANE_ROTATIONS = {
    "yz": np.eye(3),
    "xz": np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
    "xy": np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).T,
}


@dataclass(frozen=True)
class Angle:
    """Elevation/azimuth pair in radians, in an array's local frame."""

    theta: float
    phi: float


def direction_from_angle(angle: Angle) -> np.ndarray:
    """Unit direction vector for an (elevation, azimuth) pair.

    Returns ``[cos(theta)cos(phi), cos(theta)sin(phi), sin(theta)]``.
    """
    ct = math.cos(angle.theta)
    return np.array(
        [ct * math.cos(angle.phi), ct * math.sin(angle.phi), math.sin(angle.theta)]
    )


def angle_from_direction(direction: np.ndarray) -> Angle:
    """Inverse of :func:`direction_from_angle` (input need not be unit norm)."""
    d = np.asarray(direction, dtype=float)
    n = np.linalg.norm(d)
    if n == 0.0:
        raise ValueError("zero direction vector has no angle")
    d = d / n
    theta = math.asin(min(1.0, max(-1.0, d[2])))
    phi = math.atan2(d[1], d[0])
    return Angle(theta, phi)


@dataclass
class ArrayGeometry:
    """A uniform planar (or linear) array of ``N_y x N_z`` elements.

    Element (0, 0) sits at ``origin``; element (n_y, n_z) sits at
    ``origin + R @ [0, n_y*d_y, n_z*d_z]`` where ``R`` is the mounting
    rotation selected by ``plane``.  ``counts == (1, 1)`` models a single
    antenna (e.g. a UE).
    """

    counts: tuple[int, int]
    spacing: tuple[float, float]
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    plane: str = "yz"
    rotation: np.ndarray | None = None

    def __post_init__(self):
        n_y, n_z = self.counts
        if n_y < 1 or n_z < 1:
            raise ValueError(f"element counts must be positive, got {self.counts}")
        self.origin = np.asarray(self.origin, dtype=float).reshape(3)
        if self.rotation is None:
            if self.plane not in _PLANE_ROTATIONS:
                raise ValueError(f"unknown array plane {self.plane!r}")
            self.rotation = _PLANE_ROTATIONS[self.plane]
        self.rotation = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        d_y, d_z = self.spacing
        iy = np.repeat(np.arange(n_y), n_z)  # y-major flattening
        iz = np.tile(np.arange(n_z), n_y)
        self.local_coords = np.column_stack(
            [np.zeros(n_y * n_z), iy * d_y, iz * d_z]
        )
        self.element_positions = self.origin + self.local_coords @ self.rotation.T

    @classmethod
    def upa(cls, n_y, n_z, spacing, origin=(0.0, 0.0, 0.0), plane="yz"):
        """UPA with equal spacing along both axes, element (0,0) at origin."""
        return cls(counts=(n_y, n_z), spacing=(spacing, spacing), origin=origin, plane=plane)

    @classmethod
    def upa_centered(cls, n_y, n_z, spacing, center, plane="yz"):
        """UPA placed so that its geometric center is at ``center``."""
        geom = cls.upa(n_y, n_z, spacing, plane=plane)
        shift = np.asarray(center, dtype=float) - geom.element_positions.mean(axis=0)
        return cls.upa(n_y, n_z, spacing, origin=shift, plane=plane)

    @classmethod
    def single(cls, position):
        """Single-element 'array' (isotropic antenna) at ``position``."""
        return cls(counts=(1, 1), spacing=(0.0, 0.0), origin=position)

    @property
    def size(self) -> int:
        return self.counts[0] * self.counts[1]

    @property
    def center(self) -> np.ndarray:
        return self.element_positions.mean(axis=0)

    @property
    def aperture(self) -> float:
        """Largest array diagonal in meters (zero for a single element)."""
        n_y, n_z = self.counts
        d_y, d_z = self.spacing
        return math.hypot((n_y - 1) * d_y, (n_z - 1) * d_z)

    def to_local(self, direction: np.ndarray) -> np.ndarray:
        """Express a global direction vector in the array's local frame."""
        return self.rotation.T @ np.asarray(direction, dtype=float)

    def departure_angle(self, target: np.ndarray) -> Angle:
        """Local angle of the ray from the array center toward ``target``."""
        return angle_from_direction(self.to_local(np.asarray(target, float) - self.center))

    def arrival_angle(self, source: np.ndarray) -> Angle:
        """Local angle of the propagation direction of a ray arriving from
        ``source``, i.e. the direction pointing from the source through the
        array center.  Using the propagation direction (rather than the
        direction back toward the source) makes the planar phase profile the
        far-field limit of the exact spherical one.
        """
        return angle_from_direction(self.to_local(self.center - np.asarray(source, float)))


def steering_vector(geom: ArrayGeometry, angle: Angle, wavelength: float) -> np.ndarray:
    """Array steering vector ``exp(j*kappa*d(angle)^T u_n)`` for all elements.

    Phases are referenced to element (0, 0); every entry has unit modulus.
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    kappa = 2.0 * math.pi / wavelength
    return np.exp(1j * kappa * (geom.local_coords @ direction_from_angle(angle)))


def kron_steering(geom: ArrayGeometry, angle: Angle, wavelength: float) -> np.ndarray:
    """UPA steering vector built as the Kronecker product of ULA factors.

    With y-major element flattening this is entrywise identical to
    :func:`steering_vector`; kept as an independent construction so the
    factorization can be tested rather than assumed.
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    kappa = 2.0 * math.pi / wavelength
    n_y, n_z = geom.counts
    d_y, d_z = geom.spacing
    a_y = np.exp(
        1j * kappa * d_y * math.cos(angle.theta) * math.sin(angle.phi) * np.arange(n_y)
    )
    a_z = np.exp(1j * kappa * d_z * math.sin(angle.theta) * np.arange(n_z))
    return np.kron(a_y, a_z)


def pairwise_distance(a, b) -> float:
    """Euclidean distance between two points in meters."""
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


def fraunhofer_distance(aperture: float, wavelength: float) -> float:
    """Far-field boundary ``2*D^2/lambda`` for an aperture of size ``D``."""
    if aperture <= 0:
        raise ValueError("aperture must be positive")
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    return 2.0 * aperture * aperture / wavelength
