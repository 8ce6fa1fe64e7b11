"""Coordinate systems, moving regions, and antenna-spacing checks.

Positions are plain numpy arrays in meters: a single point is shape (3,),
a collection of points is (M, 3). The base station anchors the global
frame; each user device carries its own local frame related to the global
one by a proper rotation and an offset.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RegionBox",
    "SystemLayout",
    "local_to_global",
    "min_pairwise_distance",
    "count_spacing_violations",
    "project_into_box",
    "random_rotation",
    "check_rotation",
]

#: Axis index that stays pinned for each supported region plane.
_PLANE_PINNED_AXIS = {"yz": 0, "xz": 1, "xy": 2}


def local_to_global(origin: np.ndarray, rotation: np.ndarray,
                    local_point: np.ndarray) -> np.ndarray:
    """Map a point from a device-local frame into the global frame.

    Args:
        origin: (3,) global coordinates of the local frame's origin.
        rotation: (3, 3) orthogonal matrix carrying local axes to global.
        local_point: (3,) or (M, 3) coordinates in the local frame.

    Returns:
        Global coordinates, same shape as ``local_point``.
    """
    origin = np.asarray(origin, dtype=float)
    rotation = np.asarray(rotation, dtype=float)
    local_point = np.asarray(local_point, dtype=float)
    return origin + local_point @ rotation.T


def min_pairwise_distance(points: np.ndarray) -> float:
    """Smallest Euclidean distance over all distinct pairs of points.

    Returns +inf for fewer than two points (no pair exists).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if n < 2:
        return float("inf")
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    iu = np.triu_indices(n, k=1)
    return float(dist[iu].min())


def count_spacing_violations(points: np.ndarray, min_spacing: float) -> int:
    """Number of antennas closer than ``min_spacing`` to some other antenna.

    Distance exactly equal to ``min_spacing`` is allowed (strict ``<``).
    An antenna involved in several too-close pairs is counted once.
    """
    if min_spacing <= 0:
        raise ValueError("min_spacing must be positive")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if n < 2:
        return 0
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    np.fill_diagonal(dist, np.inf)
    return int(np.count_nonzero(np.any(dist < min_spacing, axis=1)))


def project_into_box(u: np.ndarray, lower: np.ndarray,
                     upper: np.ndarray) -> np.ndarray:
    """Clamp each component of ``u`` into ``[lower, upper]``.

    Idempotent; with ``lower == upper`` a component is pinned to that value.
    """
    return np.maximum(np.minimum(u, upper), lower)


def check_rotation(rotation: np.ndarray, tol: float = 1e-12) -> bool:
    """True when ``rotation`` is orthogonal with determinant +1 within tol."""
    rotation = np.asarray(rotation, dtype=float)
    residual = np.max(np.abs(rotation @ rotation.T - np.eye(3)))
    return residual <= tol and abs(np.linalg.det(rotation) - 1.0) <= tol


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Draw a uniformly random proper rotation (QR of a Gaussian matrix).

    The QR factor is sign-fixed so the distribution is Haar and the
    determinant is +1.
    """
    a = rng.standard_normal((3, 3))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q


@dataclass(frozen=True)
class RegionBox:
    """Axis-aligned square (or rectangular) region in a coordinate plane.

    The region spans two axes of a Cartesian frame; the third coordinate is
    pinned at the center's value. Half-extents may be zero, which degenerates
    the region to a line or point (used for schemes that pin antennas).

    Attributes:
        center: (3,) center of the region.
        half_extents: half side lengths along the two in-plane axes, in
            axis order (e.g. for plane "xz": (x half-extent, z half-extent)).
        plane: one of "xy", "xz", "yz".
    """

    center: np.ndarray
    half_extents: tuple[float, float]
    plane: str = "xz"

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.plane not in _PLANE_PINNED_AXIS:
            raise ValueError(f"unknown plane {self.plane!r}")
        if any(h < 0 for h in self.half_extents):
            raise ValueError("half_extents must be non-negative")

    @classmethod
    def square(cls, side: float, center=(0.0, 0.0, 0.0), plane: str = "xz"):
        """Square region of side length ``side`` centered at ``center``."""
        return cls(center=np.asarray(center, dtype=float),
                   half_extents=(side / 2.0, side / 2.0), plane=plane)

    @property
    def lower(self) -> np.ndarray:
        """(3,) lower corner; the pinned axis has lower == upper."""
        lo = self.center.copy()
        axes = [a for a in range(3) if a != _PLANE_PINNED_AXIS[self.plane]]
        lo[axes[0]] -= self.half_extents[0]
        lo[axes[1]] -= self.half_extents[1]
        return lo

    @property
    def upper(self) -> np.ndarray:
        """(3,) upper corner; the pinned axis has lower == upper."""
        up = self.center.copy()
        axes = [a for a in range(3) if a != _PLANE_PINNED_AXIS[self.plane]]
        up[axes[0]] += self.half_extents[0]
        up[axes[1]] += self.half_extents[1]
        return up

    def contains(self, point: np.ndarray, atol: float = 1e-12) -> bool:
        point = np.asarray(point, dtype=float)
        return bool(np.all(point >= self.lower - atol)
                    and np.all(point <= self.upper + atol))


@dataclass
class SystemLayout:
    """Full antenna geometry of one downlink scene.

    Attributes:
        transmit_positions: (N, 3) global transmit antenna coordinates.
        receive_local: (K, 3) receive antenna coordinates, each in its
            user's local frame.
        user_origins: (K, 3) global coordinates of the local-frame origins.
        rotations: (K, 3, 3) local-to-global rotation per user.
        min_spacing: minimum allowed transmit inter-antenna distance, meters.
    """

    transmit_positions: np.ndarray
    receive_local: np.ndarray
    user_origins: np.ndarray
    rotations: np.ndarray
    min_spacing: float

    def __post_init__(self):
        self.transmit_positions = np.atleast_2d(
            np.asarray(self.transmit_positions, dtype=float))
        self.receive_local = np.atleast_2d(
            np.asarray(self.receive_local, dtype=float))
        self.user_origins = np.atleast_2d(
            np.asarray(self.user_origins, dtype=float))
        self.rotations = np.asarray(self.rotations, dtype=float)
        if self.min_spacing <= 0:
            raise ValueError("min_spacing must be positive")

    @property
    def n_transmit(self) -> int:
        return self.transmit_positions.shape[0]

    @property
    def n_users(self) -> int:
        return self.user_origins.shape[0]

    def receive_global(self) -> np.ndarray:
        """(K, 3) receive antenna coordinates in the global frame."""
        out = np.empty_like(self.receive_local)
        for k in range(self.n_users):
            out[k] = local_to_global(self.user_origins[k], self.rotations[k],
                                     self.receive_local[k])
        return out

    def spacing_violations(self) -> int:
        return count_spacing_violations(self.transmit_positions,
                                        self.min_spacing)
