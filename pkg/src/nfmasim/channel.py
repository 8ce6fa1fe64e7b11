"""Spherical-wave Rician channels as a function of antenna positions.

Each user's channel vector is composed from a direct component plus
single-bounce scatterer components. Phases use exact per-antenna Euclidean
distances (spherical wavefronts), so a channel changes when any antenna
moves by a fraction of a wavelength. Amplitude gains and reflection
coefficients are frozen once per random drop; re-evaluating the channel at
new antenna positions reuses them, which keeps the optimization landscape
a pure function of geometry.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SPEED_OF_LIGHT",
    "CarrierConfig",
    "ChannelDrop",
    "steering_vector",
    "los_component",
    "nlos_component",
    "assemble_channel",
    "free_space_amplitude",
    "channel_matrix",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class CarrierConfig:
    """Carrier frequency and the wavelength derived from it."""

    frequency_hz: float

    def __post_init__(self):
        if self.frequency_hz <= 0:
            raise ValueError("frequency_hz must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz


def steering_vector(transmit_positions: np.ndarray, target: np.ndarray,
                    wavelength: float) -> np.ndarray:
    """Spherical-wave steering vector from each transmit antenna to a point.

    Entry n is exp(-j * 2*pi/wavelength * ||t_n - target||). Every entry has
    unit modulus; a zero-distance entry is 1 + 0j.

    Args:
        transmit_positions: (N, 3) antenna coordinates, meters.
        target: (3,) point the wave propagates to, meters.
        wavelength: carrier wavelength, meters.

    Returns:
        (N,) complex vector of unit-modulus phase responses.
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    t = np.atleast_2d(np.asarray(transmit_positions, dtype=float))
    d = np.linalg.norm(t - np.asarray(target, dtype=float), axis=1)
    return np.exp(-2j * np.pi / wavelength * d)


def los_component(transmit_positions: np.ndarray, receive_position: np.ndarray,
                  gain: float, wavelength: float) -> np.ndarray:
    """Direct-path channel component: gain times the steering vector."""
    if gain < 0:
        raise ValueError("gain must be non-negative")
    return gain * steering_vector(transmit_positions, receive_position,
                                  wavelength)


def nlos_component(transmit_positions: np.ndarray,
                   scatterer_positions: np.ndarray,
                   reflection_coeffs: np.ndarray,
                   first_hop_gains: np.ndarray,
                   second_hop_gains: np.ndarray,
                   receive_position: np.ndarray,
                   wavelength: float) -> np.ndarray:
    """Single-bounce scattered channel component.

    Sums, over scatterers, the reflection coefficient times the
    antenna-to-scatterer steering vector (weighted by the first-hop gain)
    times the scatterer-to-receiver phase term (weighted by the second-hop
    gain). The sum is divided by sqrt(L) so its expected power does not
    grow with the scatterer count and the Rician factor stays a true
    power ratio. Zero scatterers yield the zero vector.

    Args:
        transmit_positions: (N, 3) antenna coordinates.
        scatterer_positions: (L, 3) scatterer coordinates.
        reflection_coeffs: (L,) complex reflection coefficients.
        first_hop_gains: (L,) amplitude gains antenna-array -> scatterer.
        second_hop_gains: (L,) amplitude gains scatterer -> receiver.
        receive_position: (3,) global receive antenna coordinates.
        wavelength: carrier wavelength, meters.

    Returns:
        (N,) complex channel component.
    """
    t = np.atleast_2d(np.asarray(transmit_positions, dtype=float))
    n = t.shape[0]
    scat = np.atleast_2d(np.asarray(scatterer_positions, dtype=float))
    n_scat = scat.shape[0] if scat.size else 0
    if n_scat == 0:
        return np.zeros(n, dtype=complex)

    # (N, L) antenna-to-scatterer phases.
    d_first = np.linalg.norm(t[:, None, :] - scat[None, :, :], axis=2)
    a_first = np.exp(-2j * np.pi / wavelength * d_first)
    # (L,) scatterer-to-receiver phases.
    d_second = np.linalg.norm(scat - np.asarray(receive_position, dtype=float),
                              axis=1)
    phase_second = np.exp(-2j * np.pi / wavelength * d_second)

    coeff = (np.asarray(reflection_coeffs, dtype=complex)
             * np.asarray(first_hop_gains, dtype=float)
             * np.asarray(second_hop_gains, dtype=float)
             * phase_second)
    return (a_first @ coeff) / np.sqrt(n_scat)


def assemble_channel(los: np.ndarray, nlos: np.ndarray,
                     rician_factor: float) -> np.ndarray:
    """Weighted sum of direct and scattered components.

    The direct component carries a fraction k/(k+1) of the power and the
    scattered component 1/(k+1), with k the (linear) Rician factor.
    """
    los = np.asarray(los, dtype=complex)
    nlos = np.asarray(nlos, dtype=complex)
    if los.shape != nlos.shape:
        raise ValueError(f"component length mismatch: {los.shape} vs {nlos.shape}")
    if rician_factor <= 0:
        raise ValueError("rician_factor must be positive")
    w_los = np.sqrt(rician_factor / (rician_factor + 1.0))
    w_nlos = np.sqrt(1.0 / (rician_factor + 1.0))
    return w_los * los + w_nlos * nlos


def free_space_amplitude(distance: float, wavelength: float) -> float:
    """Free-space amplitude gain wavelength / (4 * pi * distance)."""
    if distance <= 0:
        raise ValueError("distance must be positive (gain is singular at 0)")
    return wavelength / (4.0 * np.pi * distance)


@dataclass
class ChannelDrop:
    """Frozen randomness of one channel realization.

    Everything random about the propagation environment is drawn once and
    kept fixed while antenna positions move: scatterer locations, complex
    reflection coefficients, and the per-link amplitude gains (evaluated at
    the drop geometry, not re-evaluated as antennas move within their
    wavelength-scale regions).

    Attributes:
        scatterers: (K, L, 3) global scatterer coordinates per user.
        reflection_coeffs: (K, L) complex unit-variance coefficients.
        los_gains: (K,) direct-path amplitude gain per user.
        first_hop_gains: (K, L) array-to-scatterer amplitude gains.
        second_hop_gains: (K, L) scatterer-to-user amplitude gains.
        rician_factor: linear power ratio of direct to scattered parts.
        seed: integer the drop was generated from (bookkeeping only).
    """

    scatterers: np.ndarray
    reflection_coeffs: np.ndarray
    los_gains: np.ndarray
    first_hop_gains: np.ndarray
    second_hop_gains: np.ndarray
    rician_factor: float
    seed: int | None = None

    def __post_init__(self):
        self.scatterers = np.asarray(self.scatterers, dtype=float)
        self.reflection_coeffs = np.asarray(self.reflection_coeffs,
                                            dtype=complex)
        self.los_gains = np.asarray(self.los_gains, dtype=float)
        self.first_hop_gains = np.asarray(self.first_hop_gains, dtype=float)
        self.second_hop_gains = np.asarray(self.second_hop_gains, dtype=float)
        if self.rician_factor <= 0:
            raise ValueError("rician_factor must be positive")
        if np.any(self.los_gains < 0) or np.any(self.first_hop_gains < 0) \
                or np.any(self.second_hop_gains < 0):
            raise ValueError("amplitude gains must be non-negative")

    @property
    def n_users(self) -> int:
        return self.los_gains.shape[0]

    @property
    def n_scatterers(self) -> int:
        return self.scatterers.shape[1] if self.scatterers.ndim == 3 else 0

    def to_dict(self) -> dict:
        """JSON-serializable exact record (floats round-trip via repr)."""
        return {
            "seed": self.seed,
            "rician_factor": self.rician_factor,
            "scatterers": self.scatterers.tolist(),
            "reflection_coeffs_re": self.reflection_coeffs.real.tolist(),
            "reflection_coeffs_im": self.reflection_coeffs.imag.tolist(),
            "los_gains": self.los_gains.tolist(),
            "first_hop_gains": self.first_hop_gains.tolist(),
            "second_hop_gains": self.second_hop_gains.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelDrop":
        coeffs = (np.asarray(data["reflection_coeffs_re"], dtype=float)
                  + 1j * np.asarray(data["reflection_coeffs_im"], dtype=float))
        return cls(
            scatterers=np.asarray(data["scatterers"], dtype=float),
            reflection_coeffs=coeffs,
            los_gains=np.asarray(data["los_gains"], dtype=float),
            first_hop_gains=np.asarray(data["first_hop_gains"], dtype=float),
            second_hop_gains=np.asarray(data["second_hop_gains"], dtype=float),
            rician_factor=float(data["rician_factor"]),
            seed=data.get("seed"),
        )


def channel_matrix(transmit_positions: np.ndarray,
                   receive_positions: np.ndarray,
                   drop: ChannelDrop,
                   wavelength: float) -> np.ndarray:
    """Channel vectors for all users at the given antenna positions.

    Args:
        transmit_positions: (N, 3) global transmit antenna coordinates.
        receive_positions: (K, 3) global receive antenna coordinates.
        drop: frozen drop providing scatterers, coefficients, and gains.
        wavelength: carrier wavelength, meters.

    Returns:
        (K, N) complex matrix; row k is user k's channel vector.
    """
    receive_positions = np.atleast_2d(np.asarray(receive_positions,
                                                 dtype=float))
    n_users = receive_positions.shape[0]
    t = np.atleast_2d(np.asarray(transmit_positions, dtype=float))
    h = np.empty((n_users, t.shape[0]), dtype=complex)
    for k in range(n_users):
        los = los_component(t, receive_positions[k], drop.los_gains[k],
                            wavelength)
        if drop.n_scatterers:
            nlos = nlos_component(t, drop.scatterers[k],
                                  drop.reflection_coeffs[k],
                                  drop.first_hop_gains[k],
                                  drop.second_hop_gains[k],
                                  receive_positions[k], wavelength)
        else:
            nlos = np.zeros(t.shape[0], dtype=complex)
        h[k] = assemble_channel(los, nlos, drop.rician_factor)
    return h
