"""3GPP-style directional BS antenna with electrical downtilt.

The gain combines a horizontal and a vertical parabolic attenuation, each
clipped at its side-lobe floor:

    G(phi, theta) = -(min[12 ((phi - psi)/phi_3dB)^2, SLL_az]
                      + min[12 ((theta - beta)/theta_3dB)^2, SLL_el])  [dBi]

where psi is the boresight azimuth and beta the downtilt.  The azimuth
offset is wrapped to (-180, 180] before squaring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AntennaPattern:
    """Pattern parameters: 3 dB beamwidths [deg] and side-lobe floors [dB].

    isotropic=True short-circuits to unit gain everywhere (used by the
    rate-validation protocol, which models ideal elements).
    """

    phi_3db: float = 65.0
    theta_3db: float = 6.0
    sll_az_db: float = 25.0
    sll_el_db: float = 20.0
    isotropic: bool = False

    def __post_init__(self):
        if not self.isotropic:
            if self.phi_3db <= 0 or self.theta_3db <= 0:
                raise ValueError("beamwidths must be positive")
            if self.sll_az_db < 0 or self.sll_el_db < 0:
                raise ValueError("side-lobe floors must be non-negative")


def wrap_angle(a):
    """Wrap degrees to (-180, 180]."""
    a = np.asarray(a, dtype=float)
    w = np.mod(a + 180.0, 360.0) - 180.0
    return np.where(w == -180.0, 180.0, w)


def gain_dbi(phi, psi, theta, beta, pattern: AntennaPattern = AntennaPattern()):
    """Antenna gain [dBi] toward azimuth phi / depression theta for a BS with
    boresight psi and downtilt beta (all degrees).  Broadcasts over inputs."""
    if pattern.isotropic:
        return np.zeros(np.broadcast(np.asarray(phi), np.asarray(psi),
                                     np.asarray(theta), np.asarray(beta)).shape)
    dphi = wrap_angle(np.asarray(phi) - np.asarray(psi))
    a_az = np.minimum(12.0 * (dphi / pattern.phi_3db) ** 2, pattern.sll_az_db)
    dth = np.asarray(theta, dtype=float) - np.asarray(beta, dtype=float)
    a_el = np.minimum(12.0 * (dth / pattern.theta_3db) ** 2, pattern.sll_el_db)
    return -(a_az + a_el)


def gain_linear(phi, psi, theta, beta,
                pattern: AntennaPattern = AntennaPattern()):
    """Linear-scale antenna gain."""
    return 10.0 ** (gain_dbi(phi, psi, theta, beta, pattern) / 10.0)
