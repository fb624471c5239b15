"""Large-scale gains and small-scale fading with MMSE channel estimates.

Path gain alpha = pathloss(d3) * antenna_gain couples the geometry and the
pattern; d3 is the 3D BS-to-user distance.  Small-scale fading is unit
variance complex Gaussian per antenna.  Channel estimation error follows
the MMSE model: for a link with path gain alpha and pilot energy B*P the
normalized error variance is sigma^2 = 1 / (1 + alpha*B*P) and the estimate
carries the remaining kappa^2 = 1 - sigma^2.
"""

from __future__ import annotations

import numpy as np

from .antenna import AntennaPattern, gain_linear
from .geometry import NetworkLayout, spherical_angles

# count of distance clamps below the reference distance (diagnostic only)
_clamp_count = 0


def pathloss_clamp_count() -> int:
    return _clamp_count


def reset_pathloss_clamp_count() -> None:
    global _clamp_count
    globals()["_clamp_count"] = 0


def pathloss(d3, exponent: float = 3.76, d_ref: float = 1.0):
    """Distance power law (d3/d_ref)^-exponent for 3D distances in meters.

    Distances below d_ref are clamped to d_ref; clamps increment a module
    counter so runs can report how often the model was saturated.
    """
    global _clamp_count
    d3 = np.asarray(d3, dtype=float)
    n_clamped = int(np.count_nonzero(d3 < d_ref))
    if n_clamped:
        _clamp_count += n_clamped
        d3 = np.maximum(d3, d_ref)
    return (d3 / d_ref) ** (-exponent)


def path_gain(points, bs_index: int, layout: NetworkLayout, tilt_deg: float,
              pattern: AntennaPattern = AntennaPattern(),
              exponent: float = 3.76, d_ref: float = 1.0):
    """Linear path gain alpha from BS bs_index to (..., 2) ground points."""
    points = np.asarray(points, dtype=float)
    phi, theta = spherical_angles(points, bs_index, layout)
    d_h = np.hypot(*(points - layout.bs_positions[bs_index]).T).T \
        if points.ndim > 1 else \
        np.hypot(points[0] - layout.bs_positions[bs_index][0],
                 points[1] - layout.bs_positions[bs_index][1])
    d3 = np.hypot(d_h, layout.delta_h)
    g = gain_linear(phi, layout.bs_orientations[bs_index], theta, tilt_deg,
                    pattern)
    return pathloss(d3, exponent, d_ref) * g


def path_gain_table(points, layout: NetworkLayout, tilts_deg,
                    pattern: AntennaPattern = AntennaPattern(),
                    exponent: float = 3.76, d_ref: float = 1.0) -> np.ndarray:
    """(n, B) path gains from every BS, with per-BS downtilts tilts_deg
    (scalar or length B)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    tilts = np.broadcast_to(np.asarray(tilts_deg, dtype=float),
                            (layout.num_cells,))
    cols = [path_gain(points, b, layout, tilts[b], pattern, exponent, d_ref)
            for b in range(layout.num_cells)]
    return np.stack(cols, axis=-1)


def power_from_edge_snr(layout: NetworkLayout, edge_snr_db: float = 10.0,
                        exponent: float = 3.76, d_ref: float = 1.0,
                        noise_power: float = 1.0) -> float:
    """Per-BS transmit power giving edge_snr_db of receive SNR at the far
    cell vertex under maximum antenna gain and unit-norm beamforming.

    The reference point is at 3D distance sqrt(D^2 + delta_h^2); noise is
    normalized to noise_power (1.0 means SNRs are powers directly).
    """
    d_edge = float(np.hypot(layout.cell_radius, layout.delta_h))
    return 10.0 ** (edge_snr_db / 10.0) * noise_power / \
        float(pathloss(d_edge, exponent, d_ref))


def mmse_variances(alpha, n_bs: int, power: float):
    """Estimation split for a link with path gain alpha trained with energy
    n_bs * power: returns (kappa2, sigma2) with kappa2 + sigma2 = 1."""
    alpha = np.asarray(alpha, dtype=float)
    sigma2 = 1.0 / (1.0 + alpha * n_bs * power)
    return 1.0 - sigma2, sigma2


def draw_fading(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circularly symmetric complex Gaussian array."""
    z = rng.standard_normal(tuple(np.atleast_1d(shape)) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def draw_mmse_pair(rng: np.random.Generator, alpha, n_bs: int, power: float,
                   shape) -> tuple[np.ndarray, np.ndarray]:
    """Draw (h_hat, err) directly from their exact joint statistics.

    Both are independent complex Gaussians with variances kappa2 and sigma2;
    their sum is the unit-variance true channel.  alpha broadcasts against
    shape (trailing axes being antenna dimensions).
    """
    kappa2, sigma2 = mmse_variances(alpha, n_bs, power)
    h_hat = np.sqrt(kappa2) * draw_fading(rng, shape)
    err = np.sqrt(sigma2) * draw_fading(rng, shape)
    return h_hat, err


def decompose_mmse(h: np.ndarray, alpha, n_bs: int, power: float,
                   rng: np.random.Generator):
    """Split a drawn unit-variance channel h into an MMSE estimate and an
    independent error so that h = h_hat + err holds exactly per realization.

    Conditioned on h the estimate is h_hat = kappa2*h + kappa*sigma*z with
    fresh z ~ CN(0, I), which reproduces the unconditional variances kappa2
    and sigma2 and zero cross-correlation.  Returns (h_hat, err, kappa2,
    sigma2).
    """
    h = np.asarray(h)
    kappa2, sigma2 = mmse_variances(alpha, n_bs, power)
    z = draw_fading(rng, h.shape)
    h_hat = kappa2 * h + np.sqrt(kappa2 * sigma2) * z
    return h_hat, h - h_hat, kappa2, sigma2


def assemble_network_channel(h_blocks: np.ndarray,
                             alpha_row: np.ndarray) -> np.ndarray:
    """Stack per-BS channel blocks into the aggregate cooperative channel.

    h_blocks is (..., B, N_t) small-scale fading per BS, alpha_row (..., B)
    the matching path gains; the result is (..., B*N_t) with block b scaled
    by sqrt(alpha_b).
    """
    h_blocks = np.asarray(h_blocks)
    alpha_row = np.asarray(alpha_row, dtype=float)
    scaled = np.sqrt(alpha_row)[..., None] * h_blocks
    return scaled.reshape(scaled.shape[:-2] + (-1,))
