"""Monte Carlo ergodic rates for the exact downlink SINR models.

Serves as the reference the Gamma approximations are validated against.
A sample user is pinned at a given location; co-scheduled users are drawn
uniformly per cell for each drop and the small-scale fading is redrawn
n_fadings times per drop.  Streams are keyed by (seed, drop) so any subset
of drops recomputes bit-identically regardless of how work is partitioned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .antenna import AntennaPattern
from .channel import mmse_variances, path_gain_table, power_from_edge_snr
from .geometry import NetworkLayout, home_cells, sample_user_positions
from .precoding import zf_beamformers_batch


@dataclass(frozen=True)
class ErgodicRateEstimate:
    """Sample-mean rate [bit/s/Hz] with its standard error (None when only
    one realization was run)."""

    mean: float
    stderr: Optional[float]
    n_fadings: int
    n_drops: int


def sinr_cst(h_rows: np.ndarray, err_row: np.ndarray, alpha_row: np.ndarray,
             w_by_cell: Sequence[np.ndarray],
             powers_by_cell: Sequence[np.ndarray], serving: int,
             k_index: int) -> float:
    """Exact single-cell-transmission SINR of one user for one realization.

    h_rows is (B, N_t) true channels to every BS, err_row the estimation
    error of the serving-cell link, w_by_cell/powers_by_cell the per-cell
    unit-norm beamformers and stream powers, k_index the user's column in
    its serving cell.  Noise power is 1.
    """
    b = serving
    w = w_by_cell[b]
    p = np.asarray(powers_by_cell[b], dtype=float)
    sig = alpha_row[b] * p[k_index] * \
        np.abs(h_rows[b].conj() @ w[:, k_index]) ** 2
    leak = np.abs(err_row.conj() @ w) ** 2
    mri = alpha_row[b] * (p @ leak - p[k_index] * leak[k_index])
    ici = 0.0
    for bp in range(len(w_by_cell)):
        if bp == b:
            continue
        cross = np.abs(h_rows[bp].conj() @ w_by_cell[bp]) ** 2
        ici += alpha_row[bp] * np.asarray(powers_by_cell[bp]) @ cross
    return float(sig / (1.0 + mri + ici))


def sinr_nmt(h_agg: np.ndarray, err_agg: np.ndarray, w: np.ndarray,
             powers: np.ndarray, k_index: int) -> float:
    """Exact network-MIMO SINR of one user for one realization; h_agg and
    err_agg are the aggregate (B*N_t,) true channel and estimation error,
    already carrying the per-block path gains."""
    powers = np.asarray(powers, dtype=float)
    sig = powers[k_index] * np.abs(h_agg.conj() @ w[:, k_index]) ** 2
    leak = np.abs(err_agg.conj() @ w) ** 2
    mri = powers @ leak - powers[k_index] * leak[k_index]
    return float(sig / (1.0 + mri))


def _drop_positions(rng, location, home, layout, users_per_cell):
    """Sample-user-first placement: the sample user replaces one uniform
    draw of its home cell, companions keep their cells."""
    pos, cells = sample_user_positions(rng, layout, users_per_cell)
    keep = np.ones(len(pos), dtype=bool)
    keep[home * users_per_cell + users_per_cell - 1] = False
    positions = np.concatenate([np.asarray(location, float)[None, :],
                                pos[keep]])
    cell_of = np.concatenate([[home], cells[keep]])
    return positions, cell_of


def _cst_drop_rates(rng, location, home, layout, pattern, tilts, n_fadings,
                    users_per_cell, power, n_t, exponent, d_ref):
    positions, cell_of = _drop_positions(rng, location, home, layout,
                                         users_per_cell)
    alphas = path_gain_table(positions, layout, tilts, pattern, exponent,
                             d_ref)
    n_bs = layout.num_cells
    p_share = power / users_per_cell
    alpha_row = alphas[0]
    k2_s, s2_s = mmse_variances(alpha_row[home], n_bs, power)

    sig = mri = None
    ici = np.zeros(n_fadings)
    for b in range(n_bs):
        members = np.nonzero(cell_of == b)[0]
        k2 = mmse_variances(alphas[members, b], n_bs, power)[0]
        z = rng.standard_normal((n_fadings, n_t, len(members), 2))
        h_hat = np.sqrt(k2 / 2.0) * (z[..., 0] + 1j * z[..., 1])
        w = zf_beamformers_batch(h_hat)
        if b == home:
            z = rng.standard_normal((n_fadings, n_t, 2))
            err = np.sqrt(s2_s / 2.0) * (z[..., 0] + 1j * z[..., 1])
            h_own = h_hat[:, :, 0] + err
            proj = np.abs(np.einsum("fm,fmk->fk", h_own.conj(), w)) ** 2
            sig = alpha_row[b] * p_share * proj[:, 0]
            leak = np.abs(np.einsum("fm,fmk->fk", err.conj(), w)) ** 2
            mri = alpha_row[b] * p_share * (leak.sum(axis=1) - leak[:, 0])
        else:
            z = rng.standard_normal((n_fadings, n_t, 2))
            h_cross = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
            cross = np.abs(np.einsum("fm,fmk->fk", h_cross.conj(), w)) ** 2
            ici += alpha_row[b] * p_share * cross.sum(axis=1)
    return np.log2(1.0 + sig / (1.0 + mri + ici))


def _nmt_drop_rates(rng, location, home, layout, pattern, tilts, n_fadings,
                    users_per_cell, power, n_t, exponent, d_ref):
    positions, _ = _drop_positions(rng, location, home, layout,
                                   users_per_cell)
    alphas = path_gain_table(positions, layout, tilts, pattern, exponent,
                             d_ref)
    n_bs = layout.num_cells
    n_users = len(positions)
    kappa2, sigma2 = mmse_variances(alphas, n_bs, power)
    p_share = n_bs * power / n_users

    z = rng.standard_normal((n_fadings, n_users, n_bs, n_t, 2))
    h_hat = (np.sqrt(alphas * kappa2 / 2.0)[..., None]
             * (z[..., 0] + 1j * z[..., 1])).reshape(n_fadings, n_users, -1)
    z = rng.standard_normal((n_fadings, n_bs, n_t, 2))
    err = (np.sqrt(alphas[0] * sigma2[0] / 2.0)[:, None]
           * (z[..., 0] + 1j * z[..., 1])).reshape(n_fadings, -1)

    w = zf_beamformers_batch(h_hat.swapaxes(1, 2))
    h_own = h_hat[:, 0, :] + err
    proj = np.abs(np.einsum("fm,fmk->fk", h_own.conj(), w)) ** 2
    leak = np.abs(np.einsum("fm,fmk->fk", err.conj(), w)) ** 2
    sig = p_share * proj[:, 0]
    mri = p_share * (leak.sum(axis=1) - leak[:, 0])
    return np.log2(1.0 + sig / (1.0 + mri))


def ergodic_rate_mc(mode: str, location, layout: NetworkLayout,
                    pattern: AntennaPattern, tilts, n_fadings: int,
                    n_drops: int, seed, users_per_cell: int = 6,
                    power: Optional[float] = None, n_t: int = 8,
                    exponent: float = 3.76,
                    d_ref: float = 1.0) -> ErgodicRateEstimate:
    """Monte Carlo ergodic rate of a user pinned at location.

    mode is "cst" (each BS zero-forces its own cell, per-BS power budget)
    or "nmt" (all BSs jointly zero-force all users, pooled budget).  seed
    may be an int or a sequence of ints; drop d derives its stream from
    (seed..., d).
    """
    if mode not in ("cst", "nmt"):
        raise ValueError("mode must be 'cst' or 'nmt'")
    if n_fadings < 1 or n_drops < 1:
        raise ValueError("counts must be positive")
    if users_per_cell > n_t and mode == "cst":
        raise ValueError("cannot zero-force more users than antennas")
    if power is None:
        power = power_from_edge_snr(layout, exponent=exponent, d_ref=d_ref)
    location = np.asarray(location, dtype=float)
    home = int(home_cells(location, layout))
    key = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    runner = _cst_drop_rates if mode == "cst" else _nmt_drop_rates

    total = total_sq = 0.0
    for d in range(n_drops):
        rng = np.random.default_rng(np.random.SeedSequence(key + [d]))
        rates = runner(rng, location, home, layout, pattern, tilts,
                       n_fadings, users_per_cell, power, n_t, exponent,
                       d_ref)
        total += float(rates.sum())
        total_sq += float((rates ** 2).sum())
    n = n_fadings * n_drops
    mean = total / n
    stderr = None
    if n > 1:
        var = max(0.0, (total_sq - n * mean ** 2) / (n - 1))
        stderr = float(np.sqrt(var / n))
    return ErgodicRateEstimate(mean, stderr, n_fadings, n_drops)
