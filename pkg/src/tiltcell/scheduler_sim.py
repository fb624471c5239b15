"""Drop-based scheduled-throughput simulation of fixed-tilt and
region-adaptive downlink systems.

Each drop places users uniformly in the rhombic cells, splits them into a
cell-interior and a cell-edge group (fixed-tilt baselines put everyone in
one group), and time-shares the slots between the groups in proportion to
their head counts.  Interior slots run per-cell zero-forcing at the
single-cell tilt; edge slots run joint zero-forcing from all BSs at the
joint-transmission tilt.  Scheduled users get spatial waterfilling power
and proportional-fair contention where the slot capacity binds.  Drops are
advanced together so the kernel work stays batched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .antenna import AntennaPattern
from .channel import mmse_variances, path_gain_table, power_from_edge_snr
from .geometry import EDGE, NetworkLayout, region_of, sample_user_positions
from .precoding import allocate_waterfilling, zf_beamformers_batch
from .tilt_optimizer import ThroughputCdf

PF_WINDOW = 100
_PF_INIT = 1e-3
_CHECK_EVERY = 100
_MIN_SLOTS = 500
_MAX_SLOTS = 5000
_CONV_TOL = 5e-3
_ZF_MARGIN = 6


@dataclass(frozen=True)
class SystemVariant:
    """A named operating point: transmission mode plus fixed tilts.

    mode "cst" serves every user from its home BS at tilt beta_cst, "nmt"
    serves everyone jointly at beta_nmt, and "hybrid" splits each cell at
    radius d_int, tilting interior slots to beta_cst and edge slots to
    beta_nmt.
    """

    name: str
    mode: str
    beta_cst: Optional[float] = None
    beta_nmt: Optional[float] = None
    d_int: Optional[float] = None

    def __post_init__(self):
        if self.mode not in ("cst", "nmt", "hybrid"):
            raise ValueError("mode must be 'cst', 'nmt', or 'hybrid'")
        if self.mode in ("cst", "hybrid") and self.beta_cst is None:
            raise ValueError(f"{self.mode} variant needs beta_cst")
        if self.mode in ("nmt", "hybrid") and self.beta_nmt is None:
            raise ValueError(f"{self.mode} variant needs beta_nmt")
        if self.mode == "hybrid" and (self.d_int is None or self.d_int <= 0):
            raise ValueError("hybrid variant needs a positive d_int")


def reference_variants(layout: NetworkLayout) -> tuple[SystemVariant, ...]:
    """The five benchmark systems: edge- and average-optimized fixed
    tilts for both modes, plus the region-adaptive point."""
    return (
        SystemVariant("uncoord-cst-e", "cst", beta_cst=16.0),
        SystemVariant("uncoord-cst-a", "cst", beta_cst=18.0),
        SystemVariant("nmt-e", "nmt", beta_nmt=10.0),
        SystemVariant("nmt-a", "nmt", beta_nmt=16.0),
        SystemVariant("am-3d-bf", "hybrid", beta_cst=21.0, beta_nmt=14.0,
                      d_int=0.6 * layout.cell_radius),
    )


@dataclass(frozen=True)
class DropResult:
    """Outcome of one drop: scheduled throughput per user, the region
    split, its activity factors, and how many slots were simulated."""

    throughput: np.ndarray
    regions: np.ndarray
    nu_cst: float
    nu_nmt: float
    slots: int


@dataclass(frozen=True)
class VariantResult:
    variant: SystemVariant
    drops: tuple

    @property
    def cdf(self) -> ThroughputCdf:
        return ThroughputCdf(
            np.concatenate([d.throughput for d in self.drops]))


def activity_factors(n_cst: int, n_nmt: int) -> tuple[float, float]:
    """Time share of each user group, nu = |group| / |total|.

    This is the proportional-fair split of slots between the groups; it
    depends only on the head counts, not on the rates.
    """
    if n_cst < 0 or n_nmt < 0:
        raise ValueError("group sizes cannot be negative")
    total = n_cst + n_nmt
    if total == 0:
        raise ValueError("need at least one user across the groups")
    return n_cst / total, n_nmt / total


def slot_pattern(nu_cst: float, period: int) -> np.ndarray:
    """Deterministic repeating slot schedule realizing the interior share.

    Returns a boolean array of length period, True where the slot serves
    the interior group.  The interior slot count is the largest-remainder
    rounding of nu_cst * period (ties go to the interior group) and the
    True slots are spread evenly across the period.
    """
    if period < 1:
        raise ValueError("period must be positive")
    if not 0.0 <= nu_cst <= 1.0:
        raise ValueError("nu_cst must lie in [0, 1]")
    target = nu_cst * period
    n_cst = math.floor(target)
    rem = target - n_cst
    if rem > 0 and rem >= (period - target) - math.floor(period - target):
        n_cst += 1
    i = np.arange(period)
    return np.floor((i + 1) * n_cst / period) \
        > np.floor(i * n_cst / period)


def pf_select(rate_estimates, averages, capacity: int) -> np.ndarray:
    """Indices of the up-to-capacity users with the largest ratio of
    estimated instantaneous rate to windowed average throughput.  Ties
    resolve toward lower indices."""
    r = np.asarray(rate_estimates, dtype=float)
    a = np.asarray(averages, dtype=float)
    if r.shape != a.shape or r.ndim != 1:
        raise ValueError("rate estimates and averages must be equal-length "
                         "vectors")
    if np.any(a <= 0):
        raise ValueError("averages must be positive")
    if capacity < 1:
        raise ValueError("capacity must be positive")
    order = np.argsort(-(r / a), kind="stable")
    return np.sort(order[:min(capacity, r.size)])


def _complex_normal(rng, shape):
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


class _DropSetup:
    """Static per-drop data: positions, regions, per-mode link statistics,
    and the slot schedule."""

    def __init__(self, rng, variant, layout, pattern, users_per_cell,
                 power, n_t):
        positions, home = sample_user_positions(rng, layout, users_per_cell)
        n_users = positions.shape[0]
        if variant.mode == "cst":
            regions = home.copy()
        elif variant.mode == "nmt":
            regions = np.full(n_users, EDGE)
        else:
            regions = region_of(positions, home, layout, variant.d_int)
        n_int = int(np.sum(regions != EDGE))
        self.nu = activity_factors(n_int, n_users - n_int)
        self.pattern = slot_pattern(self.nu[0], n_users)
        self.home = home
        self.regions = regions

        def link_stats(beta):
            tilts = np.full(layout.num_cells, float(beta))
            alpha = path_gain_table(positions, layout, tilts, pattern)
            kappa2, sigma2 = mmse_variances(alpha, layout.num_cells, power)
            return alpha, np.sqrt(kappa2), np.sqrt(sigma2)

        # index 0 = interior (single-cell) slots, 1 = edge (joint) slots;
        # unused entries of fixed-tilt variants just mirror the used one
        b_cst = variant.beta_cst if variant.beta_cst is not None \
            else variant.beta_nmt
        b_nmt = variant.beta_nmt if variant.beta_nmt is not None \
            else variant.beta_cst
        self.alpha = np.empty((2, n_users, layout.num_cells))
        self.kappa = np.empty_like(self.alpha)
        self.sigma = np.empty_like(self.alpha)
        for m, beta in enumerate((b_cst, b_nmt)):
            self.alpha[m], self.kappa[m], self.sigma[m] = link_stats(beta)


def _cst_slot_rates(hz, err, alpha, home, eligible, budget, n_t):
    """Rates for one batch of single-cell-mode drops.

    hz/err are (m, U, B, N_t) estimated and error fadings, alpha the
    (m, U, B) path gains at the single-cell tilt.  Every eligible user is
    served by its home BS (cells never carry more than n_t of them here).
    Returns (m, U) rates.
    """
    m, n_users, n_bs, _ = hz.shape
    beams = np.zeros((m, n_bs, n_t, n_t), dtype=complex)
    col = np.full((m, n_users), -1)
    for b in range(n_bs):
        mask = eligible & (home[None, :] == b)
        counts = mask.sum(axis=1)
        for k in np.unique(counts):
            if k == 0:
                continue
            rows = np.nonzero(counts == k)[0]
            users = np.nonzero(mask[rows])[1].reshape(rows.size, k)
            cols = hz[rows[:, None], users, b, :]          # (g, k, n_t)
            w = zf_beamformers_batch(cols.swapaxes(-1, -2))
            own = np.abs(np.einsum("gkt,gtk->gk", cols.conj(), w)) ** 2
            gains = alpha[rows[:, None], users, b] * own
            p = allocate_waterfilling(gains, budget)
            beams[rows[:, None], b, :, np.arange(k)[None, :]] = \
                (w * np.sqrt(p)[:, None, :]).swapaxes(-1, -2)
            col[rows[:, None], users] = np.arange(k)[None, :]

    h = hz + err
    amp = np.einsum("mubt,mbtj->mubj", h.conj(), beams)
    terms = alpha[..., None] * np.abs(amp) ** 2            # (m, U, B, n_t)
    total = terms.sum(axis=(2, 3))
    rates = np.zeros((m, n_users))
    d_idx, u_idx = np.nonzero(col >= 0)
    own = terms[d_idx, u_idx, home[u_idx], col[d_idx, u_idx]]
    sinr = own / (1.0 + total[d_idx, u_idx] - own)
    rates[d_idx, u_idx] = np.log2(1.0 + sinr)
    return rates


def _nmt_slot_rates(hz, err, alpha, eligible, averages, budget, n_t):
    """Rates for one batch of joint-transmission-mode drops.

    All BSs pool their antennas and power; when more users are eligible
    than the spatial budget B*n_t - margin allows, proportional fairness
    picks the serving set.  Returns (m, U) rates.
    """
    m, n_users, n_bs, _ = hz.shape
    dim = n_bs * n_t
    capacity = dim - _ZF_MARGIN
    root = np.sqrt(alpha)[..., None]
    est = (root * hz).reshape(m, n_users, dim)
    h = est + (root * err).reshape(m, n_users, dim)

    n_elig = eligible.sum(axis=1)
    n_sel = np.minimum(n_elig, capacity)
    p_bar = budget / np.maximum(n_sel, 1)
    norm2 = np.einsum("muv,muv->mu", est.conj(), est).real
    metric = np.log2(1.0 + p_bar[:, None] * norm2) / averages
    metric[~eligible] = -np.inf
    order = np.argsort(-metric, axis=1, kind="stable")
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.arange(n_users)[None, :], axis=1)
    selected = (rank < n_sel[:, None]) & eligible

    beams = np.zeros((m, dim, capacity), dtype=complex)
    col = np.full((m, n_users), -1)
    for k in np.unique(n_sel):
        if k == 0:
            continue
        rows = np.nonzero(n_sel == k)[0]
        users = np.nonzero(selected[rows])[1].reshape(rows.size, k)
        cols = est[rows[:, None], users, :]                # (g, k, dim)
        w = zf_beamformers_batch(cols.swapaxes(-1, -2))
        gains = np.abs(np.einsum("gkv,gvk->gk", cols.conj(), w)) ** 2
        p = allocate_waterfilling(gains, budget)
        beams[rows[:, None], :, np.arange(k)[None, :]] = \
            (w * np.sqrt(p)[:, None, :]).swapaxes(-1, -2)
        col[rows[:, None], users] = np.arange(k)[None, :]

    amp = np.einsum("muv,mvj->muj", h.conj(), beams)
    terms = np.abs(amp) ** 2
    total = terms.sum(axis=2)
    rates = np.zeros((m, n_users))
    d_idx, u_idx = np.nonzero(col >= 0)
    own = terms[d_idx, u_idx, col[d_idx, u_idx]]
    sinr = own / (1.0 + total[d_idx, u_idx] - own)
    rates[d_idx, u_idx] = np.log2(1.0 + sinr)
    return rates


def simulate_variant(variant: SystemVariant, layout: NetworkLayout,
                     pattern: AntennaPattern, n_drops: int,
                     users_per_cell: int = 8, seed=0, n_t: int = 8,
                     power: Optional[float] = None,
                     max_slots: int = _MAX_SLOTS) -> VariantResult:
    """Scheduled throughput of one system over independent user drops.

    Each drop runs until every user's cumulative throughput has moved by
    less than 0.5% over the trailing 20% of slots (checked every 100
    slots from slot 500), or until max_slots.  Drop d draws everything
    from a stream keyed by (seed..., d), so results per drop do not
    depend on n_drops or on the other drops.
    """
    if n_drops < 1:
        raise ValueError("need at least one drop")
    if users_per_cell < 1 or users_per_cell > n_t:
        raise ValueError("users per cell must lie in [1, n_t]")
    if power is None:
        power = power_from_edge_snr(layout)
    key = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    n_users = layout.num_cells * users_per_cell

    rngs = []
    setups = []
    for d in range(n_drops):
        rng = np.random.default_rng(np.random.SeedSequence(key + [d]))
        rngs.append(rng)
        setups.append(_DropSetup(rng, variant, layout, pattern,
                                 users_per_cell, power, n_t))

    # users are laid out cell-by-cell, so the home vector is the same in
    # every drop
    home_vec = setups[0].home
    regions = np.stack([s.regions for s in setups])
    patterns = np.stack([s.pattern for s in setups])
    alpha = np.stack([s.alpha for s in setups])      # (d, 2, U, B)
    kappa = np.stack([s.kappa for s in setups])
    sigma = np.stack([s.sigma for s in setups])
    interior = regions != EDGE

    cum = np.zeros((n_drops, n_users))
    averages = np.full((n_drops, n_users), _PF_INIT)
    active = np.ones(n_drops, dtype=bool)
    slots_run = np.full(n_drops, max_slots)
    snapshots = {}

    for t in range(max_slots):
        live = np.nonzero(active)[0]
        if live.size == 0:
            break
        z = np.empty((live.size, 2, n_users, layout.num_cells, n_t),
                     dtype=complex)
        for i, d in enumerate(live):
            z[i] = _complex_normal(rngs[d], (2, n_users, layout.num_cells,
                                             n_t))
        is_cst = patterns[live, t % patterns.shape[1]]
        rates = np.zeros((live.size, n_users))
        for mode, rows in ((0, np.nonzero(is_cst)[0]),
                           (1, np.nonzero(~is_cst)[0])):
            if rows.size == 0:
                continue
            d = live[rows]
            hz = kappa[d, mode, :, :, None] * z[rows, 0]
            err = sigma[d, mode, :, :, None] * z[rows, 1]
            if mode == 0:
                rates[rows] = _cst_slot_rates(
                    hz, err, alpha[d, 0], home_vec, interior[d], power, n_t)
            else:
                rates[rows] = _nmt_slot_rates(
                    hz, err, alpha[d, 1], ~interior[d], averages[d],
                    layout.num_cells * power, n_t)
        cum[live] += rates
        averages[live] += (rates - averages[live]) / PF_WINDOW

        done = t + 1
        if done % _CHECK_EVERY == 0:
            snapshots[done] = cum.copy()
            if done >= _MIN_SLOTS:
                ref_t = math.floor(0.8 * done / _CHECK_EVERY) * _CHECK_EVERY
                now = cum[live] / done
                ref = snapshots[ref_t][live] / ref_t
                drift = np.abs(now - ref) / np.maximum(ref, 1e-12)
                settled = np.all(drift < _CONV_TOL, axis=1)
                slots_run[live[settled]] = done
                active[live[settled]] = False

    drops = tuple(
        DropResult(throughput=cum[d] / slots_run[d], regions=regions[d],
                   nu_cst=setups[d].nu[0], nu_nmt=setups[d].nu[1],
                   slots=int(slots_run[d]))
        for d in range(n_drops))
    return VariantResult(variant=variant, drops=drops)


def compare_systems(layout: NetworkLayout, pattern: AntennaPattern,
                    n_drops: int = 200, users_per_cell: int = 8, seed=0,
                    n_t: int = 8, power: Optional[float] = None,
                    max_slots: int = _MAX_SLOTS,
                    variants=None) -> dict:
    """Run every reference variant on common drops (same seed, hence the
    same user placements) and return {name: VariantResult}."""
    if variants is None:
        variants = reference_variants(layout)
    return {v.name: simulate_variant(v, layout, pattern, n_drops,
                                     users_per_cell, seed, n_t, power,
                                     max_slots)
            for v in variants}
