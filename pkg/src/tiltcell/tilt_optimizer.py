"""Tilt throughput analysis and vertical-region parameter search.

Rates come from the closed-form engine in analytic_rates, evaluated on a
regular ground grid; edge/average/peak throughput are the 5th/50th/95th
percentiles of the resulting distribution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analytic_rates import cst_rates, nmt_rates
from .antenna import AntennaPattern
from .channel import path_gain_table, power_from_edge_snr
from .geometry import EDGE, NetworkLayout, grid_over_coverage, region_of

_METRIC_LEVELS = {"edge": 0.05, "average": 0.50, "peak": 0.95}


@dataclass(frozen=True)
class ThroughputCdf:
    """Per-location rate samples, kept sorted ascending."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if s.size == 0:
            raise ValueError("throughput CDF needs at least one sample")
        object.__setattr__(self, "samples", s)

    def percentile(self, p: float) -> float:
        """Nearest-rank percentile: the ceil(p*n)-th smallest sample."""
        if not 0.0 < p <= 1.0:
            raise ValueError("percentile level must lie in (0, 1]")
        return float(self.samples[math.ceil(p * self.samples.size) - 1])

    @property
    def edge(self) -> float:
        return self.percentile(0.05)

    @property
    def average(self) -> float:
        return self.percentile(0.50)

    @property
    def peak(self) -> float:
        return self.percentile(0.95)


@dataclass(frozen=True)
class TiltSweep:
    """Edge/average/peak throughput curves over a common-tilt sweep."""

    tilts: np.ndarray
    edge: np.ndarray
    average: np.ndarray
    peak: np.ndarray

    def optimum(self, metric: str) -> float:
        """Tilt maximizing the given metric ('edge'|'average'|'peak')."""
        if metric not in _METRIC_LEVELS:
            raise ValueError(f"unknown metric {metric!r}")
        return float(self.tilts[int(np.argmax(getattr(self, metric)))])


@dataclass(frozen=True)
class RegionParams:
    """Vertical-region operating point: interior radius plus the two
    region tilts (interior cells run single-cell mode at beta_cst, the
    edge ring runs joint transmission at beta_nmt)."""

    d_int: float
    beta_cst: float
    beta_nmt: float

    def __post_init__(self):
        if self.d_int <= 0:
            raise ValueError("d_int must be positive")
        for beta in (self.beta_cst, self.beta_nmt):
            if not 0.0 <= beta <= 90.0:
                raise ValueError("tilts must lie in [0, 90] degrees")


def _resolve_grid(layout, resolution, grid):
    if grid is not None:
        points, home = grid
        return np.asarray(points, dtype=float), np.asarray(home)
    return grid_over_coverage(layout, resolution)


def _rate_vector(mode, tilt, points, home, layout, pattern, users_per_cell,
                 n_t, power):
    tilts = np.full(layout.num_cells, float(tilt))
    alphas = path_gain_table(points, layout, tilts, pattern)
    if mode == "cst":
        sizes = np.full(layout.num_cells, users_per_cell)
        return cst_rates(alphas, home, sizes, n_t, power)
    return nmt_rates(alphas, layout.num_cells * users_per_cell, n_t, power)


def throughput_cdf(mode: str, tilt: float, layout: NetworkLayout,
                   pattern: AntennaPattern, users_per_cell: int = 6,
                   n_t: int = 8, power: Optional[float] = None,
                   resolution: float = 3.0, grid=None) -> ThroughputCdf:
    """Coverage-wide rate distribution at a common tilt.

    mode is "cst" or "nmt"; every BS applies the same tilt and each cell
    carries users_per_cell co-scheduled users.  grid may supply a
    precomputed (points, home) pair to share across sweeps.
    """
    if mode not in ("cst", "nmt"):
        raise ValueError("mode must be 'cst' or 'nmt'")
    points, home = _resolve_grid(layout, resolution, grid)
    if power is None:
        power = power_from_edge_snr(layout)
    return ThroughputCdf(_rate_vector(mode, tilt, points, home, layout,
                                      pattern, users_per_cell, n_t, power))


def sweep_tilts(mode: str, layout: NetworkLayout, pattern: AntennaPattern,
                tilts=None, users_per_cell: int = 6, n_t: int = 8,
                power: Optional[float] = None, resolution: float = 3.0,
                grid=None) -> TiltSweep:
    """Edge/average/peak throughput versus common tilt (default 0..45 deg,
    1 degree steps)."""
    if mode not in ("cst", "nmt"):
        raise ValueError("mode must be 'cst' or 'nmt'")
    tilts = np.arange(0.0, 46.0) if tilts is None else \
        np.asarray(tilts, dtype=float)
    if tilts.size == 0:
        raise ValueError("tilt sweep needs at least one tilt")
    if tilts.size > 1 and np.min(np.diff(tilts)) < 1.0 - 1e-12:
        raise ValueError("tilt grid must ascend in steps of >= 1 degree")
    points, home = _resolve_grid(layout, resolution, grid)
    if power is None:
        power = power_from_edge_snr(layout)
    triples = np.empty((tilts.size, 3))
    for i, beta in enumerate(tilts):
        cdf = ThroughputCdf(_rate_vector(mode, beta, points, home, layout,
                                         pattern, users_per_cell, n_t, power))
        triples[i] = (cdf.edge, cdf.average, cdf.peak)
    return TiltSweep(tilts=tilts, edge=triples[:, 0], average=triples[:, 1],
                     peak=triples[:, 2])


def optimize_region_params(layout: NetworkLayout, pattern: AntennaPattern,
                           d_fracs=None, users_per_cell: int = 6,
                           n_t: int = 8, power: Optional[float] = None,
                           resolution: float = 3.0, grid=None):
    """Exhaustive search of (d_int, beta_cst, beta_nmt) maximizing the
    median mixed throughput.

    Grid points within d_int of their home BS are scored with the
    single-cell rate at beta_cst, the rest with the joint-transmission
    rate at beta_nmt.  For each interior radius the two tilts range over
    [arctan(dh/d_int), 90] and [0, arctan(dh/d_int)] on integer degrees,
    which keeps the per-tilt rate vectors shareable across radii.
    Returns (best RegionParams, rows) with one
    (d_int, beta_cst, beta_nmt, median) row per radius.
    """
    if d_fracs is None:
        d_fracs = np.arange(0.15, 0.95 + 1e-9, 0.05)
    d_fracs = np.asarray(d_fracs, dtype=float)
    if d_fracs.size == 0 or np.any(d_fracs <= 0) or np.any(d_fracs > 1):
        raise ValueError("d_int fractions must lie in (0, 1]")
    points, home = _resolve_grid(layout, resolution, grid)
    if power is None:
        power = power_from_edge_snr(layout)
    n = points.shape[0]
    rank = math.ceil(0.5 * n) - 1

    cache: dict[tuple, np.ndarray] = {}

    def rates(mode, beta):
        key = (mode, int(round(beta)))
        if key not in cache:
            cache[key] = _rate_vector(mode, key[1], points, home, layout,
                                      pattern, users_per_cell, n_t, power)
        return cache[key]

    rows = []
    for frac in d_fracs:
        d_int = frac * layout.cell_radius
        split = math.degrees(math.atan2(layout.delta_h, d_int))
        cst_cand = np.arange(math.ceil(split), 91)
        nmt_cand = np.arange(0, math.floor(split) + 1)
        interior = region_of(points, home, layout, d_int) != EDGE
        best = None
        for b_c in cst_cand:
            mix = np.where(interior, rates("cst", b_c), 0.0)
            for b_n in nmt_cand:
                mix[~interior] = rates("nmt", b_n)[~interior]
                med = np.partition(mix, rank)[rank]
                if best is None or med > best[3]:
                    best = (d_int, float(b_c), float(b_n), med)
        rows.append(best)
    top = max(rows, key=lambda r: r[3])
    return RegionParams(d_int=top[0], beta_cst=top[1], beta_nmt=top[2]), rows
