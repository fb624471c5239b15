"""Experiment driver: one subcommand per study, CSV output.

Subcommands
    validate-rates    sample-user segment, analytic vs Monte-Carlo rates
    tilt-sweep        edge/average/peak throughput versus common tilt
    optimize-regions  interior-radius and per-region tilt search
    compare-systems   scheduled-throughput CDFs of the five variants

Every run is a pure function of (config, seed): identical inputs give
byte-identical CSVs, regardless of --threads.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analytic_rates import cst_conditional_rate, nmt_conditional_rate
from .antenna import AntennaPattern
from .channel import path_gain_table, power_from_edge_snr
from .geometry import NetworkLayout, grid_over_coverage, interior_area_fraction
from .montecarlo import ergodic_rate_mc
from .scheduler_sim import reference_variants, simulate_variant
from .tilt_optimizer import optimize_region_params, throughput_cdf


@dataclasses.dataclass
class RunConfig:
    """All tunables with their default operating point.

    The rate studies (validate-rates, tilt-sweep, optimize-regions) use
    users_per_cell co-scheduled users; the scheduled comparison places
    sched_users_per_cell per cell and drops them sched_drops times.
    """

    cell_radius: float = 150.0
    bs_height: float = 32.0
    user_height: float = 1.5
    n_t: int = 8
    edge_snr_db: float = 10.0
    users_per_cell: int = 6
    sched_users_per_cell: int = 8
    segment_step: float = 10.0
    n_fadings: int = 1000
    cst_drops: int = 1
    nmt_drops: int = 100
    tilt_min: float = 0.0
    tilt_max: float = 45.0
    tilt_step: float = 1.0
    grid_resolution: float = 3.0
    d_frac_min: float = 0.15
    d_frac_max: float = 0.95
    d_frac_step: float = 0.05
    sched_drops: int = 200
    max_slots: int = 5000
    seed: int = 0

    def validate(self):
        if self.cell_radius <= 0 or self.bs_height <= self.user_height:
            raise ValueError("layout dimensions out of range")
        if self.n_t < 1:
            raise ValueError("n_t must be at least 1")
        for name in ("users_per_cell", "sched_users_per_cell"):
            k = getattr(self, name)
            if not 1 <= k <= self.n_t:
                raise ValueError(f"{name} must lie in [1, n_t]")
        for name in ("segment_step", "tilt_step", "grid_resolution",
                     "d_frac_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("n_fadings", "cst_drops", "nmt_drops", "sched_drops",
                     "max_slots"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.tilt_min > self.tilt_max:
            raise ValueError("tilt range is empty")
        if not 0 < self.d_frac_min <= self.d_frac_max <= 1:
            raise ValueError("d_int fractions must lie in (0, 1]")

    def layout(self) -> NetworkLayout:
        return NetworkLayout.make(cell_radius=self.cell_radius,
                                  bs_height=self.bs_height,
                                  user_height=self.user_height)


def load_config(path) -> RunConfig:
    """Parse a flat 'key = value' file ('#' starts a comment).  Unknown
    keys are errors so a typo cannot silently run the defaults."""
    fields = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    casts = {"int": int, "float": float}
    overrides = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in fields:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        overrides[key] = casts[fields[key]](value)
    config = RunConfig(**overrides)
    config.validate()
    return config


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x))
                             if isinstance(x, (float, np.floating)) else x
                             for x in row])


def cmd_validate_rates(config: RunConfig, out: Path, threads: int) -> Path:
    """Analytic vs Monte-Carlo rates for a sample user on the segment
    from the first BS to the coverage center, isotropic antennas."""
    layout = config.layout()
    pattern = AntennaPattern(isotropic=True)
    power = power_from_edge_snr(layout, config.edge_snr_db)
    tilts = np.zeros(layout.num_cells)
    sizes = np.full(layout.num_cells, config.users_per_cell)
    n_users = layout.num_cells * config.users_per_cell
    distances = np.arange(config.segment_step,
                          layout.cell_radius + 1e-9, config.segment_step)
    direction = -layout.bs_positions[0] / layout.cell_radius

    def one(i):
        point = layout.bs_positions[0] + distances[i] * direction
        alpha = path_gain_table(point, layout, tilts, pattern)[0]
        cst_an = cst_conditional_rate(alpha, sizes, 0, config.n_t, power)
        nmt_an = nmt_conditional_rate(alpha, n_users, config.n_t, power)
        cst_mc = ergodic_rate_mc(
            "cst", point, layout, pattern, tilts, config.n_fadings,
            config.cst_drops, seed=[config.seed, i],
            users_per_cell=config.users_per_cell, power=power,
            n_t=config.n_t)
        nmt_mc = ergodic_rate_mc(
            "nmt", point, layout, pattern, tilts, config.n_fadings,
            config.nmt_drops, seed=[config.seed, i],
            users_per_cell=config.users_per_cell, power=power,
            n_t=config.n_t)
        return (distances[i], cst_an, cst_mc.mean, nmt_an, nmt_mc.mean)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(one, range(distances.size)))
    path = out / "rate_validation.csv"
    _write_csv(path, ["distance_m", "cst_analytic", "cst_mc",
                      "nmt_analytic", "nmt_mc"], rows)
    return path


def cmd_tilt_sweep(config: RunConfig, out: Path, threads: int) -> Path:
    """Edge/average/peak throughput of both modes over the tilt range."""
    layout = config.layout()
    pattern = AntennaPattern()
    power = power_from_edge_snr(layout, config.edge_snr_db)
    grid = grid_over_coverage(layout, config.grid_resolution)
    tilts = np.arange(config.tilt_min, config.tilt_max + 1e-9,
                      config.tilt_step)

    def one(task):
        mode, beta = task
        cdf = throughput_cdf(mode, beta, layout, pattern,
                             users_per_cell=config.users_per_cell,
                             n_t=config.n_t, power=power, grid=grid)
        return cdf.edge, cdf.average, cdf.peak

    tasks = [(mode, beta) for mode in ("cst", "nmt") for beta in tilts]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        triples = list(pool.map(one, tasks))
    cst, nmt = triples[:tilts.size], triples[tilts.size:]
    rows = [(beta, *cst[i], *nmt[i]) for i, beta in enumerate(tilts)]
    path = out / "tilt_sweep.csv"
    _write_csv(path, ["tilt_deg", "cst_edge", "cst_average", "cst_peak",
                      "nmt_edge", "nmt_average", "nmt_peak"], rows)
    return path


def cmd_optimize_regions(config: RunConfig, out: Path, threads: int) -> Path:
    """Interior-radius / tilt-pair search and the resulting operating
    point (threads unused: the search is one vectorized pass)."""
    layout = config.layout()
    pattern = AntennaPattern()
    power = power_from_edge_snr(layout, config.edge_snr_db)
    d_fracs = np.arange(config.d_frac_min, config.d_frac_max + 1e-9,
                        config.d_frac_step)
    params, rows = optimize_region_params(
        layout, pattern, d_fracs=d_fracs,
        users_per_cell=config.users_per_cell, n_t=config.n_t, power=power,
        resolution=config.grid_resolution)
    surface = out / "region_surface.csv"
    _write_csv(surface, ["d_int_m", "beta_cst_deg", "beta_nmt_deg",
                         "avg_throughput"], rows)
    chosen = out / "region_params.csv"
    frac = interior_area_fraction(layout, params.d_int) \
        if params.d_int <= np.sqrt(3.0) / 2.0 * layout.cell_radius else \
        float("nan")
    _write_csv(chosen, ["d_int_m", "beta_cst_deg", "beta_nmt_deg",
                        "interior_area_fraction"],
               [(params.d_int, params.beta_cst, params.beta_nmt, frac)])
    return surface


def cmd_compare_systems(config: RunConfig, out: Path, threads: int) -> Path:
    """Scheduled-throughput CDFs and headline gains of the five systems."""
    layout = config.layout()
    pattern = AntennaPattern()
    power = power_from_edge_snr(layout, config.edge_snr_db)
    variants = reference_variants(layout)

    def one(variant):
        return simulate_variant(
            variant, layout, pattern, config.sched_drops,
            users_per_cell=config.sched_users_per_cell, seed=config.seed,
            n_t=config.n_t, power=power, max_slots=config.max_slots)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(one, variants))
    cdfs = {r.variant.name: r.cdf for r in results}

    names = [v.name for v in variants]
    samples = np.column_stack([cdfs[n].samples for n in names])
    path = out / "compare_cdf.csv"
    _write_csv(path, names, samples)

    _write_csv(out / "compare_summary.csv",
               ["variant", "edge", "average", "peak"],
               [(n, cdfs[n].edge, cdfs[n].average, cdfs[n].peak)
                for n in names])

    am, ne, na, ca = (cdfs[k] for k in
                      ("am-3d-bf", "nmt-e", "nmt-a", "uncoord-cst-a"))
    _write_csv(out / "compare_gains.csv", ["comparison", "value"],
               [("am_edge_loss_vs_nmt_e", (ne.edge - am.edge) / ne.edge),
                ("am_avg_gain_vs_nmt_a", am.average / na.average - 1.0),
                ("am_peak_gain_vs_cst_a", am.peak / ca.peak - 1.0)])
    return path


_COMMANDS = {
    "validate-rates": cmd_validate_rates,
    "tilt-sweep": cmd_tilt_sweep,
    "optimize-regions": cmd_optimize_regions,
    "compare-systems": cmd_compare_systems,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tiltcell", description="Multicell downlink tilt studies")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", type=Path, default=None,
                        help="key = value config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory (created if missing)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for independent sweep points")
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")

    try:
        config = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            config.seed = args.seed
        config.validate()
    except ValueError as err:
        parser.error(str(err))

    args.out.mkdir(parents=True, exist_ok=True)
    written = _COMMANDS[args.command](config, args.out, args.threads)
    print(written)
    return 0


if __name__ == "__main__":
    sys.exit(main())
