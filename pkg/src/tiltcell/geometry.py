"""Cluster geometry for the three-cell downlink layout.

The coverage area is a regular hexagon of circumradius D (= cell radius).
Base stations sit on alternating hexagon vertices (azimuths 0, 120 and 240
degrees from the hexagon center) with boresights pointing at the center, so
each BS covers a rhombic cell spanned by its vertex, the two adjacent
hexagon vertices and the center.  Every point of the rhombus is within
distance D of its BS and the horizontal coverage of a cell spans 120
degrees as seen from the BS.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# region code for points outside every interior disc (network-MIMO region)
EDGE = -1


@dataclass(frozen=True)
class NetworkLayout:
    """Static layout of the cooperating cluster.

    cell_radius is the distance from a BS to the far vertices of its
    rhombic cell [m].  bs_positions is (B, 2) in meters, bs_orientations
    holds the boresight azimuths in degrees.
    """

    num_cells: int
    cell_radius: float
    bs_height: float
    user_height: float
    bs_positions: np.ndarray = field(repr=False)
    bs_orientations: np.ndarray

    def __post_init__(self):
        if self.num_cells < 1:
            raise ValueError("need at least one cell")
        if self.cell_radius <= 0:
            raise ValueError("cell_radius must be positive")
        if self.bs_height <= self.user_height:
            raise ValueError("BS must be above user height")

    @classmethod
    def make(cls, cell_radius: float = 150.0, bs_height: float = 32.0,
             user_height: float = 1.5) -> "NetworkLayout":
        """Build the canonical 3-cell cluster."""
        angles = np.deg2rad([0.0, 120.0, 240.0])
        pos = cell_radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        # boresight from each vertex toward the hexagon center
        bore = np.array([180.0, 300.0, 60.0])
        return cls(3, cell_radius, bs_height, user_height, pos, bore)

    @property
    def delta_h(self) -> float:
        """BS-above-user height difference [m]."""
        return self.bs_height - self.user_height

    @property
    def hexagon_vertices(self) -> np.ndarray:
        """(6, 2) vertices of the coverage hexagon, counterclockwise from 0 deg."""
        a = np.deg2rad(np.arange(6) * 60.0)
        return self.cell_radius * np.stack([np.cos(a), np.sin(a)], axis=1)

    @property
    def hexagon_area(self) -> float:
        """Coverage area [m^2]: 3*sqrt(3)/2 * D^2."""
        return 1.5 * np.sqrt(3.0) * self.cell_radius ** 2

    def rhombus_vertices(self, b: int) -> np.ndarray:
        """(4, 2) corners of cell b: BS vertex, next hexagon vertex, center,
        previous hexagon vertex."""
        hexv = self.hexagon_vertices
        i = 2 * b
        return np.stack([hexv[i], hexv[(i + 1) % 6], np.zeros(2), hexv[i - 1]])


@dataclass(frozen=True)
class UserLocation:
    position: np.ndarray  # (2,) ground coordinates [m]
    height: float
    home_cell: int


def hexagon_contains(points: np.ndarray, layout: NetworkLayout) -> np.ndarray:
    """True where (..., 2) points lie inside the coverage hexagon.

    Uses the three edge-normal half-width tests |p . n| <= D*sqrt(3)/2 with
    normals at 30, 90 and 150 degrees (edges are perpendicular to them).
    """
    points = np.asarray(points, dtype=float)
    half_width = layout.cell_radius * np.sqrt(3.0) / 2.0
    normals = np.deg2rad([30.0, 90.0, 150.0])
    n = np.stack([np.cos(normals), np.sin(normals)], axis=1)  # (3, 2)
    proj = np.abs(points @ n.T)
    return np.all(proj <= half_width + 1e-9, axis=-1)


def home_cells(points: np.ndarray, layout: NetworkLayout) -> np.ndarray:
    """Serving cell index for (..., 2) points: the nearest BS, lowest index
    on ties.

    For this layout nearest-BS association coincides with the rhombic cells:
    the hexagon is partitioned by the three rhombi and every point of
    rhombus b has BS b as its closest vertex.
    """
    points = np.asarray(points, dtype=float)
    d2 = np.sum((points[..., None, :] - layout.bs_positions) ** 2, axis=-1)
    return np.argmin(d2, axis=-1)


def spherical_angles(points: np.ndarray, bs_index: int,
                     layout: NetworkLayout) -> tuple[np.ndarray, np.ndarray]:
    """Azimuth and downtilt angle of the BS-to-user rays.

    points is (..., 2) ground positions.  Returns (phi, theta) in degrees:
    phi is the absolute azimuth of the horizontal projection in (-180, 180],
    theta the depression angle below the horizon, positive downward.  A user
    at the BS ground position maps to theta = 90 and phi = 0 by convention.
    """
    points = np.asarray(points, dtype=float)
    d = points - layout.bs_positions[bs_index]
    dist = np.hypot(d[..., 0], d[..., 1])
    at_bs = dist == 0.0
    phi = np.degrees(np.arctan2(d[..., 1], np.where(at_bs, 1.0, d[..., 0])))
    phi = np.where(at_bs, 0.0, phi)
    # arctan2 yields (-180, 180]; map -180 to +180 for the wrap convention
    phi = np.where(phi <= -180.0, 180.0, phi)
    theta = np.degrees(np.arctan2(layout.delta_h, dist))
    return phi, theta


def sample_user_positions(rng: np.random.Generator, layout: NetworkLayout,
                          users_per_cell: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw users_per_cell points uniformly in every rhombic cell.

    Returns (positions (B*users_per_cell, 2), home (B*users_per_cell,)),
    grouped by cell.  Uniformity comes from the affine map of the unit
    square onto the rhombus spanned by the two far-vertex edges.
    """
    if users_per_cell < 1:
        raise ValueError("users_per_cell must be >= 1")
    pos = []
    home = []
    for b in range(layout.num_cells):
        v = layout.rhombus_vertices(b)
        u = rng.random((users_per_cell, 2))
        p = v[0] + u[:, :1] * (v[1] - v[0]) + u[:, 1:] * (v[3] - v[0])
        pos.append(p)
        home.append(np.full(users_per_cell, b))
    return np.concatenate(pos), np.concatenate(home)


def sample_users(layout: NetworkLayout, users_per_cell: int,
                 rng_seed) -> list[UserLocation]:
    """Like sample_user_positions but returns UserLocation records."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    pos, home = sample_user_positions(rng, layout, users_per_cell)
    return [UserLocation(p, layout.user_height, int(b))
            for p, b in zip(pos, home)]


def grid_over_coverage(layout: NetworkLayout,
                       resolution: float) -> tuple[np.ndarray, np.ndarray]:
    """Regular ground grid covering the hexagon.

    Lattice points sit at half-integer multiples of resolution so no point
    falls exactly on a cell boundary through the origin.  Returns
    (positions (n, 2), home cells (n,)).
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if resolution > layout.cell_radius:
        raise ValueError("resolution exceeds the cell radius")
    r = layout.cell_radius
    k = int(np.ceil(r / resolution)) + 1
    axis = (np.arange(-k, k) + 0.5) * resolution
    xx, yy = np.meshgrid(axis, axis)
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    keep = hexagon_contains(pts, layout)
    pts = pts[keep]
    return pts, home_cells(pts, layout)


def region_of(points: np.ndarray, home: np.ndarray, layout: NetworkLayout,
              d_int: float) -> np.ndarray:
    """Region code per point: the home cell index where the horizontal
    distance to the home BS is at most d_int [m], otherwise EDGE."""
    points = np.asarray(points, dtype=float)
    home = np.asarray(home)
    bs = layout.bs_positions[home]
    dist = np.hypot(*(points - bs).T) if points.ndim == 2 else \
        np.hypot(points[0] - bs[0], points[1] - bs[1])
    return np.where(dist <= d_int, home, EDGE)


def interior_area_fraction(layout: NetworkLayout, d_int: float) -> float:
    """Analytic fraction of the coverage area within d_int of a BS.

    Each interior region is a 120-degree disc sector that stays inside its
    rhombus whenever d_int <= sqrt(3)/2 * D, so the union over the three
    cells has area pi * d_int^2.
    """
    if d_int > np.sqrt(3.0) / 2.0 * layout.cell_radius:
        raise ValueError("no closed form once the disc crosses the cell sides")
    return float(np.pi * d_int ** 2 / layout.hexagon_area)
