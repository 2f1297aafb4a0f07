"""Deterministic BS deployments, coverage regions and UE placement.

A cell's coverage region is the annulus ``[min_bs_ue_km, coverage_radius_km]``
around its BS, minus every point where another BS whose coverage disk also
contains the point is strictly closer (ties go to the lower cell index).
Regions are therefore disjoint, and overlapping disks get clipped along the
perpendicular bisector.

Cell ids are 0-based. In a hexagonal lattice, cell 0 is the centroid cell,
i.e. the tagged cell.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._util import STREAM_HOTSPOT, GenerationError, SamplingError, substream

UNIFORM = "uniform"
INVERSE_RADIAL = "inverse_radial"
UE_DISTRIBUTIONS = (UNIFORM, INVERSE_RADIAL)

MAX_ATTEMPTS = 10_000


@dataclass(frozen=True)
class Cell:
    id: int
    bs_position: tuple
    coverage_radius_km: float = 0.04
    min_bs_ue_km: float = 0.01
    ue_distribution: str = UNIFORM

    def __post_init__(self):
        if not self.coverage_radius_km > self.min_bs_ue_km > 0:
            raise ValueError(
                f"cell {self.id}: need coverage_radius_km > min_bs_ue_km > 0, got "
                f"{self.coverage_radius_km} and {self.min_bs_ue_km}"
            )
        if self.ue_distribution not in UE_DISTRIBUTIONS:
            raise ValueError(f"unknown UE distribution {self.ue_distribution!r}")


@dataclass(frozen=True)
class Deployment:
    cells: tuple
    bounds: tuple = (0.0, 0.0, 0.0, 0.0)  # (xmin, ymin, xmax, ymax) in km
    seed: int = 0

    def __len__(self):
        return len(self.cells)

    @cached_property
    def positions(self):
        pos = np.array([c.bs_position for c in self.cells], dtype=float)
        return pos.reshape(len(self.cells), 2)

    @cached_property
    def radii(self):
        return np.array([c.coverage_radius_km for c in self.cells], dtype=float)

    @cached_property
    def min_distances(self):
        return np.array([c.min_bs_ue_km for c in self.cells], dtype=float)

    @cached_property
    def competitors(self):
        """Per cell, the other cells whose coverage disk can overlap its own."""
        pos, r = self.positions, self.radii
        if len(self.cells) == 0:
            return ()
        dist = np.hypot(*(pos[:, None, :] - pos[None, :, :]).transpose(2, 0, 1))
        reach = r[:, None] + r[None, :]
        out = []
        for b in range(len(self.cells)):
            mask = dist[b] <= reach[b]
            mask[b] = False
            out.append(np.flatnonzero(mask))
        return tuple(out)

    def pairwise_bs_distances(self):
        pos = self.positions
        return np.hypot(*(pos[:, None, :] - pos[None, :, :]).transpose(2, 0, 1))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "x_km", "y_km", "radius_km", "ue_dist_kind"])
            for c in self.cells:
                x, y = c.bs_position
                w.writerow([c.id, repr(float(x)), repr(float(y)),
                            repr(float(c.coverage_radius_km)), c.ue_distribution])

    @classmethod
    def from_csv(cls, path, min_bs_ue_km=0.01):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        cells = tuple(
            Cell(int(r["id"]), (float(r["x_km"]), float(r["y_km"])),
                 float(r["radius_km"]), min_bs_ue_km, r["ue_dist_kind"])
            for r in rows
        )
        return cls(cells, _bounds(cells))


def _bounds(cells):
    if not cells:
        return (0.0, 0.0, 0.0, 0.0)
    pos = np.array([c.bs_position for c in cells], dtype=float)
    r = max(c.coverage_radius_km for c in cells)
    return (float(pos[:, 0].min() - r), float(pos[:, 1].min() - r),
            float(pos[:, 0].max() + r), float(pos[:, 1].max() + r))


# --------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class HotspotConfig:
    """3GPP-style random hotspot drop guided by dummy macro sites."""

    isd_km: float = 0.5
    n_sites: int = 19
    sectors_per_site: int = 3
    cells_per_macrocell: int = 4
    min_inter_bs_km: float = 0.04
    coverage_radius_km: float = 0.04
    min_bs_ue_km: float = 0.01
    ue_distribution: str = UNIFORM

    @property
    def n_cells(self):
        return self.n_sites * self.sectors_per_site * self.cells_per_macrocell

    @property
    def site_area_km2(self):
        r = self.isd_km / np.sqrt(3.0)
        return 1.5 * np.sqrt(3.0) * r * r

    @property
    def density_per_km2(self):
        """Small-cell density over the macro-site footprint."""
        return self.n_cells / (self.n_sites * self.site_area_km2)


def hex_site_centers(n_sites, isd_km):
    """First ``n_sites`` points of a hexagonal lattice ordered by ring, then angle."""
    rings = 0
    while 1 + 3 * rings * (rings + 1) < n_sites:
        rings += 1
    pts = []
    for i in range(-rings, rings + 1):
        for j in range(-rings, rings + 1):
            k = -i - j
            if max(abs(i), abs(j), abs(k)) <= rings:
                ring = max(abs(i), abs(j), abs(k))
                x = isd_km * (i + 0.5 * j)
                y = isd_km * (np.sqrt(3.0) / 2.0) * j
                ang = np.arctan2(y, x) % (2 * np.pi)
                pts.append((ring, round(ang, 12), x, y))
    pts.sort()
    return np.array([(x, y) for _, _, x, y in pts[:n_sites]]).reshape(-1, 2)


def generate_hotspot(config=HotspotConfig(), seed=1):
    """Drop ``cells_per_macrocell`` small cells uniformly in every macro sector.

    Each site hexagon (circumradius ISD/sqrt(3)) is cut into
    ``sectors_per_site`` equal wedges; for the standard 3 sectors these are
    the rhombi formed by alternate vertices. Every BS respects the global
    minimum inter-BS distance, enforced by rejection.
    """
    rng = substream(seed, STREAM_HOTSPOT)
    centers = hex_site_centers(config.n_sites, config.isd_km)
    R = config.isd_km / np.sqrt(3.0)
    placed = []
    n_sec = config.sectors_per_site
    for s, c in enumerate(centers):
        for k in range(n_sec):
            for _ in range(config.cells_per_macrocell):
                for _attempt in range(MAX_ATTEMPTS):
                    p = c + _sector_point(rng, R, k, n_sec)
                    if not placed or np.min(np.hypot(*(np.asarray(placed) - p).T)) >= config.min_inter_bs_km:
                        placed.append(p)
                        break
                else:
                    raise GenerationError(
                        f"macrocell (site {s}, sector {k}): no BS position satisfies the "
                        f"{config.min_inter_bs_km} km minimum distance after {MAX_ATTEMPTS} attempts"
                    )
    cells = tuple(
        Cell(i, (float(p[0]), float(p[1])), config.coverage_radius_km,
             config.min_bs_ue_km, config.ue_distribution)
        for i, p in enumerate(placed)
    )
    return Deployment(cells, _bounds(cells), int(seed))


def _sector_point(rng, R, k, n_sec):
    if n_sec == 3:
        # rhombus spanned by vertices at 30+120k and 150+120k degrees
        a0 = np.deg2rad(30.0 + 120.0 * k)
        a1 = a0 + np.deg2rad(120.0)
        u, v = rng.random(2)
        return R * (u * np.array([np.cos(a0), np.sin(a0)]) + v * np.array([np.cos(a1), np.sin(a1)]))
    # generic: rejection from the hexagon, restricted to the angular wedge
    lo, width = 2 * np.pi * k / n_sec, 2 * np.pi / n_sec
    while True:
        p = rng.uniform(-R, R, 2)
        if _in_hexagon(p, R) and (np.arctan2(p[1], p[0]) - lo) % (2 * np.pi) < width:
            return p


def _in_hexagon(p, R):
    # vertices at 30 + 60k degrees -> flat sides facing 0, 60, ... degrees
    apothem = R * np.sqrt(3.0) / 2.0
    for ang in np.deg2rad(np.arange(0, 360, 60)):
        if p[0] * np.cos(ang) + p[1] * np.sin(ang) > apothem:
            return False
    return True


def hex_spacing(density_per_km2):
    """Triangular-lattice spacing whose cell area sqrt(3)/2 d^2 equals 1/density."""
    return float(np.sqrt(2.0 / (np.sqrt(3.0) * density_per_km2)))


def generate_hex_lattice(density_per_km2, count, coverage_radius_km=0.04,
                         min_bs_ue_km=0.01, ue_distribution=UNIFORM):
    """The ``count`` lattice points nearest the origin; cell 0 sits at the origin."""
    if not density_per_km2 > 0:
        raise ValueError("density_per_km2 must be positive")
    if count < 1:
        raise ValueError("count must be >= 1")
    d = hex_spacing(density_per_km2)
    n = int(np.ceil(np.sqrt(count))) + 2
    i, j = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1), indexing="ij")
    x = d * (i + 0.5 * j).ravel()
    y = d * (np.sqrt(3.0) / 2.0 * j).ravel()
    ring = np.round(np.hypot(x, y) / d, 9)
    ang = np.round(np.arctan2(y, x) % (2 * np.pi), 9)
    order = np.lexsort((ang, ring))[:count]
    cells = tuple(
        Cell(b, (float(x[o]), float(y[o])), coverage_radius_km, min_bs_ue_km, ue_distribution)
        for b, o in enumerate(order)
    )
    return Deployment(cells, _bounds(cells), 0)


def with_ue_distribution(dep, kind):
    cells = tuple(
        Cell(c.id, c.bs_position, c.coverage_radius_km, c.min_bs_ue_km, kind) for c in dep.cells
    )
    return Deployment(cells, dep.bounds, dep.seed)


# --------------------------------------------------------------------------
# regions and UE sampling


def region_mask(dep, cell_id, points):
    """Vectorised membership test for an ``(n, 2)`` array of points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    own = dep.positions[cell_id]
    d_own = np.hypot(pts[:, 0] - own[0], pts[:, 1] - own[1])
    ok = (d_own >= dep.min_distances[cell_id]) & (d_own <= dep.radii[cell_id])
    for c in dep.competitors[cell_id]:
        if not ok.any():
            break
        pc = dep.positions[c]
        d_c = np.hypot(pts[:, 0] - pc[0], pts[:, 1] - pc[1])
        covered = d_c <= dep.radii[c]
        beaten = (d_c < d_own) | ((d_c == d_own) & (c < cell_id))
        ok &= ~(covered & beaten)
    return ok


def region_contains(dep, cell_id, point):
    return bool(region_mask(dep, cell_id, point)[0])


def _annulus_draw(rng, n, r1, r2, kind):
    if kind == UNIFORM:
        r = np.sqrt(rng.uniform(r1 * r1, r2 * r2, n))
    else:
        # density W/rho times Jacobian 2 pi rho gives a uniform radius
        r = rng.uniform(r1, r2, n)
    th = rng.uniform(0.0, 2 * np.pi, n)
    return r, th


def sample_ues(dep, cell_id, n, rng, dist=None):
    """``n`` UE positions in the region of ``cell_id``, shape ``(n, 2)``.

    Rejection sampling: proposals come from the full annulus under the
    requested density, so accepted points follow the density renormalised
    over the clipped region.
    """
    cell = dep.cells[cell_id]
    kind = cell.ue_distribution if dist is None else dist
    r1, r2 = cell.min_bs_ue_km, cell.coverage_radius_km
    own = dep.positions[cell_id]
    out = np.empty((n, 2))
    filled = attempts = 0
    pilot = True
    while filled < n:
        batch = max(64, int(1.25 * (n - filled)) + 16)
        r, th = _annulus_draw(rng, batch, r1, r2, kind)
        pts = np.column_stack((own[0] + r * np.cos(th), own[1] + r * np.sin(th)))
        pts = pts[region_mask(dep, cell_id, pts)]
        attempts += batch
        if pilot and len(pts) == 0 and attempts >= MAX_ATTEMPTS:
            raise SamplingError(f"cell {cell_id}: coverage region appears empty")
        if attempts > MAX_ATTEMPTS * max(n, 1):
            raise SamplingError(f"cell {cell_id}: rejection budget exhausted")
        if len(pts):
            pilot = False
        take = min(len(pts), n - filled)
        out[filled:filled + take] = pts[:take]
        filled += take
    return out


def sample_ue(dep, cell_id, rng, dist=None):
    return sample_ues(dep, cell_id, 1, rng, dist)[0]
