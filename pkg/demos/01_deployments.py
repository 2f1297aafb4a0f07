"""Build the two kinds of network the analysis runs on and look at them.

A random hotspot drop scatters four small cells inside each of 57 macro
sectors. The hex lattice puts the same number of cells on a regular grid with
the same density. Both are deterministic once built, which is what lets the
analysis treat every BS position as known.

Run:  python demos/01_deployments.py
"""

import numpy as np

from dnaga.scenario import (
    HotspotConfig,
    generate_hex_lattice,
    generate_hotspot,
    hex_spacing,
    region_mask,
    sample_ues,
)

hot_cfg = HotspotConfig()
hot = generate_hotspot(hot_cfg, seed=1)
print(f"hotspot drop: {len(hot)} cells, density {hot_cfg.density_per_km2:.2f} per km^2")

d = hot.pairwise_bs_distances()
np.fill_diagonal(d, np.inf)
print(f"  closest BS pair {d.min() * 1000:.1f} m (constraint {hot_cfg.min_inter_bs_km * 1000:.0f} m)")

lattice = generate_hex_lattice(hot_cfg.density_per_km2, hot_cfg.n_cells)
print(f"hex lattice: {len(lattice)} cells, spacing {hex_spacing(hot_cfg.density_per_km2) * 1000:.1f} m")
print(f"  tagged cell 0 sits at {lattice.positions[0]}")

# Coverage regions: a 10-40 m annulus clipped where a nearer BS also covers the point.
# Cells whose disks overlap lose part of their annulus, so their UEs crowd differently.
rng = np.random.default_rng(0)
overlapping = [b for b in range(len(hot)) if len(hot.competitors[b])]
print(f"\n{len(overlapping)} of {len(hot)} hotspot cells overlap a neighbour")
if overlapping:
    b = overlapping[0]
    box = hot.positions[b] + rng.uniform(-0.04, 0.04, (200_000, 2))
    inside = region_mask(hot, b, box)
    annulus = np.pi * (0.04 ** 2 - 0.01 ** 2)
    print(f"  cell {b}: region keeps {inside.mean() * 0.08 ** 2 / annulus:.1%} of its annulus")

# UE positions respect the region; inverse-radial placement pulls them towards the BS.
for kind in ("uniform", "inverse_radial"):
    z = sample_ues(lattice, 0, 50_000, rng, kind)
    r = np.hypot(*(z - lattice.positions[0]).T) * 1000
    print(f"{kind:>15}: mean UE distance {r.mean():.1f} m, median {np.median(r):.1f} m")
