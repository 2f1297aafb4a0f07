"""From one network to many: averaging over random drops and the hex-lattice bound.

One analysis describes one fixed deployment. Averaging the SIR CDF over a
handful of random hotspot drops approximates the performance of the random
network, and analysing a regular lattice of the same density gives an
optimistic reference curve. This demo uses a few deployments so it finishes
quickly; the acceptance suite runs fifty.

Run:  python demos/04_macroscopic.py   (a few minutes)
"""

from dnaga.channel import ChannelParams
from dnaga.fading import FadingModel
from dnaga.macroscopic import analytical_hex_bound, semi_analytical, simulate_deployments
from dnaga.scenario import HotspotConfig

params, fading = ChannelParams(), FadingModel.rayleigh()
hot = HotspotConfig()
n_dep = 3

semi = semi_analytical(hot, params, fading, n_dep, seed=1)
pooled = simulate_deployments(hot, params, fading, n_dep, seed=1, n_ue_drops=40)
semi = semi.compare(pooled)
print(f"{n_dep} deployments, every cell tagged in turn")
print(f"  averaged analytic median SIR {semi.median():.2f} dB, pooled simulation {pooled.median():.2f} dB")
print(f"  max deviation {semi.max_dev:.4f}, mean deviation {semi.mean_dev:.4f}")

bound, g1, pl = analytical_hex_bound(hot, params, fading)
print(f"\nhex lattice at {hot.density_per_km2:.2f} cells per km^2: median SIR {bound.median():.2f} dB")
print(f"  gap to the random drops: {bound.median() - semi.median():.2f} dB")
print(f"  bound CDF at the random-drop median: {float(bound.mean_cdf(semi.median())):.3f} (an upper bound keeps this <= 0.5)")
