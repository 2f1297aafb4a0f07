"""Aggregate interference at the tagged cell: per-cell Gaussians and the power-lognormal fit.

Every interfering cell contributes a received power that is close to Gaussian
in dB once UE position, shadowing and fading are folded in. Their sum in mW is
not Gaussian in dB, so it is summarised by a power lognormal
``Phi((q - mu_Q) / sigma_Q) ** lam``. Here we build that fit for the hex
lattice and check it against a direct Monte Carlo of the interference.

Run:  python demos/02_interference_fit.py   (about a minute)
"""

import numpy as np

from dnaga.channel import ChannelParams
from dnaga.core import analyze_cell, power_lognormal_cdf_db
from dnaga.fading import FadingModel
from dnaga.scenario import generate_hex_lattice
from dnaga.simulator import SimConfig, ks_distance, simulate

params = ChannelParams()
fading = FadingModel.rayleigh()
dep = generate_hex_lattice(55.43, 228)

a = analyze_cell(dep, 0, params, fading, n_samples=100_000)
print(f"signal G_1: mean {a.signal.mean:.2f} dBm, variance {a.signal.var:.2f} dB^2")

order = np.argsort([-q.mean for q in a.interference])
print("\nstrongest interferers (Q_b, dBm):")
for i in order[:5]:
    b, q = a.interferers[i], a.interference[i]
    print(f"  cell {b:3d}  mean {q.mean:8.2f}  variance {q.var:6.1f}")

pl = a.aggregate
print(f"\npower lognormal: lam={pl.lam:.1f}  mu_Q={pl.mu_q:.2f}  sigma_Q^2={pl.var_q:.1f}")
print(f"  implied dB mean {pl.mean_db():.2f}, variance {pl.var_db():.2f}")

sim = simulate(dep, params, fading, SimConfig(n_ue_drops=200, n_channel_draws=200, seed=5))
emp = sim.interference
print(f"\nsimulated interference: {len(emp)} samples, mean {emp.mean():.2f} dBm")
print(f"KS distance fit vs simulation: {ks_distance(emp, lambda q: power_lognormal_cdf_db(pl, q)):.4f}")
for p in (0.05, 0.5, 0.95):
    print(f"  {p:4.0%} quantile: fit {pl.quantile_db(p):8.2f}   simulated {emp.quantile(p):8.2f}")
