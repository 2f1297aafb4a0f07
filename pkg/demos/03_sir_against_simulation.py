"""SIR distribution of the tagged hex cell: analysis against simulation, both fading cases.

Case 1 uses Rayleigh fading and uniformly placed UEs. Case 2 uses milder
Gamma fading (k=10, theta=0.1) and UEs that cluster near their BS. The
second case should come out ahead.

Run:  python demos/03_sir_against_simulation.py   (under a minute)
"""

from dnaga import config
from dnaga.core import analyze_cell
from dnaga.simulator import SimConfig, max_cdf_deviation, simulate

for name in ("case1_hex", "case2_hex"):
    cfg = config.load(config.shipped_config(name))
    dep, params, fading = cfg.deployment(), cfg.channel_params(), cfg.fading_model()
    a = analyze_cell(dep, 0, params, fading, n_samples=100_000)
    sim = simulate(dep, params, fading, SimConfig(300, 300, seed=2))

    print(f"{name}: analytic median SIR {a.sir_cdf.median():.2f} dB, "
          f"simulated {sim.sir.median():.2f} dB")
    print(f"  max CDF deviation over {len(sim.sir)} samples: {max_cdf_deviation(sim.sir, a.sir_cdf):.4f}")
    for z in (-5.0, 0.0, 5.0, 10.0):
        print(f"  P(SIR <= {z:5.1f} dB): analytic {float(a.sir_cdf(z)):.3f}   simulated {float(sim.sir(z)):.3f}")
