"""From one deployment to many: deployment-averaged CDFs and the hex-lattice bound.

The semi-analytical route runs the per-cell analysis over many random hotspot
drops and averages the SIR CDFs pointwise. The analytical route replaces the
random drop by a hexagonal lattice of the same density and analyses its
centre cell, which gives an optimistic (upper-bound) SIR curve.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._util import STREAM_MACRO, ordered_map, substream
from .channel import path_loss_db
from .core import (
    FIT_SAMPLES,
    CdfCurve,
    RegionMoments,
    _monotone_curve,
    analyze_cell,
    fit_power_lognormal,
    gauss_hermite,
    outer_rule_for,
    per_cell_interference_gaussian,
    signal_gaussian,
    sir_cdf,
    sir_span,
    ue_path_samples,
)
from .scenario import generate_hex_lattice, generate_hotspot
from .simulator import ALL, SimConfig, EmpiricalCdf, simulate

log = logging.getLogger(__name__)

VICTIM_POLICIES = ("all", "center")
# signal CDF tabulation step inside the SIR sum (dB); interpolation error is ~1e-6
_X_STEP = 0.01
# only this part of a CDF counts towards the mean deviation
_MEAN_DEV_BAND = (1e-3, 1.0 - 1e-3)


@dataclass(frozen=True, eq=False)
class MacroResult:
    mean_cdf: CdfCurve
    n_deployments: int
    per_deployment_cdfs: Optional[tuple] = None
    max_dev: Optional[float] = None
    mean_dev: Optional[float] = None
    reference_median: Optional[float] = None
    analysis: object = None

    def __post_init__(self):
        if not self.mean_cdf.is_valid():
            raise ValueError("averaged CDF is not a valid CDF")

    def median(self):
        return self.mean_cdf.median()

    def compare(self, reference):
        """Attach deviation statistics against an empirical (or tabulated) reference CDF."""
        grid, p = self.mean_cdf.grid, self.mean_cdf.probs
        diff = np.abs(p - reference(grid))
        band = (p >= _MEAN_DEV_BAND[0]) & (p <= _MEAN_DEV_BAND[1])
        mean_dev = float(np.mean(diff[band])) if band.any() else float(np.mean(diff))
        ref_median = reference.median() if hasattr(reference, "median") else None
        return replace(self, max_dev=float(diff.max()), mean_dev=mean_dev, reference_median=ref_median)

    def to_csv(self, path):
        self.mean_cdf.to_csv(path)

    def summary_row(self):
        return {
            "n_deployments": self.n_deployments,
            "max_dev": self.max_dev,
            "mean_dev": self.mean_dev,
            "median_db": self.median(),
            "reference_median_db": self.reference_median,
        }

    def write_summary(self, path):
        row = self.summary_row()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(row))
            w.writerow(["" if v is None else (f"{v:.15g}" if isinstance(v, float) else v)
                        for v in row.values()])


def deployment_seed(seed, index):
    """Integer seed of the ``index``-th random deployment."""
    return int(np.random.SeedSequence([int(seed), STREAM_MACRO, int(index)]).generate_state(1)[0])


def center_cell(dep):
    """Index of the BS closest to the centroid of all BS positions."""
    pos = dep.positions
    c = pos.mean(axis=0)
    return int(np.argmin(np.hypot(*(pos - c).T)))


def _victims(dep, policy):
    if policy == "all":
        return list(range(len(dep)))
    if policy == "center":
        return [center_cell(dep)]
    raise ValueError(f"victim_policy must be one of {VICTIM_POLICIES}, got {policy!r}")


def _path_moment_matrix(dep, params, samples):
    """Means and variances of ``eta*L_bb - L_bv`` for every (interferer b, victim v).

    Uses the same per-cell UE samples as :func:`dnaga.core.analyze_cell`.
    """
    pos = dep.positions
    n_cells = len(dep)
    mu = np.empty((n_cells, n_cells))
    var = np.empty((n_cells, n_cells))
    n = np.empty(n_cells)
    for b, z in enumerate(samples):
        l_bb = path_loss_db(params, np.hypot(*(z - pos[b]).T))
        d = np.hypot(z[:, None, 0] - pos[None, :, 0], z[:, None, 1] - pos[None, :, 1])
        vals = params.eta * l_bb[:, None] - path_loss_db(params, d)
        mu[b] = vals.mean(axis=0)
        var[b] = vals.var(axis=0, ddof=1)
        n[b] = len(z)
    return mu, var, n


def _deployment_fits(dep, victims, params, fading, n_samples, seed, fit_samples):
    """(signal Gaussian, power-lognormal) for each victim of one deployment."""
    samples = [ue_path_samples(dep, b, n_samples, seed) for b in range(len(dep))]
    mu, var, n = _path_moment_matrix(dep, params, samples)
    fits = []
    for v in victims:
        l_vv = path_loss_db(params, np.hypot(*(samples[v] - dep.positions[v]).T))
        s = (params.eta - 1.0) * l_vv
        sig_path = RegionMoments(float(s.mean()), float(s.var(ddof=1)), 0.0)
        qs = [per_cell_interference_gaussian(
                  RegionMoments(mu[b, v], var[b, v], float(np.sqrt(var[b, v] / n[b]))), params, fading)
              for b in range(len(dep)) if b != v]
        fits.append((signal_gaussian(sig_path, params), fit_power_lognormal(qs, fit_samples, seed)))
    return fits


def semi_analytical(hotspot, params, fading, n_deployments, seed=1, victim_policy="all",
                    dist=None, m0=30, n_samples=10_000, grid_step=0.1,
                    fit_samples=20_000, threads=None, keep_per_deployment=False):
    """Average the analytic SIR CDF over random hotspot deployments.

    With ``victim_policy="all"`` every cell is tagged in turn and its curve
    enters the average with equal weight; ``"center"`` tags only the cell
    closest to the centroid. All curves are evaluated on one uniform grid
    spanning every victim's SIR range, so no interpolation between grids is
    needed.
    """
    if int(n_deployments) < 1:
        raise ValueError("n_deployments must be >= 1")
    if dist is not None:
        hotspot = replace(hotspot, ue_distribution=dist)

    def fits_for(d):
        s = deployment_seed(seed, d)
        dep = generate_hotspot(hotspot, s)
        return _deployment_fits(dep, _victims(dep, victim_policy), params, fading,
                                n_samples, s, fit_samples)

    per_dep = ordered_map(fits_for, range(int(n_deployments)), threads)
    spans = np.array([sir_span(g1, fading, pl) for fits in per_dep for g1, pl in fits])
    lo = np.floor(spans[:, 0].min() / grid_step) * grid_step
    hi = np.ceil(spans[:, 1].max() / grid_step) * grid_step
    grid = np.arange(lo, hi + grid_step / 2, grid_step)
    rule = gauss_hermite(m0)

    def dep_curve(fits):
        acc = np.zeros_like(grid)
        for g1, pl in fits:
            acc += sir_cdf(g1, fading, pl, rule, grid, outer_rule_for(pl, m0), x_step=_X_STEP)
        return acc / len(fits)

    curves = ordered_map(dep_curve, per_dep, threads)
    mean = _monotone_curve(grid, np.mean(curves, axis=0))
    per = tuple(_monotone_curve(grid, c) for c in curves) if keep_per_deployment else None
    return MacroResult(mean, int(n_deployments), per)


def simulate_deployments(hotspot, params, fading, n_deployments, seed=1, n_ue_drops=100,
                         n_channel_draws=44, victim_policy="all", dist=None, threads=None):
    """Pooled Monte Carlo SIR over the same random deployments as :func:`semi_analytical`.

    With every cell as victim, each (drop, draw) contributes one sample per
    cell, so the defaults give about 10^6 samples per 228-cell deployment.
    """
    if dist is not None:
        hotspot = replace(hotspot, ue_distribution=dist)
    out = []
    for d in range(int(n_deployments)):
        s = deployment_seed(seed, d)
        dep = generate_hotspot(hotspot, s)
        victim = ALL if victim_policy == "all" else center_cell(dep)
        cfg = SimConfig(n_ue_drops, n_channel_draws, int(substream(s, STREAM_MACRO).integers(2 ** 32)), victim)
        out.append(simulate(dep, params, fading, cfg, threads=threads).sir.samples)
    return EmpiricalCdf(np.concatenate(out))


def analytical_hex_bound(hotspot, params, fading, dist=None, m0=30, n_samples=100_000, seed=1,
                         grid_points=801, threads=None, density=None, count=None,
                         fit_samples=FIT_SAMPLES):
    """Analyse the centre cell of a hex lattice with the hotspot's cell density and count.

    ``density`` and ``count`` override the values derived from ``hotspot``.
    """
    density = hotspot.density_per_km2 if density is None else density
    count = hotspot.n_cells if count is None else count
    dep = generate_hex_lattice(density, count,
                               hotspot.coverage_radius_km, hotspot.min_bs_ue_km,
                               hotspot.ue_distribution if dist is None else dist)
    a = analyze_cell(dep, 0, params, fading, m0=m0, n_samples=n_samples, seed=seed,
                     grid_points=grid_points, threads=threads, fit_samples=fit_samples)
    return MacroResult(a.sir_cdf, 1, analysis=a), a.signal, a.aggregate
