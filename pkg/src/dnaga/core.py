"""Microscopic uplink analysis of one deterministic deployment.

Pipeline for a tagged (victim) cell:

1. Region moments of the path-loss terms, by seeded Monte Carlo over each
   cell's coverage region.
2. Per-interferer Gaussian approximations in dB: first of
   ``P0 + (eta*L_bb - L_b1) + (eta*S_bb - S_b1)``, then with the fading
   moments folded in.
3. The aggregate interference ``10 log10 sum_b 10^(Q_b/10)`` approximated by a
   power-lognormal law, CDF ``Phi(( q - mu_Q) / sigma_Q) ** lam`` in dB.
4. Signal-power CDF: a Gauss-Hermite average of the fading CDF over the
   Gaussian ``G_1``.
5. SIR CDF: a second Gauss-Hermite sum over the power-lognormal interference
   wrapped around the signal CDF.
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize_scalar

from ._util import STREAM_FIT, STREAM_UE_PATH, ZETA, NumericalError, ordered_map, substream
from .channel import interference_shadow_moments, path_loss_db, signal_shadow_moments
from .fading import fading_db_cdf, fading_db_moments
from .quadrature import (
    MAX_ORDER,
    gauss_hermite,
    log_std_normal_cdf,
    std_normal_cdf,
    std_normal_ppf,
)
from .scenario import sample_ues, with_ue_distribution

log = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)
SQRTPI = np.sqrt(np.pi)

# sample size behind the dB moments used by the power-lognormal fit
FIT_SAMPLES = 200_000
_CACHE_ENTRIES = 5_000_000
_STEP = 0.004


class FitError(NumericalError):
    def __init__(self, msg, residual=np.inf, best=None):
        super().__init__(f"{msg} (best residual {residual:.3g})")
        self.residual = residual
        self.best = best


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class GaussianApprox:
    mean: float
    var: float

    def __post_init__(self):
        if self.var < 0:
            raise ValueError("variance must be non-negative")

    @property
    def std(self):
        return float(np.sqrt(self.var))


@dataclass(frozen=True)
class RegionMoments:
    mu_l: float
    var_l: float
    std_error: float = 0.0


@dataclass(frozen=True)
class PowerLognormal:
    """Power-lognormal law of the aggregate interference ``Q`` (dB)."""

    lam: float
    mu_q: float
    sigma_q: float

    def __post_init__(self):
        if not (self.lam > 0 and self.sigma_q > 0):
            raise ValueError("power lognormal needs lam > 0 and sigma_q > 0")

    @property
    def var_q(self):
        return self.sigma_q ** 2

    def mean_db(self):
        m, _ = power_normal_stats(self.lam)
        return self.mu_q + self.sigma_q * m

    def var_db(self):
        _, v = power_normal_stats(self.lam)
        return self.var_q * v

    def quantile_db(self, p):
        return self.mu_q + self.sigma_q * std_normal_ppf(np.asarray(p) ** (1.0 / self.lam))

    def sample_db(self, rng, size=None):
        return self.quantile_db(rng.random(size))


@dataclass(frozen=True, eq=False)
class CdfCurve:
    """Tabulated CDF, linearly interpolated between grid points."""

    grid: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if g.shape != p.shape or g.ndim != 1 or len(g) < 1:
            raise ValueError("grid and probs must be 1-D arrays of equal length")
        if np.any(np.diff(g) < 0):
            raise ValueError("grid must be sorted")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return len(self.grid)

    def __call__(self, x):
        return np.interp(x, self.grid, self.probs)

    def __eq__(self, other):
        return (isinstance(other, CdfCurve) and np.array_equal(self.grid, other.grid)
                and np.array_equal(self.probs, other.probs))

    def quantile(self, p):
        """Smallest-abscissa inverse by linear interpolation on the increasing part."""
        probs, idx = np.unique(self.probs, return_index=True)
        return np.interp(p, probs, self.grid[idx])

    def median(self):
        return float(self.quantile(0.5))

    def is_valid(self):
        return bool(np.all(np.diff(self.probs) >= 0) and self.probs.min() >= 0 and self.probs.max() <= 1)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["value_db", "cdf"])
            for g, p in zip(self.grid, self.probs):
                w.writerow([f"{g:.15g}", f"{p:.15g}"])

    @classmethod
    def from_csv(cls, path):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.size == 0:
            raise ValueError(f"{path}: no data rows")
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns (value_db, cdf)")
        return cls(data[:, 0], data[:, 1])


def _monotone_curve(grid, probs):
    probs = np.maximum.accumulate(np.clip(probs, 0.0, 1.0))
    return CdfCurve(np.asarray(grid, dtype=float), probs)


# --------------------------------------------------------------------------
# region moments


def ue_path_samples(dep, cell, n_samples, seed, dist=None):
    """UE positions for path-moment integration; one stream per cell, shared by all victims."""
    return sample_ues(dep, cell, int(n_samples), substream(seed, STREAM_UE_PATH, cell), dist)


def _moments(vals):
    n = len(vals)
    mean = float(np.mean(vals))
    var = float(np.var(vals, ddof=1)) if n > 1 else 0.0
    return RegionMoments(mean, var, float(np.sqrt(var / n)) if n > 1 else 0.0)


def interference_path_moments(dep, victim, interferer, params, n_samples=100_000, seed=1,
                              samples=None):
    """Moments of ``eta*L_bb - L_b1`` over the interferer's UE distribution."""
    if victim == interferer:
        raise ValueError("victim and interferer must differ")
    z = ue_path_samples(dep, interferer, n_samples, seed) if samples is None else samples
    own = dep.positions[interferer]
    vic = dep.positions[victim]
    l_bb = path_loss_db(params, np.hypot(z[:, 0] - own[0], z[:, 1] - own[1]))
    l_b1 = path_loss_db(params, np.hypot(z[:, 0] - vic[0], z[:, 1] - vic[1]))
    return _moments(params.eta * l_bb - l_b1)


def signal_path_moments(dep, cell, params, n_samples=100_000, seed=1, samples=None):
    """Moments of ``(eta - 1) * L_11`` over the tagged cell's UE distribution."""
    if params.eta == 1.0:
        return RegionMoments(0.0, 0.0, 0.0)
    z = ue_path_samples(dep, cell, n_samples, seed) if samples is None else samples
    own = dep.positions[cell]
    l_11 = path_loss_db(params, np.hypot(z[:, 0] - own[0], z[:, 1] - own[1]))
    return _moments((params.eta - 1.0) * l_11)


# --------------------------------------------------------------------------
# Gaussian approximations


def shadowed_interference_gaussian(path, params):
    """``G_b``: Gaussian fit of ``P0 + L + S`` before multi-path fading."""
    mu_s, var_s = interference_shadow_moments(params)
    return GaussianApprox(params.p0_dbm + path.mu_l + mu_s, path.var_l + var_s)


def per_cell_interference_gaussian(path, params, fading):
    """``Q_b``: Gaussian fit of the interference from one cell, fading included."""
    g = shadowed_interference_gaussian(path, params)
    mu_h, var_h = fading_db_moments(fading)
    return GaussianApprox(g.mean + mu_h, g.var + var_h)


def signal_gaussian(path, params):
    mu_s, var_s = signal_shadow_moments(params)
    return GaussianApprox(params.p0_dbm + path.mu_l + mu_s, path.var_l + var_s)


# --------------------------------------------------------------------------
# power-lognormal law


def _power_normal_grid(lam):
    lo = -12.0 / np.sqrt(min(lam, 1.0))
    x = np.arange(lo, 14.0 + _STEP / 2, _STEP)
    logd = np.log(lam) + (lam - 1.0) * log_std_normal_cdf(x) - 0.5 * x * x - 0.5 * np.log(2 * np.pi)
    return x, np.exp(logd)


def power_normal_stats(lam):
    """Mean and variance of X with CDF ``Phi(x) ** lam``."""
    x, d = _power_normal_grid(lam)
    m = trapezoid(x * d, x)
    v = trapezoid((x - m) ** 2 * d, x)
    return float(m), float(v)


def power_lognormal_cdf_db(pl, q):
    return np.exp(pl.lam * log_std_normal_cdf((np.asarray(q, dtype=float) - pl.mu_q) / pl.sigma_q))


def power_lognormal_pdf_db(pl, q):
    x = (np.asarray(q, dtype=float) - pl.mu_q) / pl.sigma_q
    return np.exp(np.log(pl.lam) + (pl.lam - 1.0) * log_std_normal_cdf(x) - 0.5 * x * x) / (
        np.sqrt(2 * np.pi) * pl.sigma_q
    )


def power_lognormal_cdf_mw(pl, v):
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("linear-domain argument must be positive")
    return power_lognormal_cdf_db(pl, ZETA * np.log(v))


def power_lognormal_pdf_mw(pl, v):
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("linear-domain argument must be positive")
    return power_lognormal_pdf_db(pl, ZETA * np.log(v)) * ZETA / v


@lru_cache(maxsize=1)
def _fit_normals(seed, n_cells, n_samples):
    z = substream(seed, STREAM_FIT, n_cells).standard_normal((n_samples, n_cells))
    z.setflags(write=False)
    return z


def db_sum_samples(cells, n_samples=FIT_SAMPLES, seed=0):
    """Draws of ``10 log10 sum_b 10^(Q_b/10)`` for independent Gaussian ``Q_b`` (dB).

    Every call with the same ``(seed, B, n_samples)`` reuses one standard-normal
    matrix, so the victims of one deployment share common random numbers.
    Large requests are generated in chunks instead, giving the same values.
    """
    means = np.array([c.mean for c in cells]) / ZETA
    stds = np.array([c.std for c in cells]) / ZETA
    n_cells, n_samples = len(cells), int(n_samples)
    out = np.empty(n_samples)
    if n_cells * n_samples <= _CACHE_ENTRIES:
        blocks = [(0, _fit_normals(int(seed), n_cells, n_samples))]
    else:
        rng = substream(seed, STREAM_FIT, n_cells)
        chunk = max(1, _CACHE_ENTRIES // n_cells)
        blocks = ((i, rng.standard_normal((min(chunk, n_samples - i), n_cells)))
                  for i in range(0, n_samples, chunk))
    for i, z in blocks:
        y = means + stds * z
        top = y.max(axis=1)
        np.exp(y - top[:, None], out=y)
        out[i:i + len(y)] = ZETA * (top + np.log(y.sum(axis=1)))
    return out


def _ks_to_power_normal(sorted_x, lam, mu, sigma):
    f = np.exp(lam * log_std_normal_cdf((sorted_x - mu) / sigma))
    n = len(sorted_x)
    return float(max(np.max(np.arange(1, n + 1) / n - f), np.max(f - np.arange(n) / n)))


def fit_power_lognormal(cells, n_samples=FIT_SAMPLES, seed=0):
    """Fit ``(lam, mu_Q, sigma_Q)`` to the dB value of a sum of independent lognormals.

    For any ``lam``, ``mu_Q`` and ``sigma_Q`` are set so that the dB mean and
    variance of the power-lognormal law equal those of the target sum. The
    target moments come from a fixed-seed sample of the sum. ``lam`` is then
    chosen in ``[1, B]`` to minimise the KS distance to that sample: ``lam = 1``
    is a single lognormal, ``lam = B`` the largest of ``B`` i.i.d. terms.
    """
    cells = list(cells)
    if not cells:
        raise ValueError("need at least one cell")
    if len(cells) == 1:
        c = cells[0]
        if c.var == 0:
            raise FitError("single cell with zero variance has no lognormal fit", 0.0)
        return PowerLognormal(1.0, c.mean, c.std)
    x = np.sort(db_sum_samples(cells, n_samples, seed))
    mean, var = float(np.mean(x)), float(np.var(x))
    if not var > 0:
        raise FitError("aggregate has zero variance", 0.0)

    def params(lam):
        m, v = power_normal_stats(lam)
        sigma = np.sqrt(var / v)
        return lam, mean - sigma * m, sigma

    def ks(log_lam):
        return _ks_to_power_normal(x, *params(np.exp(log_lam)))

    hi = np.log(len(cells))
    coarse = np.linspace(0.0, hi, 13)
    scores = [ks(t) for t in coarse]
    i = int(np.argmin(scores))
    lo_t, hi_t = coarse[max(i - 1, 0)], coarse[min(i + 1, len(coarse) - 1)]
    res = minimize_scalar(ks, bounds=(lo_t, hi_t), method="bounded", options={"xatol": 1e-4})
    best = res.x if res.fun < scores[i] else coarse[i]
    lam, mu, sigma = params(float(min(np.exp(best), len(cells))))
    if not (np.isfinite(mu) and sigma > 0):
        raise FitError("power-lognormal fit produced non-finite parameters", np.inf)
    log.debug("power-lognormal fit: lam=%.4g mu=%.4g var=%.4g ks=%.4g", lam, mu, sigma ** 2, min(res.fun, scores[i]))
    return PowerLognormal(float(lam), float(mu), float(sigma))


# --------------------------------------------------------------------------
# signal and SIR CDFs


def signal_cdf(g1, fading, rule, x):
    """CDF of the received signal power ``G_1 + H_11`` (dBm)."""
    x = np.asarray(x, dtype=float)
    if g1.var == 0:
        return fading_db_cdf(fading, x - g1.mean)
    shifts = SQRT2 * g1.std * rule.nodes + g1.mean
    vals = fading_db_cdf(fading, x[..., None] - shifts)
    return np.clip(vals @ rule.weights / SQRTPI, 0.0, 1.0)


def _outer_weights(pl, rule):
    return rule.weights * pl.lam * np.exp((pl.lam - 1.0) * log_std_normal_cdf(SQRT2 * rule.nodes)) / SQRTPI


def outer_rule_for(pl, order=30, tol=1e-6):
    """Smallest Gauss-Hermite rule (>= order) that integrates the power-normal density to within tol.

    For large ``lam`` the weight ``lam * Phi(sqrt(2) y) ** (lam - 1)`` is sharply
    peaked and a 30-node rule under-resolves it.
    """
    for n in range(int(order), MAX_ORDER + 1, 10):
        rule = gauss_hermite(n)
        if abs(np.sum(_outer_weights(pl, rule)) - 1.0) <= tol:
            return rule
    log.info("lam=%.4g: outer quadrature capped at order %d", pl.lam, MAX_ORDER)
    return gauss_hermite(MAX_ORDER)


def sir_cdf(g1, fading, pl, rule, z, outer_rule=None, x_step=None):
    """CDF of the SIR ``X_1 - Q`` in dB.

    Outer sum over the power-lognormal interference, inner sum (via
    :func:`signal_cdf`) over the signal Gaussian. With ``x_step`` the signal
    CDF is tabulated once at that spacing and interpolated, which is much
    faster when many SIR points are needed.
    """
    outer = rule if outer_rule is None else outer_rule
    z = np.asarray(z, dtype=float)
    wt = _outer_weights(pl, outer)
    args = z[..., None] + SQRT2 * pl.sigma_q * outer.nodes + pl.mu_q
    if x_step is None:
        inner = signal_cdf(g1, fading, rule, args)
    else:
        xs = np.arange(args.min(), args.max() + 2 * x_step, x_step)
        inner = np.interp(args, xs, signal_cdf(g1, fading, rule, xs))
    return np.clip(inner @ wt, 0.0, 1.0)


# --------------------------------------------------------------------------
# end-to-end


@dataclass(frozen=True, eq=False)
class CellAnalysis:
    victim: int
    signal_path: RegionMoments
    signal: GaussianApprox
    interferers: tuple
    interference_paths: tuple
    interference: tuple          # per-interferer Q_b
    aggregate: PowerLognormal
    signal_cdf: CdfCurve
    interference_cdf: CdfCurve
    sir_cdf: CdfCurve
    m0: int
    outer_order: int

    def parameter_rows(self):
        """(name, value) pairs for the parameters CSV."""
        rows = [
            ("victim", self.victim),
            ("mu_G1", self.signal.mean),
            ("var_G1", self.signal.var),
            ("lambda", self.aggregate.lam),
            ("mu_Q", self.aggregate.mu_q),
            ("var_Q", self.aggregate.var_q),
            ("m0", self.m0),
            ("outer_order", self.outer_order),
        ]
        for b, q in zip(self.interferers, self.interference):
            rows.append((f"mu_Q{b}", q.mean))
            rows.append((f"var_Q{b}", q.var))
        return rows


def _span(mean, var, width=8.0):
    sd = np.sqrt(var) if var > 0 else 1.0
    return mean - width * sd, mean + width * sd


def sir_span(g1, fading, pl):
    mu_h, var_h = fading_db_moments(fading)
    return _span(g1.mean + mu_h - pl.mean_db(), g1.var + var_h + pl.var_db())


def assemble_analysis(victim, interferers, sig_path, paths, params, fading, m0=30,
                      grid_points=801, fit_samples=FIT_SAMPLES, fit_seed=0):
    """Everything downstream of the region moments: Gaussians, fit and the three CDFs."""
    g1 = signal_gaussian(sig_path, params)
    qs = tuple(per_cell_interference_gaussian(p, params, fading) for p in paths)
    pl = fit_power_lognormal(qs, fit_samples, fit_seed)

    rule = gauss_hermite(m0)
    outer = outer_rule_for(pl, m0)
    mu_h, var_h = fading_db_moments(fading)

    xs = np.linspace(*_span(g1.mean + mu_h, g1.var + var_h), grid_points)
    qg = np.linspace(*_span(pl.mean_db(), pl.var_db()), grid_points)
    zs = np.linspace(*sir_span(g1, fading, pl), grid_points)
    return CellAnalysis(
        victim=victim,
        signal_path=sig_path,
        signal=g1,
        interferers=tuple(interferers),
        interference_paths=tuple(paths),
        interference=qs,
        aggregate=pl,
        signal_cdf=_monotone_curve(xs, signal_cdf(g1, fading, rule, xs)),
        interference_cdf=_monotone_curve(qg, power_lognormal_cdf_db(pl, qg)),
        sir_cdf=_monotone_curve(zs, sir_cdf(g1, fading, pl, rule, zs, outer)),
        m0=int(m0),
        outer_order=outer.order,
    )


def analyze_cell(dep, victim, params, fading, dist=None, m0=30, n_samples=100_000, seed=1,
                 grid_points=801, threads=None, samples=None, fit_samples=FIT_SAMPLES):
    """Signal, interference and SIR analysis for one tagged cell.

    ``samples`` may carry precomputed per-cell UE position arrays (as made by
    :func:`ue_path_samples`); otherwise they are drawn here, one seeded
    stream per cell, so results do not depend on ``threads``.
    """
    if dist is not None:
        dep = with_ue_distribution(dep, dist)
    if not 0 <= victim < len(dep):
        raise ValueError(f"victim {victim} out of range for {len(dep)} cells")
    others = tuple(b for b in range(len(dep)) if b != victim)
    if not others:
        raise ValueError("analysis needs at least one interfering cell")

    def cell_samples(b):
        return samples[b] if samples is not None else ue_path_samples(dep, b, n_samples, seed)

    sig_path = signal_path_moments(dep, victim, params, samples=cell_samples(victim))
    paths = ordered_map(
        lambda b: interference_path_moments(dep, victim, b, params, samples=cell_samples(b)),
        others, threads,
    )
    return assemble_analysis(victim, others, sig_path, paths, params, fading, m0, grid_points,
                             fit_samples, seed)
