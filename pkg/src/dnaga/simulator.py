"""Monte Carlo ground truth for the uplink signal, interference and SIR.

Randomness is split in two levels. UE positions are drawn once per drop
(one stream per cell, covering all drops), then each drop runs a batch of
channel draws (shadowing for every link plus multi-path fading) from its own
stream. All per-drop work is independent, so the thread count never changes
the result.
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ._util import STREAM_SIM, ordered_map, substream
from .channel import path_loss_db
from .fading import sample_fading_db
from .scenario import sample_ues

log = logging.getLogger(__name__)

ALL = "all"
# upper bound on link-matrix entries held in memory at once when every cell is a victim
_CHUNK_ENTRIES = 2_000_000


@dataclass(frozen=True)
class SimConfig:
    n_ue_drops: int = 1000
    n_channel_draws: int = 1000
    seed: int = 1
    victim: Union[int, str] = 0

    def __post_init__(self):
        if int(self.n_ue_drops) < 1 or int(self.n_channel_draws) < 1:
            raise ValueError("n_ue_drops and n_channel_draws must be >= 1")
        if isinstance(self.victim, str):
            if self.victim != ALL:
                raise ValueError(f"victim must be a cell index or {ALL!r}, got {self.victim!r}")
        elif int(self.victim) < 0:
            raise ValueError("victim index must be non-negative")


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    """Sorted samples; evaluates as the right-continuous step function.

    ``levels`` optionally gives the CDF value just after each sorted sample,
    which turns a tabulated (value, cdf) curve into a step function. By
    default every sample carries weight ``1/n``.
    """

    samples: np.ndarray
    levels: Optional[np.ndarray] = None

    def __post_init__(self):
        raw = np.asarray(self.samples, dtype=float).ravel()
        if len(raw) == 0:
            raise ValueError("empirical CDF needs at least one sample")
        if not np.all(np.isfinite(raw)):
            raise ValueError("samples must be finite")
        order = np.argsort(raw, kind="stable")
        x = raw[order]
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        if self.levels is not None:
            lev = np.asarray(self.levels, dtype=float).ravel()
            if lev.shape != raw.shape:
                raise ValueError("levels must match samples in length")
            lev = lev[order]
            if np.any(np.diff(lev) < 0) or lev[0] < 0 or lev[-1] > 1 + 1e-12:
                raise ValueError("levels must be non-decreasing within [0, 1]")
            lev.setflags(write=False)
            object.__setattr__(self, "levels", lev)

    def _levels(self):
        if self.levels is None:
            return np.arange(1, len(self.samples) + 1) / len(self.samples)
        return self.levels

    def __len__(self):
        return len(self.samples)

    def __call__(self, x):
        idx = np.searchsorted(self.samples, x, side="right")
        if self.levels is None:
            return idx / len(self.samples)
        return np.concatenate(([0.0], self.levels))[idx]

    def __eq__(self, other):
        return (isinstance(other, EmpiricalCdf) and np.array_equal(self.samples, other.samples)
                and np.array_equal(self._levels(), other._levels()))

    def quantile(self, p):
        if self.levels is None:
            return np.quantile(self.samples, p)
        idx = np.searchsorted(self.levels, np.asarray(p) * self.levels[-1], side="left")
        return self.samples[np.minimum(idx, len(self.samples) - 1)]

    def median(self):
        return float(self.quantile(0.5))

    def mean(self):
        if self.levels is None:
            return float(np.mean(self.samples))
        w = np.diff(self.levels, prepend=0.0)
        return float(np.sum(w * self.samples) / self.levels[-1])

    def steps(self):
        """Distinct sample values and the CDF just after each."""
        vals, first = np.unique(self.samples, return_index=True)
        last = np.append(first[1:], len(self.samples)) - 1
        return vals, self._levels()[last]

    def to_csv(self, path, kind="cdf"):
        """``kind="cdf"`` writes (value_db, cdf) rows; ``kind="samples"`` one value per row."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if kind == "samples":
                w.writerow(["value_db"])
                w.writerows([f"{v:.15g}"] for v in self.samples)
            elif kind == "cdf":
                w.writerow(["value_db", "cdf"])
                for v, p in zip(self.samples, self._levels()):
                    w.writerow([f"{v:.15g}", f"{p:.15g}"])
            else:
                raise ValueError(f"unknown CSV kind {kind!r}")

    @classmethod
    def from_csv(cls, path):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.size == 0:
            raise ValueError(f"{path}: no data rows")
        if data.shape[1] not in (1, 2):
            raise ValueError(f"{path}: expected one or two columns")
        if data.shape[1] == 1:
            return cls(data[:, 0])
        n = len(data)
        # our own (value, i/n) output reads back as plain samples
        if np.allclose(data[:, 1], np.arange(1, n + 1) / n, rtol=0, atol=1e-12):
            return cls(data[:, 0])
        return cls(data[:, 0], data[:, 1])


@dataclass(frozen=True, eq=False)
class SimResult:
    signal: EmpiricalCdf
    interference: EmpiricalCdf
    sir: EmpiricalCdf
    config: SimConfig


def _victims(dep, cfg):
    if cfg.victim == ALL:
        return np.arange(len(dep))
    v = int(cfg.victim)
    if v >= len(dep):
        raise ValueError(f"victim {v} out of range for {len(dep)} cells")
    return np.array([v])


def drop_positions(dep, n_drops, seed, dist=None):
    """UE positions for every drop and cell, shape ``(n_drops, B, 2)``."""
    per_cell = [sample_ues(dep, b, n_drops, substream(seed, STREAM_SIM, 0, b), dist)
                for b in range(len(dep))]
    return np.stack(per_cell, axis=1)


def _one_drop(ue, dep, victims, params, fading, n_draws, rng):
    """Signal, aggregate interference and SIR (dB) for one UE placement."""
    bs = dep.positions
    vic = bs[victims]
    # path loss from every UE to its own BS and to every victim BS
    l_own = path_loss_db(params, np.hypot(*(ue - bs).T))
    l_to = path_loss_db(params, np.hypot(ue[None, :, 0] - vic[:, None, 0],
                                         ue[None, :, 1] - vic[:, None, 1]))   # (V, B)
    n_vic, n_cells = l_to.shape
    sigma = params.sigma_shadow_db
    rows = max(1, _CHUNK_ENTRIES // (n_vic * n_cells))
    sig, agg = [], []
    for start in range(0, n_draws, rows):
        n = min(rows, n_draws - start)
        s_own = sigma * rng.standard_normal((n, 1, n_cells))
        s_to = sigma * rng.standard_normal((n, n_vic, n_cells))
        h = sample_fading_db(fading, rng, (n, n_vic, n_cells))
        tx = params.p0_dbm + params.eta * (l_own + s_own)                  # (n, 1, B)
        rx = tx - l_to - s_to + h                                           # (n, V, B)
        own = rx[:, np.arange(n_vic), victims]
        # the victim's own link uses the same shadowing as its power control
        own = own + s_to[:, np.arange(n_vic), victims] - s_own[:, 0, victims]
        mw = 10.0 ** (rx / 10.0)
        mw[:, np.arange(n_vic), victims] = 0.0
        sig.append(own.ravel())
        agg.append(10.0 * np.log10(mw.sum(axis=2)).ravel())
    sig, agg = np.concatenate(sig), np.concatenate(agg)
    return sig, agg


def simulate(dep, params, fading, cfg, dist=None, threads=None):
    """Exact Monte Carlo of signal power, aggregate interference and SIR.

    With ``cfg.victim == "all"`` every cell is the victim in turn within each
    draw, so a run yields ``n_ue_drops * n_channel_draws * B`` samples.
    """
    if len(dep) < 2:
        raise ValueError("simulation needs at least one interfering cell")
    victims = _victims(dep, cfg)
    ues = drop_positions(dep, cfg.n_ue_drops, cfg.seed, dist)

    def run(d):
        return _one_drop(ues[d], dep, victims, params, fading, cfg.n_channel_draws,
                         substream(cfg.seed, STREAM_SIM, 1, d))

    parts = ordered_map(run, range(cfg.n_ue_drops), threads)
    sig = np.concatenate([p[0] for p in parts])
    agg = np.concatenate([p[1] for p in parts])
    return SimResult(EmpiricalCdf(sig), EmpiricalCdf(agg), EmpiricalCdf(sig - agg), cfg)


def simulate_sir(dep, victim, params, fading, dist, cfg, threads=None):
    return simulate(dep, params, fading, _with_victim(cfg, victim), dist, threads).sir


def simulate_interference_db(dep, victim, params, fading, dist, cfg, threads=None):
    return simulate(dep, params, fading, _with_victim(cfg, victim), dist, threads).interference


def simulate_signal_db(dep, victim, params, fading, dist, cfg, threads=None):
    return simulate(dep, params, fading, _with_victim(cfg, victim), dist, threads).signal


def _with_victim(cfg, victim):
    return SimConfig(cfg.n_ue_drops, cfg.n_channel_draws, cfg.seed, victim)


def simulate_link_interference(dep, victim, interferer, params, fading, n_samples, seed, dist=None):
    """Samples of one interferer's received power at the victim, ``I_b`` in dB.

    Each sample has a fresh UE position, so the empirical moments can be
    checked directly against the per-cell Gaussian approximation.
    Pass the deterministic fading model to get the pre-fading term.
    """
    if victim == interferer:
        raise ValueError("victim and interferer must differ")
    rng = substream(seed, STREAM_SIM, 2, victim, interferer)
    ue = sample_ues(dep, interferer, n_samples, rng, dist)
    own, vic = dep.positions[interferer], dep.positions[victim]
    l_bb = path_loss_db(params, np.hypot(*(ue - own).T))
    l_b1 = path_loss_db(params, np.hypot(*(ue - vic).T))
    s = params.sigma_shadow_db * rng.standard_normal((2, n_samples))
    h = sample_fading_db(fading, rng, n_samples)
    return params.p0_dbm + params.eta * (l_bb + s[0]) - l_b1 - s[1] + h


def ks_distance(emp, curve):
    """Two-sided KS distance between samples and a tabulated CDF.

    The analytic curve is clamped outside its grid. At each distinct sample
    value both the left limit and the value of the empirical step are compared.
    """
    vals, upper = emp.steps()
    lower = np.concatenate(([0.0], upper[:-1]))
    f = curve(vals)
    return float(max(np.max(np.abs(upper - f)), np.max(np.abs(lower - f))))


def max_cdf_deviation(emp, curve):
    """Largest vertical gap between the curve and the empirical CDF on the curve's grid."""
    return float(np.max(np.abs(curve.probs - emp(curve.grid))))


def supports_overlap(emp, curve):
    return not (emp.samples[-1] < curve.grid[0] or emp.samples[0] > curve.grid[-1])
