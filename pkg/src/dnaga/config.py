"""YAML run configuration with field-level validation.

Every block maps to a small frozen dataclass. Parsing checks keys, types and
ranges and reports the dotted path of the first offending field.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from ._util import DnagaError
from .channel import ChannelParams
from .fading import DETERMINISTIC, NAKAGAMI, RAYLEIGH, FadingModel
from .macroscopic import VICTIM_POLICIES
from .scenario import UE_DISTRIBUTIONS, HotspotConfig, generate_hex_lattice, generate_hotspot


class ConfigError(DnagaError):
    def __init__(self, field_path, msg):
        super().__init__(f"{field_path}: {msg}")
        self.field = field_path


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "hotspot"                 # hotspot | hex
    victim: int = 0                       # tagged cell index
    coverage_radius_km: float = 0.04
    min_bs_ue_km: float = 0.01
    # hex lattice
    density_per_km2: float = 55.43
    n_cells: int = 228
    # hotspot drop
    isd_km: float = 0.5
    n_sites: int = 19
    sectors_per_site: int = 3
    cells_per_macrocell: int = 4
    min_inter_bs_km: float = 0.04


@dataclass(frozen=True)
class ChannelConfig:
    a_db: float = 145.4
    alpha: float = 3.75
    sigma_shadow_db: float = 10.0
    p0_dbm: float = -76.0
    eta: float = 0.8


@dataclass(frozen=True)
class FadingConfig:
    kind: str = RAYLEIGH                  # rayleigh | nakagami | none
    k: float = 1.0                        # Gamma shape of |h|^2 (nakagami only)
    theta: float = 1.0                    # Gamma scale of |h|^2 (nakagami only)


@dataclass(frozen=True)
class AnalysisConfig:
    m0: int = 30                          # inner Gauss-Hermite order
    n_samples: int = 100_000              # UE samples per cell for region moments
    grid_points: int = 801
    fit_samples: int = 200_000            # samples behind the power-lognormal fit


@dataclass(frozen=True)
class SimulationConfig:
    n_ue_drops: int = 1000
    n_channel_draws: int = 1000


@dataclass(frozen=True)
class MacroConfig:
    n_deployments: int = 50
    victim_policy: str = "all"            # all | center
    n_samples: int = 10_000
    fit_samples: int = 20_000
    grid_step_db: float = 0.1
    n_ue_drops: int = 100                 # per deployment, for the pooled simulation
    n_channel_draws: int = 44


@dataclass(frozen=True)
class RunConfig:
    seed: int = 1
    threads: Optional[int] = None
    ue_distribution: str = "uniform"
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    fading: FadingConfig = field(default_factory=FadingConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    macro: MacroConfig = field(default_factory=MacroConfig)

    # --- derived objects

    def channel_params(self):
        return ChannelParams(**dataclasses.asdict(self.channel))

    def fading_model(self):
        f = self.fading
        if f.kind == NAKAGAMI:
            return FadingModel.nakagami(f.k, f.theta)
        return FadingModel(f.kind)

    def hotspot_config(self):
        s = self.scenario
        return HotspotConfig(s.isd_km, s.n_sites, s.sectors_per_site, s.cells_per_macrocell,
                             s.min_inter_bs_km, s.coverage_radius_km, s.min_bs_ue_km,
                             self.ue_distribution)

    def deployment(self):
        s = self.scenario
        if s.kind == "hex":
            return generate_hex_lattice(s.density_per_km2, s.n_cells, s.coverage_radius_km,
                                        s.min_bs_ue_km, self.ue_distribution)
        return generate_hotspot(self.hotspot_config(), self.seed)

    def with_overrides(self, seed=None, threads=None, grid_points=None):
        cfg = self
        if seed is not None:
            cfg = dataclasses.replace(cfg, seed=int(seed))
        if threads is not None:
            cfg = dataclasses.replace(cfg, threads=int(threads))
        if grid_points is not None:
            cfg = dataclasses.replace(cfg, analysis=dataclasses.replace(cfg.analysis, grid_points=int(grid_points)))
        validate(cfg)
        return cfg

    # --- serialisation

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_yaml(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


_BLOCKS = {
    "scenario": ScenarioConfig,
    "channel": ChannelConfig,
    "fading": FadingConfig,
    "analysis": AnalysisConfig,
    "simulation": SimulationConfig,
    "macro": MacroConfig,
}


def _coerce(path, value, typ):
    if typ in ("int", int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if typ in ("float", float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if typ in ("str", str):
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    if typ in ("Optional[int]", Optional[int]):
        return None if value is None else _coerce(path, value, int)
    raise TypeError(f"unsupported field type {typ!r}")


def _build(cls, data, prefix):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(prefix.rstrip("."), "expected a mapping")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(prefix + unknown[0], "unknown key")
    kwargs = {}
    for name, value in data.items():
        f = known[name]
        if name in _BLOCKS and cls is RunConfig:
            kwargs[name] = _build(_BLOCKS[name], value, f"{name}.")
        else:
            kwargs[name] = _coerce(prefix + name, value, f.type)
    return cls(**kwargs)


def _check(cond, path, msg):
    if not cond:
        raise ConfigError(path, msg)


def validate(cfg):
    """Range checks for every field the library would otherwise reject later."""
    _check(cfg.seed >= 0, "seed", "must be >= 0")
    _check(cfg.threads is None or cfg.threads >= 1, "threads", "must be >= 1")
    _check(cfg.ue_distribution in UE_DISTRIBUTIONS, "ue_distribution",
           f"must be one of {UE_DISTRIBUTIONS}, got {cfg.ue_distribution!r}")

    s = cfg.scenario
    _check(s.kind in ("hotspot", "hex"), "scenario.kind", f"must be 'hotspot' or 'hex', got {s.kind!r}")
    _check(s.coverage_radius_km > 0, "scenario.coverage_radius_km", "must be > 0")
    _check(0 < s.min_bs_ue_km < s.coverage_radius_km, "scenario.min_bs_ue_km",
           "must be in (0, coverage_radius_km)")
    _check(s.density_per_km2 > 0, "scenario.density_per_km2", "must be > 0")
    _check(s.n_cells >= 2, "scenario.n_cells", "must be >= 2")
    _check(s.isd_km > 0, "scenario.isd_km", "must be > 0")
    for name in ("n_sites", "sectors_per_site", "cells_per_macrocell"):
        _check(getattr(s, name) >= 1, f"scenario.{name}", "must be >= 1")
    _check(s.min_inter_bs_km >= 0, "scenario.min_inter_bs_km", "must be >= 0")
    n = s.n_cells if s.kind == "hex" else s.n_sites * s.sectors_per_site * s.cells_per_macrocell
    _check(0 <= s.victim < n, "scenario.victim", f"must be in [0, {n - 1}]")

    c = cfg.channel
    _check(c.alpha > 0, "channel.alpha", f"must be > 0, got {c.alpha}")
    _check(c.sigma_shadow_db >= 0, "channel.sigma_shadow_db", "must be >= 0")
    _check(0 < c.eta <= 1, "channel.eta", f"must be in (0, 1], got {c.eta}")

    f = cfg.fading
    _check(f.kind in (RAYLEIGH, NAKAGAMI, DETERMINISTIC), "fading.kind",
           f"must be rayleigh, nakagami or none, got {f.kind!r}")
    if f.kind == NAKAGAMI:
        _check(f.k > 0, "fading.k", "must be > 0")
        _check(f.theta > 0, "fading.theta", "must be > 0")

    a = cfg.analysis
    _check(1 <= a.m0 <= 100, "analysis.m0", "must be in [1, 100]")
    _check(a.n_samples >= 2, "analysis.n_samples", "must be >= 2")
    _check(a.grid_points >= 2, "analysis.grid_points", "must be >= 2")
    _check(a.fit_samples >= 100, "analysis.fit_samples", "must be >= 100")

    for name in ("n_ue_drops", "n_channel_draws"):
        _check(getattr(cfg.simulation, name) >= 1, f"simulation.{name}", "must be >= 1")

    m = cfg.macro
    _check(m.n_deployments >= 1, "macro.n_deployments", "must be >= 1")
    _check(m.victim_policy in VICTIM_POLICIES, "macro.victim_policy",
           f"must be one of {VICTIM_POLICIES}, got {m.victim_policy!r}")
    _check(m.n_samples >= 2, "macro.n_samples", "must be >= 2")
    _check(m.fit_samples >= 100, "macro.fit_samples", "must be >= 100")
    _check(m.grid_step_db > 0, "macro.grid_step_db", "must be > 0")
    for name in ("n_ue_drops", "n_channel_draws"):
        _check(getattr(m, name) >= 1, f"macro.{name}", "must be >= 1")
    return cfg


def from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a mapping at the top level")
    return validate(_build(RunConfig, data, ""))


def loads(text):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML ({exc})") from None
    return from_dict(data or {})


def load(path):
    return loads(Path(path).read_text())


def dump(cfg, path):
    Path(path).write_text(cfg.to_yaml())


def shipped_config(name):
    """Path of a config shipped with the package, e.g. ``"case1_hex"``."""
    return Path(__file__).parent / "configs" / f"{name}.yaml"


__all__ = [
    "ConfigError", "RunConfig", "ScenarioConfig", "ChannelConfig", "FadingConfig",
    "AnalysisConfig", "SimulationConfig", "MacroConfig", "load", "loads", "dump",
    "from_dict", "validate", "shipped_config",
]
