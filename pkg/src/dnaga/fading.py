"""Multi-path fading gains in dB, H = 10 log10 |h|^2.

``|h|^2`` is Exp(1) for Rayleigh fading and Gamma(k, theta) for Nakagami
fading, parameterised directly by the Gamma shape/scale of the power gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import ZETA
from .quadrature import digamma, regularized_lower_incomplete_gamma, trigamma

RAYLEIGH = "rayleigh"
NAKAGAMI = "nakagami"
DETERMINISTIC = "none"


@dataclass(frozen=True)
class FadingModel:
    kind: str = RAYLEIGH
    k: float = 1.0
    theta: float = 1.0

    def __post_init__(self):
        if self.kind not in (RAYLEIGH, NAKAGAMI, DETERMINISTIC):
            raise ValueError(f"unknown fading kind {self.kind!r}")
        if self.kind == NAKAGAMI and not (self.k > 0 and self.theta > 0):
            raise ValueError("Nakagami fading needs k > 0 and theta > 0")

    @classmethod
    def rayleigh(cls):
        return cls(RAYLEIGH)

    @classmethod
    def nakagami(cls, k, theta):
        return cls(NAKAGAMI, float(k), float(theta))

    @classmethod
    def deterministic(cls):
        """No fading: H = 0 dB with probability one. Mostly useful in tests."""
        return cls(DETERMINISTIC)


def fading_db_cdf(model, h):
    h = np.asarray(h, dtype=float)
    if model.kind == RAYLEIGH:
        return -np.expm1(-np.exp(h / ZETA))
    if model.kind == NAKAGAMI:
        return regularized_lower_incomplete_gamma(model.k, np.exp(h / ZETA) / model.theta)
    return (h >= 0.0).astype(float)


def fading_db_moments(model):
    """Closed-form mean and variance of H in dB via digamma/trigamma."""
    if model.kind == DETERMINISTIC:
        return 0.0, 0.0
    k, theta = (1.0, 1.0) if model.kind == RAYLEIGH else (model.k, model.theta)
    mean = ZETA * (digamma(k) + np.log(theta))
    var = ZETA ** 2 * trigamma(k)
    return float(mean), float(var)


def sample_fading_linear(model, rng, size=None):
    if model.kind == RAYLEIGH:
        return rng.standard_exponential(size)
    if model.kind == NAKAGAMI:
        return rng.gamma(model.k, model.theta, size)
    return np.ones(size) if size is not None else 1.0


def sample_fading_db(model, rng, size=None):
    return 10.0 * np.log10(sample_fading_linear(model, rng, size))
