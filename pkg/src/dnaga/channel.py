"""Path loss, shadowing statistics and fractional power control."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelParams:
    a_db: float = 145.4          # path loss at 1 km
    alpha: float = 3.75          # path-loss exponent
    sigma_shadow_db: float = 10.0
    p0_dbm: float = -76.0        # FPC target received power
    eta: float = 0.8             # FPC compensation factor

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.sigma_shadow_db >= 0:
            raise ValueError(f"sigma_shadow_db must be >= 0, got {self.sigma_shadow_db}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")


def path_loss_db(params, d_km):
    d = np.asarray(d_km, dtype=float)
    if np.any(d <= 0):
        raise ValueError("path loss needs a strictly positive distance")
    out = params.a_db + params.alpha * 10.0 * np.log10(d)
    return float(out) if out.ndim == 0 else out


def ul_tx_power_dbm(params, l_bb, s_bb):
    """UE transmit power under fractional power control (no max-power clamp)."""
    return params.p0_dbm + params.eta * (np.asarray(l_bb) + np.asarray(s_bb))


def interference_shadow_moments(params):
    """Mean and variance of ``eta*S_bb - S_b1`` for i.i.d. per-link shadowing."""
    return 0.0, (1.0 + params.eta ** 2) * params.sigma_shadow_db ** 2


def signal_shadow_moments(params):
    """Mean and variance of the residual shadowing ``(eta - 1) * S_11``."""
    return 0.0, (1.0 - params.eta) ** 2 * params.sigma_shadow_db ** 2
