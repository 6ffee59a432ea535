"""Radio-link arithmetic for one D2D pair: probabilistic LOS/NLOS path loss,
the active D2D transmission rate, and the ambient-backscatter rate.

All functions are pure. Power bookkeeping is done in watts internally; dBm
appears only at the API boundary (`LinkGeometry.p_d_dbm`, `dbm_to_watts`,
`watts_to_dbm`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "LinkGeometry",
    "dbm_to_watts",
    "watts_to_dbm",
    "path_loss_los",
    "path_loss_nlos",
    "p_los",
    "d2d_rate",
    "backscatter_rate",
]


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0) / 1000.0


def watts_to_dbm(p_watts: float) -> float:
    if p_watts <= 0.0:
        raise ValueError(f"power must be positive, got {p_watts}")
    return 10.0 * math.log10(p_watts * 1000.0)


@dataclass(frozen=True)
class LinkGeometry:
    """Distances, frequencies and powers defining one D2D pair's radio situation.

    d_tr: D2D-Tx to D2D-Rx distance (m)
    d_st: BS to D2D-Tx distance (m); identical to the MDP state's d_dt
    f: center frequency (GHz)
    w: channel bandwidth (Hz)
    p_d_dbm: D2D transmit power (dBm)
    p_t_watts: BS transmit power (W)
    p_n_watts: noise power sigma^2 (W)
    alpha: backscatter reflection coefficient in [0, 1]
    a_e: effective antenna area (m^2)
    """

    d_tr: float
    d_st: float
    f: float = 2.0
    w: float = 20e6
    p_d_dbm: float = 23.0
    p_t_watts: float = 10.0
    p_n_watts: float = dbm_to_watts(-114.0)
    alpha: float = 0.6
    a_e: float = 0.0086

    def __post_init__(self):
        if self.d_tr <= 0 or self.d_st <= 0:
            raise ValueError("distances must be positive")
        if self.f <= 0 or self.w <= 0:
            raise ValueError("frequency and bandwidth must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.p_n_watts <= 0:
            raise ValueError("noise power must be positive in linear units")
        if self.a_e <= 0:
            raise ValueError("antenna area must be positive")


def path_loss_los(d_tr: float, f: float) -> float:
    """Line-of-sight path loss in dB for distance d_tr (m) at frequency f (GHz)."""
    if d_tr <= 0 or f <= 0:
        raise ValueError("d_tr and f must be positive")
    return 16.9 * math.log10(d_tr) + 32.8 + 20.0 * math.log10(f)


def path_loss_nlos(d_tr: float, f: float) -> float:
    """Non-line-of-sight path loss in dB for distance d_tr (m) at frequency f (GHz)."""
    if d_tr <= 0 or f <= 0:
        raise ValueError("d_tr and f must be positive")
    return 40.0 * math.log10(d_tr) + 79.0 + 30.0 * math.log10(f)


def p_los(d_tr: float) -> float:
    """Probability of a LOS link at Tx-Rx distance d_tr (m).

    Piecewise: 1 up to 4 m, exp(-(d_tr-4)/3) up to and including 60 m, 0
    beyond. At exactly 60 m the exponential branch wins (~7.8e-9), keeping the
    function right-continuous everywhere except the single unavoidable jump.
    """
    if d_tr <= 0:
        raise ValueError("d_tr must be positive")
    if d_tr <= 4.0:
        return 1.0
    if d_tr <= 60.0:
        return math.exp(-(d_tr - 4.0) / 3.0)
    return 0.0


def d2d_rate(geom: LinkGeometry) -> float:
    """Achievable active-transmission rate C_d in bit/s.

    Averages LOS and NLOS path losses in the dB domain (weighted by the LOS
    probability), converts the received power to watts, and applies the
    Shannon capacity with noise power geom.p_n_watts.
    """
    p = p_los(geom.d_tr)
    loss_db = p * path_loss_los(geom.d_tr, geom.f) + (1.0 - p) * path_loss_nlos(
        geom.d_tr, geom.f
    )
    p_r_watts = dbm_to_watts(geom.p_d_dbm - loss_db)
    return geom.w * math.log2(1.0 + p_r_watts / geom.p_n_watts)


def backscatter_rate(geom: LinkGeometry) -> float:
    """Achievable ambient-backscatter rate C_b in bit/s.

    Channel power gains follow the aperture model g = A_e / (4 pi d^2) for the
    BS->Tx and Tx->Rx hops; the reflected-path SNR is
    alpha * P_t * g_st * g_tr / sigma^2.
    """
    g_st = geom.a_e / (4.0 * math.pi * geom.d_st**2)
    g_tr = geom.a_e / (4.0 * math.pi * geom.d_tr**2)
    snr = geom.alpha * geom.p_t_watts * g_st * g_tr / geom.p_n_watts
    return geom.w * math.log2(1.0 + snr)
