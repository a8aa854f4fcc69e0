"""Wireless channel, rate, delay and energy models for the fog-cloud system.

All quantities are linear SI units (W, Hz, bits, seconds, cycles).  dB/dBm
conversions happen once at config load time, never here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)


@dataclass(frozen=True)
class RadioConfig:
    """Fixed radio-layer parameters shared by every cell."""

    W_dl: float          # total downlink bandwidth, Hz
    W_ul: float          # total uplink bandwidth, Hz
    N0: float            # noise spectral density, W/Hz (linear)
    snr_min: float       # minimum uplink SNR, linear
    I: int               # number of fog servers / BSs
    K: int               # antennas per BS
    P_bs_max: float      # per-BS transmit power, W
    S_dl: float          # downlink payload, bits
    S_ul: float          # uplink payload, bits
    S_B: float           # bits per mini-batch

    def __post_init__(self):
        for name in ("W_dl", "W_ul", "N0", "snr_min", "P_bs_max", "S_dl", "S_ul", "S_B"):
            if getattr(self, name) <= 0:
                raise ValueError(f"RadioConfig.{name} must be positive")
        if self.I <= 0 or self.K <= 0:
            raise ValueError("RadioConfig.I and RadioConfig.K must be positive")
        if self.S_ul <= self.S_dl:
            raise ValueError("S_ul must exceed S_dl (uplink carries the loss value too)")

    @property
    def W_dl_cell(self) -> float:
        """Per-cell downlink bandwidth W_dl / I."""
        return self.W_dl / self.I


@dataclass(frozen=True)
class UEProfile:
    """Per-user compute and radio capabilities."""

    fog_id: int
    p_max: float         # W
    c: float             # cycles per bit
    f_min: float         # cycles/s
    f_max: float         # cycles/s
    theta_half: float    # effective capacitance / 2
    e_max: float         # J per round
    position: tuple[float, float]  # km

    def __post_init__(self):
        if not (0 < self.f_min <= self.f_max):
            raise ValueError("UEProfile requires 0 < f_min <= f_max")
        if self.p_max <= 0 or self.c <= 0 or self.e_max <= 0:
            raise ValueError("UEProfile p_max, c, e_max must be positive")


@dataclass
class ChannelState:
    """Large-scale channel gain of one UE for one round."""

    phi: float           # linear gain, 0 < phi < 1
    d: float             # km

    def __post_init__(self):
        if not (0 < self.phi < 1):
            raise ValueError(f"channel gain must lie in (0, 1), got {self.phi}")


@dataclass(frozen=True)
class DelayBreakdown:
    t_dl: float
    t_cp: float
    t_ul: float

    def __post_init__(self):
        if min(self.t_dl, self.t_cp, self.t_ul) < 0:
            raise ValueError("delay components must be non-negative")

    @property
    def total(self) -> float:
        return self.t_dl + self.t_cp + self.t_ul


def path_loss_gain(d_km):
    """Linear large-scale gain at distance d_km: 10^((-103.8 - 20.9 log10 d)/10)."""
    d_km = np.asarray(d_km, dtype=float)
    if np.any(d_km <= 0):
        raise ValueError("distance must be positive")
    gain_db = -103.8 - 20.9 * np.log10(d_km)
    out = 10.0 ** (gain_db / 10.0)
    return float(out) if out.ndim == 0 else out


def snr_ul(p, phi, K, W_ul, N0):
    """Uplink SNR p*K*phi / (W_ul*N0) with the expected antenna gain K*phi."""
    if np.any(np.asarray(phi) <= 0) or K <= 0 or W_ul <= 0 or N0 <= 0:
        raise ValueError("snr_ul parameters must be positive")
    if np.any(np.asarray(p) < 0):
        raise ValueError("transmit power must be non-negative")
    return p * K * phi / (W_ul * N0)


def rate_dl(cell_phis, radio: RadioConfig) -> float:
    """Multicast downlink rate of a cell, limited by its weakest user.

    The whole cell shares one rate: (W_dl/I) * log2(1 + min_j SNR_j), with the
    worst-case noise power W_dl*N0.
    """
    phis = np.asarray(cell_phis, dtype=float)
    if phis.size == 0:
        raise ValueError("rate_dl needs a non-empty cell")
    snr = radio.P_bs_max * radio.K * phis / (radio.W_dl * radio.N0)
    return radio.W_dl_cell * math.log2(1.0 + float(np.min(snr)))


def rate_ul(beta, p, phi, radio: RadioConfig):
    """Uplink rate beta * W_ul * log2(1 + SNR_ul), bits/s."""
    if np.any(np.asarray(beta) <= 0):
        raise ValueError("bandwidth fraction must be positive")
    snr = snr_ul(p, phi, radio.K, radio.W_ul, radio.N0)
    return beta * radio.W_ul * np.log2(1.0 + snr)


def compute_delay(f, c, S_B, L):
    """Local-training compute delay L * c * S_B / f over L iterations."""
    if np.any(np.asarray(f) <= 0):
        raise ValueError("CPU frequency must be positive")
    return L * c * S_B / f


def energy(p, t_ul, f, profile: UEProfile, L, S_B):
    """Round energy: uplink transmit p*t_ul plus compute L*(theta/2)*c*S_B*f^2."""
    return p * t_ul + L * profile.theta_half * profile.c * S_B * f ** 2


def round_delay(breakdowns) -> float:
    """Delay of one global round: the slowest participating UE."""
    breakdowns = list(breakdowns)
    if not breakdowns:
        raise ValueError("round_delay needs at least one participating UE")
    return max(b.total for b in breakdowns)
