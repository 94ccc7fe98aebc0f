"""Bit-rate set, delivery-ratio model, rate selection, power caps, feedback.

The packet delivery ratio is a logistic surrogate in SINR-dB: the hardware
curves the thresholds stand in for are not available, so midpoints and slope
are configuration, not physics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import linear_to_db, sinr_uplink

DEFAULT_RATES_MBPS = (6.0, 9.0, 12.0, 18.0, 24.0, 36.0, 48.0, 54.0)
DEFAULT_THRESHOLDS_DB = (5.0, 6.0, 8.0, 11.0, 15.0, 19.0, 23.0, 25.0)
DEFAULT_STEEPNESS_PER_DB = 2.0


@dataclass(frozen=True)
class RateTable:
    """Ordered bit-rates with per-rate logistic PDR midpoints."""

    rates_mbps: tuple = DEFAULT_RATES_MBPS
    threshold_db: tuple = DEFAULT_THRESHOLDS_DB
    steepness_per_db: float = DEFAULT_STEEPNESS_PER_DB

    def __post_init__(self):
        r = self.rates_mbps
        t = self.threshold_db
        if len(r) != len(t):
            raise ValueError("rates and thresholds must have equal length")
        if any(b <= a for a, b in zip(r, r[1:])):
            raise ValueError("rates must be strictly increasing")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("thresholds must be strictly increasing with rate")
        if self.steepness_per_db <= 0:
            raise ValueError("steepness must be > 0")

    @property
    def n_rates(self) -> int:
        return len(self.rates_mbps)

    @property
    def bits_per_entry(self) -> int:
        return max(1, math.ceil(math.log2(self.n_rates)))

    def index_of(self, rate_mbps: float) -> int:
        try:
            return self.rates_mbps.index(rate_mbps)
        except ValueError:
            raise ValueError(f"unknown rate {rate_mbps} Mb/s") from None

    def rates_array(self) -> np.ndarray:
        return np.asarray(self.rates_mbps)

    def thresholds_array(self) -> np.ndarray:
        return np.asarray(self.threshold_db)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def pdr(rate_mbps: float, sinr_db: float, table: RateTable = RateTable()) -> float:
    """Delivery probability of one frame at the given rate and receiver SINR."""
    idx = table.index_of(rate_mbps)
    if sinr_db == float("-inf"):
        return 0.0
    z = table.steepness_per_db * (sinr_db - table.threshold_db[idx])
    return float(_sigmoid(z))


def effective_throughput(
    sinr_db: float, table: RateTable = RateTable()
) -> tuple[float, float]:
    """Best (rate, rate*PDR) over the table; ties go to the lower rate."""
    rates = table.rates_array()
    if sinr_db == float("-inf"):
        return float(rates[0]), 0.0
    prod = rates * _sigmoid(
        table.steepness_per_db * (sinr_db - table.thresholds_array())
    )
    idx = int(np.argmax(prod))  # argmax keeps the first (lowest) rate on ties
    return float(rates[idx]), float(prod[idx])


def effective_throughput_grid(
    sinr_db: np.ndarray, table: RateTable = RateTable()
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized effective_throughput: returns (rate_mbps, r_mbps) arrays."""
    s = np.asarray(sinr_db, dtype=float)
    rates = table.rates_array()
    z = table.steepness_per_db * (s[..., None] - table.thresholds_array())
    prod = rates * _sigmoid(z)
    idx = np.argmax(prod, axis=-1)
    best = np.take_along_axis(prod, idx[..., None], axis=-1)[..., 0]
    best = np.where(np.isneginf(s), 0.0, best)
    rate = rates[idx]
    rate = np.where(np.isneginf(s), rates[0], rate)
    return rate, best


def select_downlink_rate(
    snr_d_db: float, delta_db: float, table: RateTable = RateTable()
) -> float:
    """Highest-value downlink rate that tolerates a fixed ICI margin delta."""
    if delta_db < 0:
        raise ValueError("delta_db must be >= 0")
    return effective_throughput(snr_d_db - delta_db, table)[0]


def uplink_power_cap(
    gain_ji: float, noise_i_w: float, delta_db: float, max_tx_w: float
) -> float:
    """Largest uplink power keeping ICI/noise at the downlink client within
    10^(delta/10) - 1. A zero cross-gain means the node is hidden and may use
    full power."""
    if gain_ji < 0:
        raise ValueError("gain_ji must be >= 0")
    if noise_i_w <= 0:
        raise ValueError("noise_i_w must be > 0")
    if gain_ji == 0.0:
        return max_tx_w
    cap = (10.0 ** (delta_db / 10.0) - 1.0) * noise_i_w / gain_ji
    return min(max_tx_w, cap)


def select_uplink_rate(
    p_up_w: float,
    gain_j0: float,
    self_gain: float,
    p_ap_w: float,
    noise_ap_w: float,
    table: RateTable = RateTable(),
) -> float:
    """Best uplink rate for the SINR seen at the AP under the given powers."""
    s = sinr_uplink(p_up_w, p_ap_w, gain_j0, self_gain, noise_ap_w)
    return effective_throughput(linear_to_db(s), table)[0]


def encode_rate_feedback(indices, table: RateTable = RateTable()) -> str:
    """Pack rate indices into a bitstring, bits_per_entry bits each."""
    width = table.bits_per_entry
    out = []
    for idx in indices:
        if not 0 <= idx < table.n_rates:
            raise ValueError(f"rate index {idx} out of range")
        out.append(format(int(idx), f"0{width}b"))
    return "".join(out)


def decode_rate_feedback(
    bits: str, n_entries: int, table: RateTable = RateTable()
) -> list[int]:
    width = table.bits_per_entry
    if len(bits) != width * n_entries:
        raise ValueError("bitstring length does not match entry count")
    return [int(bits[k * width : (k + 1) * width], 2) for k in range(n_entries)]
