"""Candidate transmission pairs and their per-pair metrics.

A pair key (down, up) names one way to use a transmission opportunity:
(i, j) with both nonzero is a full-duplex pairing, (i, 0) is a half-duplex
downlink to client i, and (0, j) is a half-duplex uplink from client j.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import phy
from .channel import AP, LinkState, PowerConfig


class PairKey(NamedTuple):
    down: int
    up: int

    @property
    def is_full_duplex(self) -> bool:
        return self.down != 0 and self.up != 0


# deterministic pair ordering used for LP columns and tie-breaking:
# half-duplex downlink pairs first, then by uplink endpoint
def pair_sort_key(key: PairKey):
    return (key.up, key.down)


@dataclass(frozen=True)
class PairMetrics:
    r_d_mbps: float
    r_u_mbps: float
    t_s: float
    l_d_bits: float
    l_u_bits: float

    @property
    def r_total_mbps(self) -> float:
        return self.r_d_mbps + self.r_u_mbps

    @property
    def l_total_bits(self) -> float:
        return self.l_d_bits + self.l_u_bits


def pair_airtime(
    l_d_bits: float, l_u_bits: float, r_d_mbps: float, r_u_mbps: float
) -> float:
    """Channel time in seconds one transmission of the pair occupies.

    A direction is present when its frame length is positive; the pair takes
    the longer of the present directions. Rates are effective throughputs, so
    this is the expected time per delivered frame.
    """
    times = []
    if l_d_bits > 0:
        if r_d_mbps <= 0:
            raise ValueError("downlink rate must be > 0 for a present direction")
        times.append(l_d_bits / (r_d_mbps * 1e6))
    if l_u_bits > 0:
        if r_u_mbps <= 0:
            raise ValueError("uplink rate must be > 0 for a present direction")
        times.append(l_u_bits / (r_u_mbps * 1e6))
    if not times:
        raise ValueError("at least one direction must be present")
    return max(times)


@dataclass
class LinkMetrics:
    """Per-epoch rate/power quantities under interference-limited power control.

    Matrices are indexed [downlink client, uplink client]; row/column 0 is
    unused except where noted. Everything here is computable at the AP side
    from the protocol's own measurements plus the quantized uplink feedback.
    """

    snr_d_db: np.ndarray        # (n,) full-power downlink SNR, no ICI
    rate_d_full: np.ndarray     # (n,) best HD downlink rate at snr_d_db
    r_d_full: np.ndarray        # (n,) effective HD downlink throughput
    rate_d_margin: np.ndarray   # (n,) rate tolerating delta dB of ICI
    r_d_margin: np.ndarray      # (n,) effective throughput at snr - delta
    snr_u_db: np.ndarray        # (n,) full-power HD uplink SNR (AP idle)
    rate_u_full: np.ndarray     # (n,)
    r_u_full: np.ndarray        # (n,)
    cap_w: np.ndarray           # (n, n) uplink power cap for pair (i, j)
    sinr_u_db: np.ndarray       # (n, n) uplink SINR at the cap, AP transmitting
    rate_u: np.ndarray          # (n, n) nominal best uplink rate at the cap
    r_u: np.ndarray             # (n, n) effective uplink throughput at the cap
    sinr_d_db: np.ndarray       # (n, n) realized downlink SINR at the cap's ICI
    rate_d_actual: np.ndarray   # (n, n) best rate at the realized SINR
    r_d_actual: np.ndarray      # (n, n) effective throughput at the realized SINR


def compute_link_metrics(
    link_state: LinkState,
    power_cfg: PowerConfig,
    delta_db: float,
    table: phy.RateTable,
    est_gain: np.ndarray | None = None,
) -> LinkMetrics:
    """Vectorized power-control and rate quantities for every ordered pair.

    est_gain, when given, is the (noisy) cross-gain matrix the uplink clients
    use to set their power caps; realized SINRs always use the true gains.
    """
    g = link_state.gain
    n = link_state.node_count
    p = power_cfg.max_tx_w
    noise = link_state.noise_w
    g_hat = g if est_gain is None else est_gain

    with np.errstate(divide="ignore"):
        snr_d_db = 10.0 * np.log10(p * g[AP, :] / noise)
        snr_d_db[AP] = -np.inf
        snr_u_db = 10.0 * np.log10(p * g[:, AP] / noise[AP])
        snr_u_db[AP] = -np.inf

    rate_d_full, r_d_full = phy.effective_throughput_grid(snr_d_db, table)
    rate_d_margin, r_d_margin = phy.effective_throughput_grid(snr_d_db - delta_db, table)
    rate_u_full, r_u_full = phy.effective_throughput_grid(snr_u_db, table)

    # cap[i, j]: power client j may use while the AP serves client i
    allowed = 10.0 ** (delta_db / 10.0) - 1.0
    cross = g_hat.T  # cross[i, j] = estimated gain between clients j and i
    with np.errstate(divide="ignore", invalid="ignore"):
        cap = np.where(cross > 0.0, allowed * noise[:, None] / cross, np.inf)
    cap = np.minimum(cap, p)

    ap_noise = noise[AP] + p * link_state.self_gain
    with np.errstate(divide="ignore"):
        sinr_u = cap * g[:, AP][None, :] / ap_noise
        sinr_u_db = np.where(sinr_u > 0, 10.0 * np.log10(np.maximum(sinr_u, 1e-300)), -np.inf)
    rate_u, r_u = phy.effective_throughput_grid(sinr_u_db, table)

    # realized downlink SINR when the capped uplink actually transmits
    ici = cap * g.T  # true cross gains
    with np.errstate(divide="ignore"):
        sig = p * g[AP, :][:, None]
        sinr_d = sig / (noise[:, None] + ici)
        sinr_d_db = np.where(sig > 0, 10.0 * np.log10(np.maximum(sinr_d, 1e-300)), -np.inf)
    rate_d_actual, r_d_actual = phy.effective_throughput_grid(sinr_d_db, table)

    return LinkMetrics(
        snr_d_db=snr_d_db,
        rate_d_full=rate_d_full,
        r_d_full=r_d_full,
        rate_d_margin=rate_d_margin,
        r_d_margin=r_d_margin,
        snr_u_db=snr_u_db,
        rate_u_full=rate_u_full,
        r_u_full=r_u_full,
        cap_w=cap,
        sinr_u_db=sinr_u_db,
        rate_u=rate_u,
        r_u=r_u,
        sinr_d_db=sinr_d_db,
        rate_d_actual=rate_d_actual,
        r_d_actual=r_d_actual,
    )


def build_candidate_pairs(
    link_state: LinkState,
    power_cfg: PowerConfig,
    delta_db: float,
    epsilon_mbps: float,
    l_d_bits,
    l_u_bits,
    table: phy.RateTable = phy.RateTable(),
    metrics: LinkMetrics | None = None,
) -> dict[PairKey, PairMetrics]:
    """Candidate set P: full-duplex pairs whose margin downlink rate and
    power-capped uplink rate both clear epsilon, plus the half-duplex pairs
    that clear it alone."""
    if epsilon_mbps < 0:
        raise ValueError("epsilon_mbps must be >= 0")
    if metrics is None:
        metrics = compute_link_metrics(link_state, power_cfg, delta_db, table)
    n = link_state.node_count
    l_d = np.asarray(l_d_bits, dtype=float)
    l_u = np.asarray(l_u_bits, dtype=float)

    pairs: dict[PairKey, PairMetrics] = {}
    for i in range(1, n):
        if metrics.r_d_full[i] > epsilon_mbps:
            pairs[PairKey(i, 0)] = PairMetrics(
                r_d_mbps=float(metrics.r_d_full[i]),
                r_u_mbps=0.0,
                t_s=pair_airtime(l_d[i], 0.0, float(metrics.r_d_full[i]), 0.0),
                l_d_bits=float(l_d[i]),
                l_u_bits=0.0,
            )
    for j in range(1, n):
        if metrics.r_u_full[j] > epsilon_mbps:
            pairs[PairKey(0, j)] = PairMetrics(
                r_d_mbps=0.0,
                r_u_mbps=float(metrics.r_u_full[j]),
                t_s=pair_airtime(0.0, l_u[j], 0.0, float(metrics.r_u_full[j])),
                l_d_bits=0.0,
                l_u_bits=float(l_u[j]),
            )
    for i in range(1, n):
        r_d = float(metrics.r_d_margin[i])
        if r_d <= epsilon_mbps:
            continue
        for j in range(1, n):
            if j == i:
                continue
            r_u = float(metrics.r_u[i, j])
            if r_u <= epsilon_mbps:
                continue
            pairs[PairKey(i, j)] = PairMetrics(
                r_d_mbps=r_d,
                r_u_mbps=r_u,
                t_s=pair_airtime(l_d[i], l_u[j], r_d, r_u),
                l_d_bits=float(l_d[i]),
                l_u_bits=float(l_u[j]),
            )
    return pairs


def format_pairs(pairs: dict[PairKey, PairMetrics]) -> str:
    """Debug table of the candidate set: pair, rates, airtime."""
    lines = ["# down up r_d_mbps r_u_mbps t_ms"]
    for key in sorted(pairs, key=pair_sort_key):
        m = pairs[key]
        lines.append(
            f"{key.down} {key.up} {m.r_d_mbps:.4f} {m.r_u_mbps:.4f} {m.t_s * 1e3:.5f}"
        )
    return "\n".join(lines) + "\n"
