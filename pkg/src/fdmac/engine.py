"""Discrete-event simulation of epochs: arrivals, probabilistic Down-Up
contention, power-controlled transmissions, and statistics.

Internal clock is in microseconds; frame lengths in bits and rates in Mb/s so
that length/rate is directly a duration in microseconds.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import assign, pairing, phy
from .channel import (
    AP,
    DEFAULT_PL0_DB,
    DEFAULT_PATH_LOSS_EXP,
    LinkState,
    PowerConfig,
    draw_link_state,
    generate_topology,
    linear_to_db,
)
from .pairing import PairKey

SCHEMES = ("proposed", "oracle", "maxrate", "greedy", "random", "halfduplex")


@dataclass
class SimConfig:
    n_clients: int = 30
    epochs: int = 1000
    epoch_ms: float = 100.0
    arrival_interval_ms: float = 0.5
    lambda_d_fps: object = 2000.0  # scalar or per-client sequence (len n_clients)
    lambda_u_fps: object = 2000.0
    frame_bytes: int = 1500
    delta_db: float = 5.0
    sic_db: float = 110.0
    cw_max: int = 1024
    cw_min: int = 16  # DCF window floor for the Random/HalfDuplex baselines
    difs_us: float = 34.0
    sifs_us: float = 16.0
    slot_us: float = 9.0
    tone_us: float = 20.0
    header_us: float = 44.0
    ack_us: float = 44.0
    scheme: str = "proposed"
    seed: int = 1
    area_side_m: float = 100.0
    max_tx_dbm: float = 15.0
    noise_dbm: float = -95.0
    pl0_db: float = DEFAULT_PL0_DB
    path_loss_exp: float = DEFAULT_PATH_LOSS_EXP
    epsilon_mbps: float = 0.5
    fading: str = "epoch"  # "epoch" holds draws per epoch, "packet" redraws per frame
    gain_est_sigma_db: float = 0.0
    retry_limit: int = 0  # 0 = retry a failed frame indefinitely
    rates_mbps: tuple | None = None
    rate_thresholds_db: tuple | None = None
    rate_steepness_per_db: float | None = None
    lex_tiebreak: bool = True
    dump_access_path: str | None = None  # verbose per-epoch access-table dump

    def validate(self) -> list[str]:
        bad = []
        if self.n_clients < 1:
            bad.append("n_clients")
        if self.epochs < 1:
            bad.append("epochs")
        for name in (
            "epoch_ms",
            "arrival_interval_ms",
            "difs_us",
            "sifs_us",
            "slot_us",
            "tone_us",
            "header_us",
            "ack_us",
            "area_side_m",
        ):
            if getattr(self, name) <= 0:
                bad.append(name)
        if self.epoch_ms * 1000.0 <= self.slot_us:
            bad.append("epoch_ms")
        if self.frame_bytes < 1:
            bad.append("frame_bytes")
        if self.delta_db < 0:
            bad.append("delta_db")
        if self.sic_db < 0:
            bad.append("sic_db")
        if self.cw_max < 1:
            bad.append("cw_max")
        if self.cw_min < 1 or self.cw_min > self.cw_max:
            bad.append("cw_min")
        if self.scheme not in SCHEMES:
            bad.append("scheme")
        if self.max_tx_dbm <= self.noise_dbm:
            bad.append("max_tx_dbm/noise_dbm")
        if self.epsilon_mbps < 0:
            bad.append("epsilon_mbps")
        if self.fading not in ("epoch", "packet"):
            bad.append("fading")
        if self.gain_est_sigma_db < 0:
            bad.append("gain_est_sigma_db")
        if self.retry_limit < 0:
            bad.append("retry_limit")
        try:
            self.lambda_array(self.lambda_d_fps)
            self.lambda_array(self.lambda_u_fps)
        except (TypeError, ValueError):
            bad.append("lambda_d_fps/lambda_u_fps")
        return bad

    def lambda_array(self, value) -> np.ndarray:
        out = np.zeros(self.n_clients + 1)
        if np.isscalar(value):
            out[1:] = float(value)
        else:
            seq = np.asarray(value, dtype=float)
            if len(seq) != self.n_clients:
                raise ValueError("per-client rate list length mismatch")
            out[1:] = seq
        if np.any(out < 0):
            raise ValueError("arrival rates must be >= 0")
        return out

    def rate_table(self) -> phy.RateTable:
        kwargs = {}
        if self.rates_mbps is not None:
            kwargs["rates_mbps"] = tuple(self.rates_mbps)
        if self.rate_thresholds_db is not None:
            kwargs["threshold_db"] = tuple(self.rate_thresholds_db)
        if self.rate_steepness_per_db is not None:
            kwargs["steepness_per_db"] = self.rate_steepness_per_db
        return phy.RateTable(**kwargs)

    @property
    def frame_bits(self) -> float:
        return self.frame_bytes * 8.0

    @property
    def epoch_us(self) -> float:
        return self.epoch_ms * 1000.0


@dataclass
class QueueState:
    """Per-client FIFO lengths plus arrival/departure counters. Frames are
    identical, so a length counter preserves FIFO order exactly."""

    q_down: np.ndarray
    q_up: np.ndarray
    arrived_down: np.ndarray
    arrived_up: np.ndarray
    served_down: np.ndarray
    served_up: np.ndarray
    fail_down: np.ndarray  # consecutive delivery failures of the head frame
    fail_up: np.ndarray

    @classmethod
    def empty(cls, n_clients: int) -> "QueueState":
        z = lambda: np.zeros(n_clients + 1, dtype=np.int64)
        return cls(z(), z(), z(), z(), z(), z(), z(), z())


def step_arrivals(
    queues: QueueState,
    lambda_d_fps: np.ndarray,
    lambda_u_fps: np.ndarray,
    interval_s: float,
    rng: np.random.Generator,
) -> QueueState:
    """One Bernoulli arrival boundary: each direction of each client enqueues
    one frame with probability min(1, lambda * interval)."""
    p_d = np.clip(lambda_d_fps * interval_s, 0.0, 1.0)
    p_u = np.clip(lambda_u_fps * interval_s, 0.0, 1.0)
    draws = rng.random((2, len(p_d)))
    new_d = (draws[0] < p_d).astype(np.int64)
    new_u = (draws[1] < p_u).astype(np.int64)
    new_d[0] = 0
    new_u[0] = 0
    queues.q_down += new_d
    queues.q_up += new_u
    queues.arrived_down += new_d
    queues.arrived_up += new_u
    return queues


@dataclass
class TxopOutcome:
    kind: str  # "fd", "hd_down", "hd_up", "dead"
    down: int = 0
    up: int = 0
    collision: bool = False
    success_d: bool = False
    success_u: bool = False
    bits_d: float = 0.0
    bits_u: float = 0.0
    rate_d: float = 0.0
    rate_u: float = 0.0
    p_up_w: float = 0.0
    w0: int = 0
    wmin: int = 0
    n_contenders: int = 0
    difs_us: float = 0.0
    contention_us: float = 0.0
    header_us: float = 0.0
    payload_us: float = 0.0
    ack_us: float = 0.0
    sinr_checked: bool = False
    sinr_ok: bool = True

    @property
    def duration_us(self) -> float:
        return (
            self.difs_us
            + self.contention_us
            + self.header_us
            + self.payload_us
            + self.ack_us
        )

    @property
    def has_data(self) -> bool:
        return self.kind != "dead"


@dataclass
class EpochStats:
    duration_s: float = 0.0
    bits_down: float = 0.0
    bits_up: float = 0.0
    fd_time_s: float = 0.0
    hd_down_time_s: float = 0.0
    hd_up_time_s: float = 0.0
    contention_time_s: float = 0.0  # all non-payload busy time
    idle_time_s: float = 0.0
    collisions: int = 0
    data_txops: int = 0
    contention_us_sum: float = 0.0
    arrivals_down: int = 0
    arrivals_up: int = 0

    def categories_sum_s(self) -> float:
        return (
            self.fd_time_s
            + self.hd_down_time_s
            + self.hd_up_time_s
            + self.contention_time_s
            + self.idle_time_s
        )


class SimState:
    """Mutable per-replica simulation state."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.power_cfg = PowerConfig(cfg.max_tx_dbm, cfg.noise_dbm)
        self.rate_table = cfg.rate_table()
        self.topology = generate_topology(cfg.n_clients, cfg.area_side_m, cfg.seed)
        ss = np.random.SeedSequence(cfg.seed)
        kids = ss.spawn(4)
        self.rng_fading = np.random.default_rng(kids[0])
        self.rng_arrivals = np.random.default_rng(kids[1])
        self.rng_mac = np.random.default_rng(kids[2])
        self.rng_est = np.random.default_rng(kids[3])
        self.queues = QueueState.empty(cfg.n_clients)
        self.lam_d = cfg.lambda_array(cfg.lambda_d_fps)
        self.lam_u = cfg.lambda_array(cfg.lambda_u_fps)
        self.clock_us = 0.0
        self.boundary_idx = 0
        self.l_bits = cfg.frame_bits
        self.link: LinkState | None = None
        self.metrics: pairing.LinkMetrics | None = None
        self._plan = None
        self._plan_table = None
        # mean path loss gains without fading, for per-packet redraws
        dist = np.maximum(self.topology.distance_matrix(), 1.0)
        pl_db = cfg.pl0_db + 10.0 * cfg.path_loss_exp * np.log10(dist)
        self.pathloss_lin = 10.0 ** (-pl_db / 10.0)
        np.fill_diagonal(self.pathloss_lin, 0.0)

    # -- channel -------------------------------------------------------

    def redraw_link(self):
        self.link = draw_link_state(
            self.topology,
            self.power_cfg,
            self.cfg.sic_db,
            self.rng_fading,
            self.cfg.pl0_db,
            self.cfg.path_loss_exp,
        )
        self.metrics = None
        self._plan = None
        self._plan_table = None

    def estimated_gain(self) -> np.ndarray | None:
        if self.cfg.gain_est_sigma_db <= 0:
            return None
        n = self.link.node_count
        noise_db = self.rng_est.normal(0.0, self.cfg.gain_est_sigma_db, (n, n))
        return self.link.gain * 10.0 ** (noise_db / 10.0)

    def refresh_metrics(self):
        self.metrics = pairing.compute_link_metrics(
            self.link,
            self.power_cfg,
            self.cfg.delta_db,
            self.rate_table,
            est_gain=self.estimated_gain(),
        )

    # -- arrivals ------------------------------------------------------

    @property
    def interval_us(self) -> float:
        return self.cfg.arrival_interval_ms * 1000.0

    def process_arrivals_until(self, t_us: float, stats: EpochStats | None = None):
        interval_s = self.interval_us / 1e6
        while (self.boundary_idx + 1) * self.interval_us <= t_us:
            self.boundary_idx += 1
            before_d = int(self.queues.arrived_down.sum())
            before_u = int(self.queues.arrived_up.sum())
            step_arrivals(self.queues, self.lam_d, self.lam_u, interval_s, self.rng_arrivals)
            if stats is not None:
                stats.arrivals_down += int(self.queues.arrived_down.sum()) - before_d
                stats.arrivals_up += int(self.queues.arrived_up.sum()) - before_u

    def next_boundary_us(self) -> float:
        return (self.boundary_idx + 1) * self.interval_us

    # -- queue service -------------------------------------------------

    def serve_down(self, client: int, success: bool):
        q = self.queues
        if success:
            q.q_down[client] -= 1
            q.served_down[client] += 1
            q.fail_down[client] = 0
        else:
            q.fail_down[client] += 1
            if self.cfg.retry_limit and q.fail_down[client] >= self.cfg.retry_limit:
                q.q_down[client] -= 1
                q.fail_down[client] = 0

    def serve_up(self, client: int, success: bool):
        q = self.queues
        if success:
            q.q_up[client] -= 1
            q.served_up[client] += 1
            q.fail_up[client] = 0
        else:
            q.fail_up[client] += 1
            if self.cfg.retry_limit and q.fail_up[client] >= self.cfg.retry_limit:
                q.q_up[client] -= 1
                q.fail_up[client] = 0


def sample_weighted(values: np.ndarray, weights: np.ndarray, rng) -> int:
    cum = np.cumsum(weights)
    u = rng.random() * cum[-1]
    return int(values[np.searchsorted(cum, u, side="right")])


def tone_contention(n_aps: int, n_subchannels: int, rng) -> int:
    """Frequency-domain downlink contention among full-duplex APs.

    Each AP broadcasts a tone on a random sub-channel; the lowest occupied
    sub-channel wins and equal picks force a retry. Every shipped experiment
    runs a single AP, which wins outright."""
    if n_aps < 1 or n_subchannels < 1:
        raise ValueError("n_aps and n_subchannels must be >= 1")
    if n_aps == 1:
        return 0
    while True:
        picks = rng.integers(0, n_subchannels, n_aps)
        winners = np.flatnonzero(picks == picks.min())
        if len(winners) == 1:
            return int(winners[0])


def pdr_scalar(table: phy.RateTable, rate: float, sinr_db: float) -> float:
    if sinr_db == float("-inf"):
        return 0.0
    thr = table.threshold_db[table.rates_mbps.index(rate)]
    z = table.steepness_per_db * (sinr_db - thr)
    return 1.0 / (1.0 + math.exp(-min(max(z, -500.0), 500.0)))


@dataclass
class TablePlan:
    """Array form of an AccessTable for fast per-txop sampling."""

    table: assign.AccessTable
    endpoints: np.ndarray
    p_end: np.ndarray
    cw0: np.ndarray
    fd_partners: list
    fd_cw: list
    up0_partners: np.ndarray
    up0_cw: np.ndarray
    use_margin: np.ndarray


def build_table_plan(state: SimState, table: assign.AccessTable) -> TablePlan:
    n = state.cfg.n_clients + 1
    endpoints = np.array(sorted(table.p_d), dtype=np.int64)
    p_end = np.array([table.p_d[e] for e in endpoints])
    cw0 = np.zeros(n, dtype=np.int64)
    fd_partners = [np.empty(0, dtype=np.int64)] * n
    fd_cw = [np.empty(0, dtype=np.int64)] * n
    use_margin = np.zeros(n, dtype=bool)
    per_i: dict[int, list] = {}
    up0: list = []
    for key, cw in table.cw.items():
        if key.down == 0:
            up0.append((key.up, cw))
        elif key.up == 0:
            cw0[key.down] = cw
        else:
            per_i.setdefault(key.down, []).append((key.up, cw))
    for i, entries in per_i.items():
        entries.sort()
        fd_partners[i] = np.array([e[0] for e in entries], dtype=np.int64)
        fd_cw[i] = np.array([e[1] for e in entries], dtype=np.int64)
        use_margin[i] = True
    up0.sort()
    up0_partners = np.array([e[0] for e in up0], dtype=np.int64)
    up0_cw = np.array([e[1] for e in up0], dtype=np.int64)
    return TablePlan(
        table=table,
        endpoints=endpoints,
        p_end=p_end,
        cw0=cw0,
        fd_partners=fd_partners,
        fd_cw=fd_cw,
        up0_partners=up0_partners,
        up0_cw=up0_cw,
        use_margin=use_margin,
    )


def run_txop(
    state: SimState, access_table: assign.AccessTable, rng: np.random.Generator
) -> TxopOutcome | None:
    """One transmission opportunity of the probabilistic Down-Up MAC.

    Returns None when no table endpoint has queued traffic (idle air until
    the next arrival)."""
    if access_table.is_idle:
        return None
    if state._plan_table is not access_table:
        if state.metrics is None:
            state.refresh_metrics()
        state._plan = build_table_plan(state, access_table)
        state._plan_table = access_table
    plan = state._plan
    cfg = state.cfg
    q = state.queues

    any_up = bool((q.q_up[1:] > 0).any())
    mask = np.where(plan.endpoints == 0, any_up, q.q_down[plan.endpoints] > 0)
    eligible = plan.p_end * mask
    total = eligible.sum()
    if total <= 0:
        return None
    i = sample_weighted(plan.endpoints, eligible, rng)

    if i == 0:
        return _txop_reserved_uplink(state, plan, rng)
    return _txop_downlink(state, plan, i, rng)


def _realized_fd_sinrs(state: SimState, i: int, j: int, p_up: float):
    """Realized downlink/uplink SINRs in dB for an FD transmission, honoring
    the per-packet fading switch."""
    m = state.metrics
    cfg = state.cfg
    if cfg.fading == "epoch":
        return m.sinr_d_db[i, j], m.sinr_u_db[i, j]
    p = state.power_cfg.max_tx_w
    noise = state.link.noise_w
    g0i = state.pathloss_lin[AP, i] * state.rng_mac.exponential()
    gji = state.pathloss_lin[j, i] * state.rng_mac.exponential()
    gj0 = state.pathloss_lin[j, AP] * state.rng_mac.exponential()
    sd = p * g0i / (noise[i] + p_up * gji)
    su = p_up * gj0 / (noise[AP] + p * state.link.self_gain)
    return linear_to_db(sd), linear_to_db(su)


def _realized_hd_sinr(state: SimState, tx: int, rx: int, p_w: float):
    if state.cfg.fading == "epoch":
        return None  # caller uses the epoch metric
    g = state.pathloss_lin[tx, rx] * state.rng_mac.exponential()
    return linear_to_db(p_w * g / state.link.noise_w[rx])


def _txop_reserved_uplink(state: SimState, plan: TablePlan, rng) -> TxopOutcome:
    cfg = state.cfg
    q = state.queues
    m = state.metrics
    mask = q.q_up[plan.up0_partners] > 0
    contenders = plan.up0_partners[mask]
    out = TxopOutcome(kind="hd_up", down=0, difs_us=cfg.difs_us, ack_us=0.0)
    if len(contenders) == 0:
        wait = int(plan.up0_cw.max()) if len(plan.up0_cw) else 1
        out.kind = "dead"
        out.contention_us = cfg.tone_us + wait * cfg.slot_us
        return out
    cws = plan.up0_cw[mask]
    draws = rng.integers(1, cws + 1)
    wmin = int(draws.min())
    winners = contenders[draws == wmin]
    out.wmin = wmin
    out.n_contenders = len(contenders)
    out.contention_us = cfg.tone_us + wmin * cfg.slot_us
    out.header_us = cfg.header_us
    out.ack_us = cfg.sifs_us + cfg.ack_us
    if len(winners) > 1:
        out.collision = True
        out.payload_us = float(np.max(state.l_bits / m.rate_u_full[winners]))
        return out
    j = int(winners[0])
    out.up = j
    out.rate_u = float(m.rate_u_full[j])
    out.p_up_w = state.power_cfg.max_tx_w
    sinr = _realized_hd_sinr(state, j, AP, out.p_up_w)
    sinr_db = m.snr_u_db[j] if sinr is None else sinr
    p_ok = pdr_scalar(state.rate_table, out.rate_u, sinr_db)
    out.success_u = bool(rng.random() < p_ok)
    out.payload_us = state.l_bits / out.rate_u
    state.serve_up(j, out.success_u)
    if out.success_u:
        out.bits_u = state.l_bits
    return out


def _txop_downlink(state: SimState, plan: TablePlan, i: int, rng) -> TxopOutcome:
    cfg = state.cfg
    q = state.queues
    m = state.metrics
    margin = bool(plan.use_margin[i])
    rate_d = float(m.rate_d_margin[i] if margin else m.rate_d_full[i])
    pay_d = state.l_bits / rate_d

    out = TxopOutcome(
        kind="hd_down",
        down=i,
        rate_d=rate_d,
        difs_us=cfg.difs_us,
        header_us=cfg.header_us,
        ack_us=cfg.sifs_us + cfg.ack_us,
    )

    w0 = int(rng.integers(1, plan.cw0[i] + 1)) if plan.cw0[i] > 0 else 0
    out.w0 = w0
    partners = plan.fd_partners[i]
    winner = 0
    colliders = None
    backoff = w0
    if len(partners):
        mask = q.q_up[partners] > 0
        contenders = partners[mask]
        if len(contenders):
            cws = plan.fd_cw[i][mask]
            draws = rng.integers(1, cws + 1)
            if w0 > 0:
                active = draws <= w0
            else:
                active = np.ones(len(draws), dtype=bool)
            out.n_contenders = int(active.sum())
            if active.any():
                wmin = int(draws[active].min())
                winners = contenders[active][draws[active] == wmin]
                out.wmin = wmin
                backoff = wmin
                if len(winners) > 1:
                    colliders = winners
                else:
                    winner = int(winners[0])
    out.contention_us = cfg.tone_us + backoff * cfg.slot_us

    if winner:
        j = winner
        p_up = float(m.cap_w[i, j])
        rate_u = float(m.rate_u[i, j])
        sin_d, sin_u = _realized_fd_sinrs(state, i, j, p_up)
        out.kind = "fd"
        out.up = j
        out.rate_u = rate_u
        out.p_up_w = p_up
        out.sinr_checked = True
        out.sinr_ok = bool(sin_d >= m.snr_d_db[i] - cfg.delta_db - 1e-9)
        ok_d = pdr_scalar(state.rate_table, rate_d, sin_d)
        ok_u = pdr_scalar(state.rate_table, rate_u, sin_u)
        out.success_d = bool(rng.random() < ok_d)
        out.success_u = bool(rng.random() < ok_u)
        out.payload_us = max(pay_d, state.l_bits / rate_u)
        state.serve_down(i, out.success_d)
        state.serve_up(j, out.success_u)
        if out.success_d:
            out.bits_d = state.l_bits
        if out.success_u:
            out.bits_u = state.l_bits
        return out

    # half-duplex downlink (no contender, all gave up, or a collision);
    # a collision leaves the downlink running alone
    if colliders is not None:
        out.collision = True
        pay_coll = float(np.max(state.l_bits / m.rate_u[i, colliders]))
        out.payload_us = max(pay_d, pay_coll)
    else:
        out.payload_us = pay_d
    sinr = _realized_hd_sinr(state, AP, i, state.power_cfg.max_tx_w)
    sinr_db = m.snr_d_db[i] if sinr is None else sinr
    p_ok = pdr_scalar(state.rate_table, rate_d, sinr_db)
    out.success_d = bool(rng.random() < p_ok)
    state.serve_down(i, out.success_d)
    if out.success_d:
        out.bits_d = state.l_bits
    return out


@dataclass
class SimReport:
    cfg: SimConfig
    epochs: list
    total_duration_s: float = 0.0
    bits_down: float = 0.0
    bits_up: float = 0.0
    bits_down_client: np.ndarray | None = None
    bits_up_client: np.ndarray | None = None
    collisions: int = 0
    data_txops: int = 0
    fd_time_s: float = 0.0
    hd_down_time_s: float = 0.0
    hd_up_time_s: float = 0.0
    contention_time_s: float = 0.0
    idle_time_s: float = 0.0
    contention_us_sum: float = 0.0
    uplink_tx_counts: np.ndarray | None = None
    pair_realized: dict = field(default_factory=dict)
    pair_assigned_sum: dict = field(default_factory=dict)
    table_epochs: int = 0
    fd_sinr_checks: int = 0
    fd_sinr_violations: int = 0
    min_uplink_power_w: float = float("inf")
    max_uplink_power_w: float = 0.0
    rates_used: set = field(default_factory=set)

    @property
    def tput_total_mbps(self) -> float:
        return (self.bits_down + self.bits_up) / self.total_duration_s / 1e6

    @property
    def tput_down_mbps(self) -> float:
        return self.bits_down / self.total_duration_s / 1e6

    @property
    def tput_up_mbps(self) -> float:
        return self.bits_up / self.total_duration_s / 1e6

    @property
    def collision_prob(self) -> float:
        return self.collisions / self.data_txops if self.data_txops else 0.0

    @property
    def fd_time_frac(self) -> float:
        busy = self.fd_time_s + self.hd_down_time_s + self.hd_up_time_s
        return self.fd_time_s / busy if busy > 0 else 0.0

    @property
    def hd_time_frac(self) -> float:
        busy = self.fd_time_s + self.hd_down_time_s + self.hd_up_time_s
        return (self.hd_down_time_s + self.hd_up_time_s) / busy if busy > 0 else 0.0

    @property
    def mean_contention_us(self) -> float:
        return self.contention_us_sum / self.data_txops if self.data_txops else 0.0

    def uplink_shares(self) -> np.ndarray:
        total = self.uplink_tx_counts[1:].sum()
        if total == 0:
            return np.zeros(self.cfg.n_clients)
        return self.uplink_tx_counts[1:] / total

    def assigned_mean(self) -> dict:
        if self.table_epochs == 0:
            return {}
        return {k: v / self.table_epochs for k, v in self.pair_assigned_sum.items()}

    def realized_freq(self) -> dict:
        total = sum(self.pair_realized.values())
        if total == 0:
            return {}
        return {k: v / total for k, v in self.pair_realized.items()}

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(
            repr(
                (
                    self.total_duration_s,
                    self.bits_down,
                    self.bits_up,
                    self.collisions,
                    self.data_txops,
                    self.fd_time_s,
                    self.hd_down_time_s,
                    self.hd_up_time_s,
                    self.contention_time_s,
                    self.idle_time_s,
                )
            ).encode()
        )
        for e in self.epochs:
            h.update(
                repr(
                    (e.duration_s, e.bits_down, e.bits_up, e.collisions, e.data_txops)
                ).encode()
            )
        h.update(repr(sorted(self.pair_realized.items())).encode())
        h.update(repr(self.uplink_tx_counts.tolist()).encode())
        return h.hexdigest()


def _accumulate(report: SimReport, stats: EpochStats, out: TxopOutcome, state: SimState):
    payload_s = out.payload_us / 1e6
    over_s = (out.difs_us + out.contention_us + out.header_us + out.ack_us) / 1e6
    stats.contention_time_s += over_s
    if out.kind == "fd":
        stats.fd_time_s += payload_s
    elif out.kind == "hd_down":
        stats.hd_down_time_s += payload_s
    elif out.kind == "hd_up":
        stats.hd_up_time_s += payload_s
    if not out.has_data:
        return
    stats.data_txops += 1
    stats.contention_us_sum += out.contention_us
    if out.collision:
        stats.collisions += 1
    stats.bits_down += out.bits_d
    stats.bits_up += out.bits_u
    if out.bits_d:
        report.bits_down_client[out.down] += out.bits_d
    if out.bits_u:
        report.bits_up_client[out.up] += out.bits_u
    if out.kind == "fd" or (out.kind == "hd_up" and not out.collision):
        report.uplink_tx_counts[out.up] += 1
    if not out.collision:
        key = PairKey(out.down, out.up)
        report.pair_realized[key] = report.pair_realized.get(key, 0) + 1
    if out.sinr_checked:
        report.fd_sinr_checks += 1
        if not out.sinr_ok:
            report.fd_sinr_violations += 1
    if out.rate_d:
        report.rates_used.add(out.rate_d)
    if out.rate_u:
        report.rates_used.add(out.rate_u)
    if out.p_up_w > 0:
        report.min_uplink_power_w = min(report.min_uplink_power_w, out.p_up_w)
        report.max_uplink_power_w = max(report.max_uplink_power_w, out.p_up_w)


def run_epoch(state: SimState, policy, report: SimReport) -> EpochStats:
    cfg = state.cfg
    stats = EpochStats()
    start = state.clock_us
    target = start + cfg.epoch_us
    while state.clock_us < target:
        state.process_arrivals_until(state.clock_us, stats)
        out = policy.txop(state)
        if out is None:
            jump = min(state.next_boundary_us(), target)
            stats.idle_time_s += (jump - state.clock_us) / 1e6
            state.clock_us = jump
            continue
        _accumulate(report, stats, out, state)
        state.clock_us += out.duration_us
    stats.duration_s = (state.clock_us - start) / 1e6
    return stats


def run_simulation(cfg: SimConfig) -> SimReport:
    """Run one seeded replica of the configured scheme and aggregate stats."""
    bad = cfg.validate()
    if bad:
        raise ValueError(f"invalid config fields: {', '.join(bad)}")
    from . import schemes  # local import; schemes builds on this module

    state = SimState(cfg)
    policy = schemes.scheme_epoch_policy(cfg.scheme, state)
    report = SimReport(cfg=cfg, epochs=[])
    report.bits_down_client = np.zeros(cfg.n_clients + 1)
    report.bits_up_client = np.zeros(cfg.n_clients + 1)
    report.uplink_tx_counts = np.zeros(cfg.n_clients + 1, dtype=np.int64)

    prev_arr_d = None
    prev_arr_u = None
    prev_duration = None
    for _ in range(cfg.epochs):
        state.redraw_link()
        if prev_arr_d is None:
            lam_d, lam_u = state.lam_d, state.lam_u
        else:
            lam_d = prev_arr_d / prev_duration
            lam_u = prev_arr_u / prev_duration
        demands = assign.DemandSnapshot(
            lambda_d=lam_d,
            lambda_u=lam_u,
            l_d_bits=np.full(cfg.n_clients + 1, cfg.frame_bits),
            l_u_bits=np.full(cfg.n_clients + 1, cfg.frame_bits),
            T_s=cfg.epoch_ms / 1000.0,
        )
        before_d = state.queues.arrived_down.copy()
        before_u = state.queues.arrived_up.copy()
        policy.epoch_start(state, demands, report)
        stats = run_epoch(state, policy, report)
        prev_arr_d = (state.queues.arrived_down - before_d).astype(float)
        prev_arr_u = (state.queues.arrived_up - before_u).astype(float)
        prev_duration = stats.duration_s
        report.epochs.append(stats)

    for e in report.epochs:
        report.total_duration_s += e.duration_s
        report.bits_down += e.bits_down
        report.bits_up += e.bits_up
        report.collisions += e.collisions
        report.data_txops += e.data_txops
        report.fd_time_s += e.fd_time_s
        report.hd_down_time_s += e.hd_down_time_s
        report.hd_up_time_s += e.hd_up_time_s
        report.contention_time_s += e.contention_time_s
        report.idle_time_s += e.idle_time_s
        report.contention_us_sum += e.contention_us_sum
    return report
