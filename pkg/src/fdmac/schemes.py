"""The comparison schemes sharing the MAC engine machinery.

proposed/oracle run the epoch assignment pipeline and the probabilistic
Down-Up contention; maxrate, greedy, random and halfduplex implement the
baselines from the evaluation setup.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import assign, engine, pairing, phy
from .channel import AP
from .engine import SimState, TxopOutcome, pdr_scalar
from .pairing import PairMetrics, pair_airtime


def scheme_epoch_policy(scheme: str, state: SimState):
    """Per-txop behavior for one scheme, bound to a simulation replica."""
    try:
        cls = _POLICIES[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}") from None
    return cls(state)


# ---------------------------------------------------------------------------
# proposed / oracle


class ProposedPolicy:
    """Epoch LP assignment fed with the protocol's approximated rates:
    downlink from (SNR - delta), uplink from the quantized best-rate
    feedback."""

    oracle = False

    def __init__(self, state: SimState):
        self.table = assign.AccessTable()

    def epoch_start(self, state: SimState, demands, report):
        state.refresh_metrics()
        cfg = state.cfg
        l = np.full(cfg.n_clients + 1, cfg.frame_bits)
        pairs = pairing.build_candidate_pairs(
            state.link,
            state.power_cfg,
            cfg.delta_db,
            cfg.epsilon_mbps,
            l,
            l,
            state.rate_table,
            metrics=state.metrics,
        )
        lp_pairs = self.lp_view(pairs, state)
        self.table, self.alloc = assign.assign_epoch(
            demands,
            lp_pairs,
            cfg.cw_max,
            lowest_rate_mbps=state.rate_table.rates_mbps[0],
            lex_tiebreak=cfg.lex_tiebreak,
        )
        if not self.table.is_idle:
            report.table_epochs += 1
            for k, v in self.table.p.items():
                report.pair_assigned_sum[k] = report.pair_assigned_sum.get(k, 0.0) + v
        if cfg.dump_access_path:
            with open(cfg.dump_access_path, "a") as fh:
                fh.write(f"# epoch {report.table_epochs}\n")
                fh.write(assign.format_access_table(self.table, self.alloc))

    def lp_view(self, pairs, state: SimState):
        """Replace FD uplink rates by the nominal bit-rate each client reports
        through the 3-bit feedback field."""
        m = state.metrics
        table = state.rate_table
        rates = table.rates_array()
        n = state.cfg.n_clients + 1
        idx = np.searchsorted(rates, m.rate_u)
        reported = np.zeros_like(m.rate_u)
        for j in range(1, n):
            others = [i for i in range(1, n) if i != j]
            bits = phy.encode_rate_feedback([int(idx[i, j]) for i in others], table)
            decoded = phy.decode_rate_feedback(bits, len(others), table)
            for i, d in zip(others, decoded):
                reported[i, j] = rates[d]
        out = {}
        for key, pm in pairs.items():
            if not key.is_full_duplex:
                out[key] = pm
                continue
            gamma_u = float(reported[key.down, key.up])
            out[key] = PairMetrics(
                r_d_mbps=pm.r_d_mbps,
                r_u_mbps=gamma_u,
                t_s=pair_airtime(pm.l_d_bits, pm.l_u_bits, pm.r_d_mbps, gamma_u),
                l_d_bits=pm.l_d_bits,
                l_u_bits=pm.l_u_bits,
            )
        return out

    def txop(self, state: SimState):
        return engine.run_txop(state, self.table, state.rng_mac)


class OraclePolicy(ProposedPolicy):
    """Identical contention, but the LP sees the exact effective rates at the
    realized capped interference."""

    oracle = True

    def lp_view(self, pairs, state: SimState):
        m = state.metrics
        out = {}
        for key, pm in pairs.items():
            if not key.is_full_duplex:
                out[key] = pm
                continue
            r_d = float(m.r_d_actual[key.down, key.up])
            r_u = float(m.r_u[key.down, key.up])
            out[key] = PairMetrics(
                r_d_mbps=r_d,
                r_u_mbps=r_u,
                t_s=pair_airtime(pm.l_d_bits, pm.l_u_bits, r_d, r_u),
                l_d_bits=pm.l_d_bits,
                l_u_bits=pm.l_u_bits,
            )
        return out


# ---------------------------------------------------------------------------
# full-power quantities for the non-power-controlled baselines


@dataclass
class FullPowerMetrics:
    snr_d_db: np.ndarray
    rate_d_full: np.ndarray
    r_d_full: np.ndarray
    snr_u_db: np.ndarray
    rate_u_full: np.ndarray
    r_u_full: np.ndarray
    sinr_d_fp_db: np.ndarray  # (n, n) downlink SINR with full-power uplink ICI
    rate_d_fp: np.ndarray
    r_d_fp: np.ndarray
    sinr_u_fp_db: np.ndarray  # (n,) uplink SINR at full power, AP transmitting
    rate_u_fp: np.ndarray
    r_u_fp: np.ndarray


def full_power_metrics(state: SimState) -> FullPowerMetrics:
    link = state.link
    g = link.gain
    p = state.power_cfg.max_tx_w
    noise = link.noise_w
    table = state.rate_table

    with np.errstate(divide="ignore"):
        snr_d_db = 10.0 * np.log10(np.maximum(p * g[AP, :] / noise, 1e-300))
        snr_d_db[AP] = -np.inf
        snr_u_db = 10.0 * np.log10(np.maximum(p * g[:, AP] / noise[AP], 1e-300))
        snr_u_db[AP] = -np.inf
        sig = p * g[AP, :][:, None]
        sinr_d_fp = sig / (noise[:, None] + p * g.T)
        sinr_d_fp_db = 10.0 * np.log10(np.maximum(sinr_d_fp, 1e-300))
        sinr_u_fp = p * g[:, AP] / (noise[AP] + p * link.self_gain)
        sinr_u_fp_db = 10.0 * np.log10(np.maximum(sinr_u_fp, 1e-300))
        sinr_u_fp_db[AP] = -np.inf

    rate_d_full, r_d_full = phy.effective_throughput_grid(snr_d_db, table)
    rate_u_full, r_u_full = phy.effective_throughput_grid(snr_u_db, table)
    rate_d_fp, r_d_fp = phy.effective_throughput_grid(sinr_d_fp_db, table)
    rate_u_fp, r_u_fp = phy.effective_throughput_grid(sinr_u_fp_db, table)
    return FullPowerMetrics(
        snr_d_db=snr_d_db,
        rate_d_full=rate_d_full,
        r_d_full=r_d_full,
        snr_u_db=snr_u_db,
        rate_u_full=rate_u_full,
        r_u_full=r_u_full,
        sinr_d_fp_db=sinr_d_fp_db,
        rate_d_fp=rate_d_fp,
        r_d_fp=r_d_fp,
        sinr_u_fp_db=sinr_u_fp_db,
        rate_u_fp=rate_u_fp,
        r_u_fp=r_u_fp,
    )


def _hd_down_outcome(state: SimState, i: int, rate_d: float, sinr_db: float, backoff_slots: int, tone: bool):
    cfg = state.cfg
    out = TxopOutcome(
        kind="hd_down",
        down=i,
        rate_d=rate_d,
        difs_us=cfg.difs_us,
        header_us=cfg.header_us,
        ack_us=cfg.sifs_us + cfg.ack_us,
        contention_us=(cfg.tone_us if tone else 0.0) + backoff_slots * cfg.slot_us,
        payload_us=state.l_bits / rate_d,
    )
    out.success_d = bool(state.rng_mac.random() < pdr_scalar(state.rate_table, rate_d, sinr_db))
    state.serve_down(i, out.success_d)
    if out.success_d:
        out.bits_d = state.l_bits
    return out


def _hd_up_outcome(state: SimState, j: int, rate_u: float, sinr_db: float, backoff_slots: int, tone: bool):
    cfg = state.cfg
    out = TxopOutcome(
        kind="hd_up",
        down=0,
        up=j,
        rate_u=rate_u,
        p_up_w=state.power_cfg.max_tx_w,
        difs_us=cfg.difs_us,
        header_us=cfg.header_us,
        ack_us=cfg.sifs_us + cfg.ack_us,
        contention_us=(cfg.tone_us if tone else 0.0) + backoff_slots * cfg.slot_us,
        payload_us=state.l_bits / rate_u,
    )
    out.success_u = bool(state.rng_mac.random() < pdr_scalar(state.rate_table, rate_u, sinr_db))
    state.serve_up(j, out.success_u)
    if out.success_u:
        out.bits_u = state.l_bits
    return out


def _fd_outcome(
    state: SimState,
    i: int,
    j: int,
    rate_d: float,
    rate_u: float,
    p_up_w: float,
    sinr_d_db: float,
    sinr_u_db: float,
    backoff_slots: int,
    check_margin: bool,
    tone: bool = True,
):
    cfg = state.cfg
    out = TxopOutcome(
        kind="fd",
        down=i,
        up=j,
        rate_d=rate_d,
        rate_u=rate_u,
        p_up_w=p_up_w,
        difs_us=cfg.difs_us,
        header_us=cfg.header_us,
        ack_us=cfg.sifs_us + cfg.ack_us,
        contention_us=(cfg.tone_us if tone else 0.0) + backoff_slots * cfg.slot_us,
        payload_us=max(state.l_bits / rate_d, state.l_bits / rate_u),
    )
    if check_margin:
        out.sinr_checked = True
        out.sinr_ok = bool(sinr_d_db >= state.metrics.snr_d_db[i] - cfg.delta_db - 1e-9)
    rng = state.rng_mac
    out.success_d = bool(rng.random() < pdr_scalar(state.rate_table, rate_d, sinr_d_db))
    out.success_u = bool(rng.random() < pdr_scalar(state.rate_table, rate_u, sinr_u_db))
    state.serve_down(i, out.success_d)
    state.serve_up(j, out.success_u)
    if out.success_d:
        out.bits_d = state.l_bits
    if out.success_u:
        out.bits_u = state.l_bits
    return out


# ---------------------------------------------------------------------------
# MaxRate


class MaxRatePolicy:
    """Uniform downlink choice; the highest-reported-rate uplink client joins
    without contention. Power control applies.

    The AP only knows the rates a client piggybacked on its own uplink
    packets, so a client that stops winning stops refreshing its report and
    stays invisible: the favoritism is self-reinforcing."""

    def __init__(self, state: SimState):
        self.reported = None  # (n, n) last-reported uplink rates, Mb/s
        self.won_prev = np.zeros(state.cfg.n_clients + 1, dtype=bool)
        self.report_age = np.zeros(state.cfg.n_clients + 1, dtype=np.int64)

    def epoch_start(self, state: SimState, demands, report):
        state.refresh_metrics()
        m = state.metrics
        if self.reported is None:
            # association-time report from every client
            self.reported = m.rate_u.copy()
        else:
            self.report_age += 1
            refresh = np.flatnonzero(self.won_prev)
            self.reported[:, refresh] = m.rate_u[:, refresh]
            self.report_age[refresh] = 0
        self.won_prev[:] = False

    def txop(self, state: SimState):
        cfg = state.cfg
        q = state.queues
        m = state.metrics
        rng = state.rng_mac
        downs = np.flatnonzero(q.q_down[1:] > 0) + 1
        if len(downs) == 0:
            ups = np.flatnonzero(q.q_up[1:] > 0) + 1
            if len(ups) == 0:
                return None
            j = int(ups[np.argmax(m.rate_u_full[ups])])
            self.won_prev[j] = True
            return _hd_up_outcome(state, j, float(m.rate_u_full[j]), float(m.snr_u_db[j]), 0, tone=False)
        i = int(downs[rng.integers(len(downs))])
        ups = np.flatnonzero(q.q_up[1:] > 0) + 1
        ups = ups[(ups != i) & (self.reported[i, ups] > cfg.epsilon_mbps)]
        if len(ups) == 0:
            return _hd_down_outcome(state, i, float(m.rate_d_full[i]), float(m.snr_d_db[i]), 0, tone=False)
        # rate first, fresher report on ties (the AP trusts recent feedback)
        vals = self.reported[i, ups]
        top = ups[vals == vals.max()]
        j = int(top[np.argmin(self.report_age[top])])
        self.won_prev[j] = True
        rate_d = float(m.rate_d_margin[i])
        sin_d, sin_u = engine._realized_fd_sinrs(state, i, j, float(m.cap_w[i, j]))
        return _fd_outcome(
            state,
            i,
            j,
            rate_d,
            float(m.rate_u[i, j]),
            float(m.cap_w[i, j]),
            sin_d,
            sin_u,
            0,
            check_margin=True,
            tone=False,
        )


# ---------------------------------------------------------------------------
# Greedy


def greedy_pairing(value: np.ndarray) -> list[tuple[int, int]]:
    """Repeatedly pick the highest-value (down, up) pair, removing every pair
    that shares an endpoint with it. Non-candidates carry -inf value."""
    value = value.copy()
    n = value.shape[0]
    out = []
    while np.isfinite(value).any():
        flat = int(np.argmax(value))
        i, j = divmod(flat, n)
        out.append((i, j))
        value[i, :] = value[:, i] = -np.inf
        value[j, :] = value[:, j] = -np.inf
    return out


class GreedyPolicy:
    """Deterministic one-to-one pairing by repeated max-throughput extraction
    at full power; leftovers run half-duplex; equal-probability contention
    among the selected units."""

    def __init__(self, state: SimState):
        self.units = []

    def epoch_start(self, state: SimState, demands, report):
        state.refresh_metrics()
        self.fp = full_power_metrics(state)
        cfg = state.cfg
        value = self.fp.r_d_fp + self.fp.r_u_fp[None, :]
        ok = (self.fp.r_d_fp > cfg.epsilon_mbps) & (self.fp.r_u_fp[None, :] > cfg.epsilon_mbps)
        value = np.where(ok, value, -np.inf)
        value[:, 0] = value[0, :] = -np.inf
        np.fill_diagonal(value, -np.inf)
        fd_units = greedy_pairing(value)
        paired = {node for pair in fd_units for node in pair}
        self.units = [("fd", i, j) for i, j in fd_units]
        for c in range(1, cfg.n_clients + 1):
            if c in paired:
                continue
            if self.fp.r_d_full[c] > cfg.epsilon_mbps:
                self.units.append(("hd_d", c, 0))
            if self.fp.r_u_full[c] > cfg.epsilon_mbps:
                self.units.append(("hd_u", c, 0))

    def selected_pairs(self):
        return [(i, j) for kind, i, j in self.units if kind == "fd"]

    def txop(self, state: SimState):
        q = state.queues
        fp = self.fp
        rng = state.rng_mac
        eligible = []
        for unit in self.units:
            kind, a, b = unit
            if kind == "fd" and (q.q_down[a] > 0 or q.q_up[b] > 0):
                eligible.append(unit)
            elif kind == "hd_d" and q.q_down[a] > 0:
                eligible.append(unit)
            elif kind == "hd_u" and q.q_up[a] > 0:
                eligible.append(unit)
        if not eligible:
            return None
        kind, a, b = eligible[rng.integers(len(eligible))]
        if kind == "hd_d":
            return _hd_down_outcome(state, a, float(fp.rate_d_full[a]), float(fp.snr_d_db[a]), 0, tone=False)
        if kind == "hd_u":
            return _hd_up_outcome(state, a, float(fp.rate_u_full[a]), float(fp.snr_u_db[a]), 0, tone=False)
        i, j = a, b
        if q.q_down[i] > 0 and q.q_up[j] > 0:
            return _fd_outcome(
                state,
                i,
                j,
                float(fp.rate_d_fp[i, j]),
                float(fp.rate_u_fp[j]),
                state.power_cfg.max_tx_w,
                float(fp.sinr_d_fp_db[i, j]),
                float(fp.sinr_u_fp_db[j]),
                0,
                check_margin=False,
                tone=False,
            )
        if q.q_down[i] > 0:
            return _hd_down_outcome(state, i, float(fp.rate_d_full[i]), float(fp.snr_d_db[i]), 0, tone=False)
        return _hd_up_outcome(state, j, float(fp.rate_u_full[j]), float(fp.snr_u_db[j]), 0, tone=False)


# ---------------------------------------------------------------------------
# Random


class RandomPolicy:
    """Uniform downlink choice; every queued client contends for uplink with
    802.11 binary exponential backoff at full power, ignoring ICI. The AP
    cannot anticipate the joiner's ICI, so the downlink rate comes from its
    interference-free SNR and the frame takes its chances at the realized
    SINR."""

    def __init__(self, state: SimState):
        self.cw = np.full(state.cfg.n_clients + 1, state.cfg.cw_min, dtype=np.int64)

    def epoch_start(self, state: SimState, demands, report):
        state.refresh_metrics()
        self.fp = full_power_metrics(state)

    def txop(self, state: SimState):
        cfg = state.cfg
        q = state.queues
        fp = self.fp
        rng = state.rng_mac
        downs = np.flatnonzero(q.q_down[1:] > 0) + 1
        i = int(downs[rng.integers(len(downs))]) if len(downs) else 0
        ups = np.flatnonzero(q.q_up[1:] > 0) + 1
        ups = ups[ups != i]
        if i == 0 and len(ups) == 0:
            return None
        if len(ups) == 0:
            return _hd_down_outcome(state, i, float(fp.rate_d_full[i]), float(fp.snr_d_db[i]), 0, tone=False)
        draws = rng.integers(0, self.cw[ups])
        wmin = int(draws.min())
        winners = ups[draws == wmin]
        if len(winners) > 1:
            # uplink frames lost; the downlink, if any, continues alone
            self.cw[winners] = np.minimum(self.cw[winners] * 2, cfg.cw_max)
            pay_coll = float(np.max(state.l_bits / fp.rate_u_fp[winners]))
            if i > 0:
                out = _hd_down_outcome(state, i, float(fp.rate_d_full[i]), float(fp.snr_d_db[i]), wmin, tone=False)
                out.payload_us = max(out.payload_us, pay_coll)
            else:
                out = TxopOutcome(
                    kind="hd_up",
                    down=0,
                    difs_us=cfg.difs_us,
                    header_us=cfg.header_us,
                    contention_us=wmin * cfg.slot_us,
                    ack_us=cfg.sifs_us + cfg.ack_us,
                    payload_us=pay_coll,
                )
            out.collision = True
            out.wmin = wmin
            out.n_contenders = len(ups)
            return out
        j = int(winners[0])
        if i == 0:
            out = _hd_up_outcome(state, j, float(fp.rate_u_full[j]), float(fp.snr_u_db[j]), wmin, tone=False)
        else:
            sin_d = float(fp.sinr_d_fp_db[i, j])
            sin_u = float(fp.sinr_u_fp_db[j])
            if cfg.fading == "packet":
                sin_d, sin_u = engine._realized_fd_sinrs(state, i, j, state.power_cfg.max_tx_w)
            out = _fd_outcome(
                state,
                i,
                j,
                float(fp.rate_d_full[i]),
                float(fp.rate_u_fp[j]),
                state.power_cfg.max_tx_w,
                sin_d,
                sin_u,
                wmin,
                check_margin=False,
                tone=False,
            )
        delivered = out.success_u
        self.cw[j] = cfg.cw_min if delivered else min(int(self.cw[j]) * 2, cfg.cw_max)
        out.n_contenders = len(ups)
        return out


# ---------------------------------------------------------------------------
# HalfDuplex (802.11 DCF)


class HalfDuplexPolicy:
    """Slot-granularity DCF over the AP and all clients: frozen uniform
    backoff counters, binary exponential doubling on collision or delivery
    failure, reset on success."""

    def __init__(self, state: SimState):
        n = state.cfg.n_clients + 1
        self.cw = np.full(n, state.cfg.cw_min, dtype=np.int64)
        self.counter = np.full(n, -1, dtype=np.int64)
        self.rr = 1

    def epoch_start(self, state: SimState, demands, report):
        state.refresh_metrics()
        self.fp = full_power_metrics(state)

    def _peek_down_client(self, q) -> int:
        n = len(q.q_down)
        for off in range(n - 1):
            c = (self.rr - 1 + off) % (n - 1) + 1
            if q.q_down[c] > 0:
                return c
        return 0

    def txop(self, state: SimState):
        cfg = state.cfg
        q = state.queues
        fp = self.fp
        rng = state.rng_mac
        clients = np.flatnonzero(q.q_up[1:] > 0) + 1
        stations = list(clients)
        if q.q_down[1:].any():
            stations.insert(0, 0)
        if not stations:
            return None
        stations = np.array(stations, dtype=np.int64)
        need = stations[self.counter[stations] < 0]
        if len(need):
            self.counter[need] = rng.integers(0, self.cw[need])
        m = int(self.counter[stations].min())
        tx = stations[self.counter[stations] == m]
        self.counter[stations] -= m

        if len(tx) == 1:
            s = int(tx[0])
            if s == 0:
                c = self._peek_down_client(q)
                out = _hd_down_outcome(state, c, float(fp.rate_d_full[c]), float(fp.snr_d_db[c]), m, tone=False)
                delivered = out.success_d
                if delivered:
                    self.rr = c % (len(q.q_down) - 1) + 1
            else:
                out = _hd_up_outcome(state, s, float(fp.rate_u_full[s]), float(fp.snr_u_db[s]), m, tone=False)
                delivered = out.success_u
            self.cw[s] = cfg.cw_min if delivered else min(int(self.cw[s]) * 2, cfg.cw_max)
            self.counter[s] = -1
            out.wmin = m
            return out
        # collision: every transmitter doubles its window and redraws
        pay = []
        down_in = False
        for s in tx:
            if s == 0:
                pay.append(state.l_bits / float(fp.rate_d_full[self._peek_down_client(q)]))
                down_in = True
            else:
                pay.append(state.l_bits / float(fp.rate_u_full[int(s)]))
        self.cw[tx] = np.minimum(self.cw[tx] * 2, cfg.cw_max)
        self.counter[tx] = -1
        out = TxopOutcome(
            kind="hd_down" if down_in else "hd_up",
            collision=True,
            wmin=m,
            n_contenders=len(stations),
            difs_us=cfg.difs_us,
            contention_us=m * cfg.slot_us,
            header_us=cfg.header_us,
            payload_us=max(pay),
            ack_us=cfg.sifs_us + cfg.ack_us,
        )
        return out


_POLICIES = {
    "proposed": ProposedPolicy,
    "oracle": OraclePolicy,
    "maxrate": MaxRatePolicy,
    "greedy": GreedyPolicy,
    "random": RandomPolicy,
    "halfduplex": HalfDuplexPolicy,
}
