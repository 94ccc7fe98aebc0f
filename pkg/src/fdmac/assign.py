"""Epoch-start access optimization.

Pipeline: water-filled minimum shares, the airtime LP over candidate pairs,
conversion of transmission-opportunity counts to access probabilities, and
the contention parameters announced to clients.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .pairing import PairKey, PairMetrics, pair_sort_key

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-6


class AssignmentInfeasible(Exception):
    """The LP solver reported infeasibility even after share repair."""


class UndefinedConditional(Exception):
    """Conditional uplink probability queried for a zero-marginal endpoint."""


@dataclass
class DemandSnapshot:
    """Measured per-client demand for one epoch. Arrays are indexed by client
    id with slot 0 unused."""

    lambda_d: np.ndarray  # frames/s
    lambda_u: np.ndarray
    l_d_bits: np.ndarray  # mean frame lengths
    l_u_bits: np.ndarray
    T_s: float

    def __post_init__(self):
        if self.T_s <= 0:
            raise ValueError("T_s must be > 0")
        if np.any(self.lambda_d[1:] < 0) or np.any(self.lambda_u[1:] < 0):
            raise ValueError("arrival rates must be >= 0")

    @property
    def n_clients(self) -> int:
        return len(self.lambda_d) - 1


@dataclass
class MinShares:
    eta_d: np.ndarray  # guaranteed txops per epoch, slot 0 unused
    eta_u: np.ndarray


@dataclass
class Allocation:
    n: dict[PairKey, float]
    objective_bps: float


@dataclass
class AccessTable:
    """Per-pair access probabilities plus derived contention parameters."""

    p: dict[PairKey, float] = field(default_factory=dict)
    p_d: dict[int, float] = field(default_factory=dict)
    p_u: dict[PairKey, float] = field(default_factory=dict)
    cw: dict[PairKey, int] = field(default_factory=dict)

    @property
    def is_idle(self) -> bool:
        return not self.p


def mean_base_airtime(demands: DemandSnapshot, lowest_rate_mbps: float) -> float:
    """Average frame length over all clients and directions divided by the
    lowest bit-rate; the per-txop time unit of the fairness pass."""
    lengths = np.concatenate([demands.l_d_bits[1:], demands.l_u_bits[1:]])
    return float(np.mean(lengths)) / (lowest_rate_mbps * 1e6)


def min_fair_shares(demands: DemandSnapshot, t_bar_s: float) -> MinShares:
    """Water-fill the epoch's txop budget equally over per-direction demands.

    Every unserved demand receives the same fill until it is fully served or
    the budget T/t_bar is exhausted; served demands keep exactly their demand.
    """
    if t_bar_s <= 0:
        raise ValueError("t_bar_s must be > 0")
    C = demands.n_clients
    d = np.concatenate([demands.lambda_d[1:], demands.lambda_u[1:]]) * demands.T_s
    eta = np.zeros(2 * C)
    active = d > 0
    budget = demands.T_s / t_bar_s
    tol = 1e-12 * max(1.0, budget)
    while active.any():
        left = (budget - eta.sum()) / active.sum()
        grant = min(float(d[active].min()), left)
        if grant <= tol:
            break
        eta[active] += grant
        d[active] -= grant
        active &= d > tol
    shares = MinShares(eta_d=np.zeros(C + 1), eta_u=np.zeros(C + 1))
    shares.eta_d[1:] = eta[:C]
    shares.eta_u[1:] = eta[C:]
    return shares


def _stack_lp(pairs, demands, eta_d, eta_u):
    """Build the column order and A_ub x <= b_ub rows of the assignment LP."""
    keys = sorted(pairs, key=pair_sort_key)
    nv = len(keys)
    down = np.array([k.down for k in keys])
    up = np.array([k.up for k in keys])
    t = np.array([pairs[k].t_s for k in keys])
    l = np.array([pairs[k].l_total_bits for k in keys])
    C = demands.n_clients
    T = demands.T_s

    rows, rhs = [], []
    for i in range(1, C + 1):
        mask = (down == i).astype(float)
        if eta_d[i] > 0:
            rows.append(-mask)
            rhs.append(-eta_d[i])
        if mask.any():
            rows.append(mask)
            rhs.append(demands.lambda_d[i] * T)
    for j in range(1, C + 1):
        mask = (up == j).astype(float)
        if eta_u[j] > 0:
            rows.append(-mask)
            rhs.append(-eta_u[j])
        if mask.any():
            rows.append(mask)
            rhs.append(demands.lambda_u[j] * T)
    rows.append(t)
    rhs.append(T)
    return keys, np.array(rows), np.array(rhs), l / T, t


def repair_shares(pairs, demands, shares):
    """Zero shares that have no candidate pair and scale the rest down so the
    induced half-duplex allocation fits the airtime budget. Returns the
    per-direction bounds actually fed to the LP."""
    C = demands.n_clients
    eta_d = shares.eta_d.copy()
    eta_u = shares.eta_u.copy()
    down_present = {k.down for k in pairs}
    up_present = {k.up for k in pairs}
    for i in range(1, C + 1):
        if eta_d[i] > 0 and i not in down_present:
            logger.warning("client %d has no downlink candidates; zeroing its share", i)
            eta_d[i] = 0.0
        if eta_u[i] > 0 and i not in up_present:
            logger.warning("client %d has no uplink candidates; zeroing its share", i)
            eta_u[i] = 0.0
    hd_time = 0.0
    for i in range(1, C + 1):
        if eta_d[i] > 0:
            hd_time += eta_d[i] * pairs[PairKey(i, 0)].t_s
        if eta_u[i] > 0:
            hd_time += eta_u[i] * pairs[PairKey(0, i)].t_s
    if hd_time > demands.T_s:
        scale = demands.T_s / hd_time
        logger.warning(
            "half-duplex airtime of minimum shares exceeds the epoch (%.3fx); scaling down",
            hd_time / demands.T_s,
        )
        eta_d *= scale
        eta_u *= scale
    return eta_d, eta_u


def solve_assignment(
    pairs: dict[PairKey, PairMetrics],
    demands: DemandSnapshot,
    shares: MinShares,
    lex_tiebreak: bool = True,
) -> Allocation:
    """Maximize expected epoch throughput subject to minimum shares, demand
    caps and the airtime budget.

    Deterministic for fixed input. Among optimal vertices, prefers allocations
    on pairs earliest in the (up, down) key order via a secondary solve.
    """
    if not pairs:
        return Allocation(n={}, objective_bps=0.0)
    eta_d, eta_u = repair_shares(pairs, demands, shares)
    keys, A, b, coef, t = _stack_lp(pairs, demands, eta_d, eta_u)

    res = linprog(-coef, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    if res.status == 2:
        raise AssignmentInfeasible(res.message)
    if not res.success:
        raise RuntimeError(f"LP solve failed: {res.message}")
    x = res.x
    objective = float(coef @ x)

    if lex_tiebreak and len(keys) > 1:
        nv = len(keys)
        weights = 1.0 - np.arange(nv) / nv  # decreasing along the key order
        A2 = np.vstack([A, -coef])
        b2 = np.append(b, -(objective - 1e-9 * max(1.0, abs(objective))))
        res2 = linprog(-weights, A_ub=A2, b_ub=b2, bounds=(0, None), method="highs")
        if res2.success:
            x = res2.x
            objective = float(coef @ x)

    x = np.where(x < 1e-12, 0.0, x)
    return Allocation(
        n={k: float(v) for k, v in zip(keys, x)},
        objective_bps=float(coef @ x),
    )


def allocation_violations(
    pairs: dict[PairKey, PairMetrics],
    demands: DemandSnapshot,
    shares: MinShares,
    alloc: Allocation,
) -> dict[str, float]:
    """Worst-case violation of each constraint family; all should be <= tol.

    Uses the repaired shares actually fed to the LP.
    """
    eta_d, eta_u = repair_shares(pairs, demands, shares)
    C = demands.n_clients
    T = demands.T_s
    down_sum = np.zeros(C + 1)
    up_sum = np.zeros(C + 1)
    airtime = 0.0
    for k, v in alloc.n.items():
        if k.down > 0:
            down_sum[k.down] += v
        if k.up > 0:
            up_sum[k.up] += v
        airtime += v * pairs[k].t_s
    out = {
        "share_down": float(np.max(eta_d - down_sum, initial=0.0)),
        "share_up": float(np.max(eta_u - up_sum, initial=0.0)),
        "cap_down": float(np.max(down_sum[1:] - demands.lambda_d[1:] * T, initial=0.0)),
        "cap_up": float(np.max(up_sum[1:] - demands.lambda_u[1:] * T, initial=0.0)),
        "airtime": max(0.0, airtime - T),
        "nonneg": max(0.0, -min(alloc.n.values(), default=0.0)),
    }
    return out


def to_probabilities(allocation: Allocation) -> dict[PairKey, float]:
    """Normalize txop counts to access probabilities; empty when all zero."""
    total = sum(allocation.n.values())
    if total <= 0:
        return {}
    return {k: v / total for k, v in allocation.n.items() if v > 0}


def downlink_marginals(p: dict[PairKey, float]) -> dict[int, float]:
    """Probability that each downlink endpoint (0 = reserved uplink time) is
    selected: the sum of its pair probabilities."""
    out: dict[int, float] = {}
    for k, v in p.items():
        out[k.down] = out.get(k.down, 0.0) + v
    return out


def conditional_uplink(
    p: dict[PairKey, float], p_d: dict[int, float]
) -> dict[PairKey, float]:
    """Winning probability of each uplink endpoint given the downlink choice.

    Only endpoints with positive marginal appear; querying others is
    undefined (UndefinedConditional from conditional_for)."""
    out: dict[PairKey, float] = {}
    for k, v in p.items():
        marginal = p_d.get(k.down, 0.0)
        if marginal > 0:
            out[k] = v / marginal
    return out


def conditional_for(
    p: dict[PairKey, float], p_d: dict[int, float], key: PairKey
) -> float:
    marginal = p_d.get(key.down, 0.0)
    if marginal <= 0:
        raise UndefinedConditional(f"p_d({key.down}) = 0")
    return p.get(key, 0.0) / marginal


def contention_window(p_u_value: float, cw_max: int) -> int:
    """CW = min(ceil(1/p_u), CW_max). A zero-probability pairing gets no
    window (the client never contends for it)."""
    if not 0.0 < p_u_value <= 1.0:
        raise ValueError("p_u_value must be in (0, 1]")
    return min(math.ceil(1.0 / p_u_value), cw_max)


def build_access_table(allocation: Allocation, cw_max: int) -> AccessTable:
    p = to_probabilities(allocation)
    if not p:
        return AccessTable()
    p_d = downlink_marginals(p)
    p_u = conditional_uplink(p, p_d)
    cw = {k: contention_window(v, cw_max) for k, v in p_u.items() if v > 0}
    return AccessTable(p=p, p_d=p_d, p_u=p_u, cw=cw)


def assign_epoch(
    demands: DemandSnapshot,
    pairs: dict[PairKey, PairMetrics],
    cw_max: int,
    lowest_rate_mbps: float = 6.0,
    lex_tiebreak: bool = True,
) -> tuple[AccessTable, Allocation]:
    """Full epoch-start pipeline: fairness shares, assignment LP, probability
    conversion, contention windows.

    On LP infeasibility the shares are zeroed and the solve retried once,
    with a logged warning.
    """
    t_bar = mean_base_airtime(demands, lowest_rate_mbps)
    shares = min_fair_shares(demands, t_bar)
    try:
        alloc = solve_assignment(pairs, demands, shares, lex_tiebreak=lex_tiebreak)
    except AssignmentInfeasible:
        logger.warning("assignment LP infeasible; retrying with zeroed shares")
        empty = MinShares(
            eta_d=np.zeros_like(shares.eta_d), eta_u=np.zeros_like(shares.eta_u)
        )
        alloc = solve_assignment(pairs, demands, empty, lex_tiebreak=lex_tiebreak)
    return build_access_table(alloc, cw_max), alloc


def format_access_table(table: AccessTable, allocation: Allocation | None = None) -> str:
    """Plain-text dump: pair, n, p, p_d, p_u, CW."""
    lines = ["# down up n p p_d p_u cw"]
    for key in sorted(table.p, key=pair_sort_key):
        n = allocation.n.get(key, float("nan")) if allocation else float("nan")
        lines.append(
            f"{key.down} {key.up} {n:.6g} {table.p[key]:.6g} "
            f"{table.p_d.get(key.down, 0.0):.6g} {table.p_u.get(key, 0.0):.6g} "
            f"{table.cw.get(key, 0)}"
        )
    return "\n".join(lines) + "\n"
