"""Topologies, link gains and SINR computations for a single-AP WLAN.

Node 0 is always the access point; clients are numbered 1..C. All gains are
linear power gains, all powers are watts unless a name says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

AP = 0

# Free-space loss at the 1 m reference distance for a 2.4 GHz carrier.
DEFAULT_PL0_DB = 40.05
DEFAULT_PATH_LOSS_EXP = 3.0


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        return float("-inf")
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0.0:
        return float("-inf")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class PowerConfig:
    """Transmit power ceiling and thermal noise floor."""

    max_tx_dbm: float = 15.0
    noise_dbm: float = -95.0

    def __post_init__(self):
        if not self.max_tx_dbm > self.noise_dbm:
            raise ValueError("max_tx_dbm must exceed noise_dbm")

    @property
    def max_tx_w(self) -> float:
        return dbm_to_watts(self.max_tx_dbm)

    @property
    def noise_w(self) -> float:
        return dbm_to_watts(self.noise_dbm)


@dataclass(frozen=True)
class Topology:
    """Node placement inside a square area. Row 0 of positions is the AP."""

    positions: np.ndarray  # (n, 2) meters
    area_side_m: float

    @property
    def node_count(self) -> int:
        return self.positions.shape[0]

    @property
    def n_clients(self) -> int:
        return self.node_count - 1

    def distance(self, a: int, b: int) -> float:
        return float(np.hypot(*(self.positions[a] - self.positions[b])))

    def distance_matrix(self) -> np.ndarray:
        d = self.positions[:, None, :] - self.positions[None, :, :]
        return np.hypot(d[..., 0], d[..., 1])


def generate_topology(n_clients: int, area_side_m: float, seed: int) -> Topology:
    """Place the AP and n_clients nodes i.i.d. uniform over the square."""
    if n_clients < 1:
        raise ValueError("n_clients must be >= 1")
    if area_side_m <= 0:
        raise ValueError("area_side_m must be > 0")
    rng = np.random.default_rng(seed)
    pos = rng.uniform(0.0, area_side_m, size=(n_clients + 1, 2))
    return Topology(positions=pos, area_side_m=float(area_side_m))


TOPOLOGY_HEADER = "# node_id x_m y_m"


def dump_topology(topology: Topology) -> str:
    """Plain-text table, one row per node: node_id x_m y_m."""
    lines = [TOPOLOGY_HEADER]
    for idx, (x, y) in enumerate(topology.positions):
        lines.append(f"{idx} {x:.10g} {y:.10g}")
    return "\n".join(lines) + "\n"


def load_topology(text: str, area_side_m: float | None = None) -> Topology:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        node_id, x, y = line.split()
        rows.append((int(node_id), float(x), float(y)))
    rows.sort()
    pos = np.array([[x, y] for _, x, y in rows])
    side = area_side_m if area_side_m is not None else float(pos.max())
    return Topology(positions=pos, area_side_m=side)


def link_gain(
    distance_m: float,
    fading_power: float,
    pl0_db: float = DEFAULT_PL0_DB,
    exponent: float = DEFAULT_PATH_LOSS_EXP,
) -> float:
    """Linear power gain of a link: fading * 10^(-PL(d)/10).

    PL(d) = pl0_db + 10*exponent*log10(d / 1 m). Distances below 1 m are
    clamped to the 1 m reference so PL stays well defined.
    """
    if distance_m <= 0.0:
        raise ValueError("distance_m must be > 0")
    if fading_power < 0.0:
        raise ValueError("fading_power must be >= 0")
    d = max(distance_m, 1.0)
    pl_db = pl0_db + 10.0 * exponent * math.log10(d)
    return fading_power * 10.0 ** (-pl_db / 10.0)


@dataclass
class LinkState:
    """One channel realization: symmetric gain matrix plus noise and SIC."""

    gain: np.ndarray  # (n, n) linear power gains, gain[a, b] == gain[b, a]
    noise_w: np.ndarray  # (n,) per-node noise power, watts
    sic_db: float
    self_gain: float  # residual self-interference gain at the AP

    @property
    def node_count(self) -> int:
        return self.gain.shape[0]


def draw_link_state(
    topology: Topology,
    power_cfg: PowerConfig,
    sic_db: float,
    rng: np.random.Generator,
    pl0_db: float = DEFAULT_PL0_DB,
    exponent: float = DEFAULT_PATH_LOSS_EXP,
) -> LinkState:
    """Draw one Rayleigh-faded channel realization.

    Fading is one zero-mean unit-variance complex Gaussian draw per unordered
    node pair, so |g|^2 is Exp(1) and the gain matrix is reciprocal.
    """
    n = topology.node_count
    dist = topology.distance_matrix()
    iu = np.triu_indices(n, k=1)
    m = len(iu[0])
    re_im = rng.standard_normal((2, m))
    fading = (re_im[0] ** 2 + re_im[1] ** 2) / 2.0

    d = np.maximum(dist[iu], 1.0)
    pl_db = pl0_db + 10.0 * exponent * np.log10(d)
    g = fading * 10.0 ** (-pl_db / 10.0)

    gain = np.zeros((n, n))
    gain[iu] = g
    gain += gain.T
    self_gain = 10.0 ** (-sic_db / 10.0)
    gain[AP, AP] = self_gain
    noise = np.full(n, power_cfg.noise_w)
    return LinkState(gain=gain, noise_w=noise, sic_db=float(sic_db), self_gain=self_gain)


def sinr_downlink(
    p_ap_w: float, p_up_w: float, gain_0i: float, gain_ji: float, noise_i_w: float
) -> float:
    """Linear SINR at a downlink client.

    Numerator is the AP's signal, the interference term is the concurrent
    uplink client's power seen at the downlink client (the ICI).
    """
    _check_sinr_args(p_ap_w, p_up_w, gain_0i, gain_ji, noise_i_w)
    return p_ap_w * gain_0i / (noise_i_w + p_up_w * gain_ji)


def sinr_uplink(
    p_up_w: float, p_ap_w: float, gain_j0: float, self_gain: float, noise_ap_w: float
) -> float:
    """Linear SINR of an uplink client at the AP.

    The interference term is the AP's own downlink leaking through the
    residual self-interference channel.
    """
    _check_sinr_args(p_up_w, p_ap_w, gain_j0, self_gain, noise_ap_w)
    return p_up_w * gain_j0 / (noise_ap_w + p_ap_w * self_gain)


def _check_sinr_args(p1, p2, g1, g2, noise):
    if p1 < 0 or p2 < 0 or g1 < 0 or g2 < 0:
        raise ValueError("powers and gains must be >= 0")
    if noise <= 0:
        raise ValueError("noise must be > 0")
