"""fdmac: discrete-event simulator and optimization toolkit for a three-node
full-duplex WLAN MAC with half-duplex clients."""

from .assign import (
    AccessTable,
    Allocation,
    DemandSnapshot,
    MinShares,
    assign_epoch,
    conditional_uplink,
    contention_window,
    downlink_marginals,
    min_fair_shares,
    solve_assignment,
    to_probabilities,
)
from .channel import (
    AP,
    LinkState,
    PowerConfig,
    Topology,
    draw_link_state,
    generate_topology,
    link_gain,
    sinr_downlink,
    sinr_uplink,
)
from .engine import SCHEMES, SimConfig, SimReport, run_simulation
from .pairing import PairKey, PairMetrics, build_candidate_pairs, pair_airtime
from .phy import (
    RateTable,
    decode_rate_feedback,
    effective_throughput,
    encode_rate_feedback,
    pdr,
    select_downlink_rate,
    select_uplink_rate,
    uplink_power_cap,
)

__version__ = "0.1.0"
