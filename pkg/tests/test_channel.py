import math

import numpy as np
import pytest

from fdmac.channel import (
    DEFAULT_PL0_DB,
    PowerConfig,
    draw_link_state,
    dump_topology,
    generate_topology,
    link_gain,
    linear_to_db,
    load_topology,
    sinr_downlink,
    sinr_uplink,
)


def test_topology_boundary_containment():
    topo = generate_topology(1, 100.0, seed=7)
    assert topo.node_count == 2
    assert np.all(topo.positions >= 0.0)
    assert np.all(topo.positions <= 100.0)


def test_topology_determinism():
    a = generate_topology(30, 100.0, seed=3)
    b = generate_topology(30, 100.0, seed=3)
    assert np.array_equal(a.positions, b.positions)


def test_topology_rejects_zero_clients():
    with pytest.raises(ValueError):
        generate_topology(0, 100.0, seed=1)
    with pytest.raises(ValueError):
        generate_topology(3, 0.0, seed=1)


def test_mean_ap_client_distance():
    # Monte-Carlo oracle: mean distance between two uniform points in a
    # square is ~0.5214 * side
    total = 0.0
    count = 0
    for seed in range(1000):
        topo = generate_topology(30, 100.0, seed=seed)
        d = np.hypot(*(topo.positions[1:] - topo.positions[0]).T)
        total += d.sum()
        count += len(d)
    mean = total / count
    assert abs(mean - 52.14) < 2.0


def test_link_gain_reference_distance():
    assert link_gain(1.0, 1.0) == pytest.approx(10 ** (-DEFAULT_PL0_DB / 10.0))


def test_link_gain_30db_per_decade():
    ratio = link_gain(10.0, 1.0) / link_gain(1.0, 1.0)
    assert 10 * math.log10(ratio) == pytest.approx(-30.0)


def test_link_gain_deep_fade():
    assert link_gain(10.0, 0.0) == 0.0


def test_link_gain_invalid_and_clamp():
    with pytest.raises(ValueError):
        link_gain(0.0, 1.0)
    with pytest.raises(ValueError):
        link_gain(5.0, -0.1)
    assert link_gain(0.4, 1.0) == link_gain(1.0, 1.0)


def test_link_gain_halving_slope():
    rng = np.random.default_rng(0)
    for _ in range(50):
        d = rng.uniform(1.0, 80.0)
        f = rng.exponential()
        assert link_gain(2 * d, f) / link_gain(d, f) == pytest.approx(2.0 ** -3)


def test_sinr_downlink_plain_snr():
    assert sinr_downlink(0.03, 0.0, 2e-9, 5e-10, 1e-12) == pytest.approx(
        0.03 * 2e-9 / 1e-12
    )


def test_sinr_downlink_hand_value():
    noise = 1e-12
    s = sinr_downlink(100 * noise, noise, 1.0, 1.0, noise)
    assert s == pytest.approx(50.0)


def test_sinr_downlink_ici_equal_noise_is_3db():
    noise = 3.16e-13
    free = sinr_downlink(1e-3, 0.0, 1e-9, 1e-9, noise)
    loaded = sinr_downlink(1e-3, noise / 1e-9, 1e-9, 1e-9, noise)
    assert 10 * math.log10(free / loaded) == pytest.approx(10 * math.log10(2), abs=1e-9)


def test_sinr_uplink_plain():
    assert sinr_uplink(0.01, 0.0, 3e-10, 1e-11, 1e-12) == pytest.approx(
        0.01 * 3e-10 / 1e-12
    )


def test_sinr_uplink_default_sic_doubles_noise():
    # 15 dBm through 110 dB of suppression lands exactly on the -95 dBm floor
    cfg = PowerConfig()
    self_gain = 10.0 ** (-110.0 / 10.0)
    assert cfg.max_tx_w * self_gain == pytest.approx(cfg.noise_w, rel=1e-9)
    loaded = sinr_uplink(0.01, cfg.max_tx_w, 1e-10, self_gain, cfg.noise_w)
    free = sinr_uplink(0.01, 0.0, 1e-10, self_gain, cfg.noise_w)
    assert 10 * math.log10(free / loaded) == pytest.approx(3.0103, abs=1e-3)


def test_sinr_uplink_perfect_sic_limit():
    free = sinr_uplink(0.01, 0.0, 1e-10, 0.0, 1e-12)
    suppressed = sinr_uplink(0.01, 0.03, 1e-10, 10 ** (-300 / 10.0), 1e-12)
    assert suppressed == pytest.approx(free)


def test_sinr_monotonicity_sweeps():
    rng = np.random.default_rng(1)
    for _ in range(100):
        g0, gji = rng.exponential(1e-9, 2)
        noise = 10 ** rng.uniform(-13, -11)
        p_ap = rng.uniform(1e-4, 0.03)
        ups = np.sort(rng.uniform(0.0, 0.03, 5))
        vals = [sinr_downlink(p_ap, p, g0, gji, noise) for p in ups]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
        assert sinr_downlink(p_ap, 0.0, g0, gji, noise) >= vals[-1]
        aps = np.sort(rng.uniform(1e-4, 0.03, 5))
        vals_up = [sinr_downlink(p, ups[2], g0, gji, noise) for p in aps]
        assert all(b >= a - 1e-15 for a, b in zip(vals_up, vals_up[1:]))


def test_sinr_validation():
    with pytest.raises(ValueError):
        sinr_downlink(-1.0, 0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        sinr_uplink(1.0, 0.0, 1.0, 1.0, 0.0)


def test_link_state_determinism_and_reciprocity():
    topo = generate_topology(10, 100.0, seed=5)
    cfg = PowerConfig()
    a = draw_link_state(topo, cfg, 110.0, np.random.default_rng(9))
    b = draw_link_state(topo, cfg, 110.0, np.random.default_rng(9))
    assert np.array_equal(a.gain, b.gain)
    assert np.allclose(a.gain, a.gain.T)
    assert a.self_gain == pytest.approx(10.0 ** (-11.0))
    assert np.all(a.gain >= 0.0)


def test_linear_to_db_zero():
    assert linear_to_db(0.0) == float("-inf")


def test_topology_dump_load_roundtrip():
    topo = generate_topology(4, 50.0, seed=2)
    text = dump_topology(topo)
    assert text.splitlines()[0].startswith("#")
    back = load_topology(text, area_side_m=50.0)
    assert np.allclose(back.positions, topo.positions)
    assert back.area_side_m == 50.0
